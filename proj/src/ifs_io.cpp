#include "fdrum/ifs_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fdrum {

namespace {

Ifs homothety_system(double ratio, const std::vector<std::vector<double>>& translations) {
  std::vector<SimilarityMap<double>> maps;
  for (const auto& t : translations)
    maps.push_back(SimilarityMap<double>::homothety(
        ratio, Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()))));
  return Ifs(std::move(maps));
}

double parse_number(const std::string& token, int line) {
  auto parse_plain = [&](std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end)
      throw ParseError(line, "not a number: '" + token + "'");
    return v;
  };
  const auto slash = token.find('/');
  if (slash == std::string::npos) return parse_plain(token);
  const double num = parse_plain(std::string_view(token).substr(0, slash));
  const double den = parse_plain(std::string_view(token).substr(slash + 1));
  if (den == 0.0) throw ParseError(line, "zero denominator in '" + token + "'");
  return num / den;
}

struct PendingMap {
  int line = 0;
  std::optional<std::vector<double>> matrix;
  std::optional<std::vector<double>> translation;
  std::optional<double> ratio;
};

}  // namespace

std::vector<std::string> ifs_preset_names() { return {"interval", "cantor", "carpet", "gasket"}; }

std::optional<Ifs> ifs_preset(const std::string& name) {
  if (name == "interval") return homothety_system(0.5, {{0.0}, {0.5}});
  if (name == "cantor") return homothety_system(1.0 / 3.0, {{0.0}, {2.0 / 3.0}});
  if (name == "carpet") {
    std::vector<std::vector<double>> t;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != 1 || b != 1) t.push_back({a / 3.0, b / 3.0});
    return homothety_system(1.0 / 3.0, t);
  }
  if (name == "gasket")
    return homothety_system(0.5, {{0.0, 0.0}, {0.5, 0.0}, {0.25, std::sqrt(3.0) / 4.0}});
  return std::nullopt;
}

Ifs parse_ifs(std::istream& in) {
  std::optional<int> dim;
  int dim_line = 0;
  std::vector<PendingMap> pending;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::string key;
    if (!(fields >> key)) continue;
    std::vector<std::string> values;
    for (std::string v; fields >> v;) values.push_back(v);

    if (key == "dim") {
      if (dim) throw ParseError(line, "duplicate 'dim' (first given on line " +
                                          std::to_string(dim_line) + ")");
      if (values.size() != 1) throw ParseError(line, "'dim' takes exactly one value");
      const double v = parse_number(values[0], line);
      if (v < 1 || v != std::floor(v)) throw ParseError(line, "'dim' must be a positive integer");
      dim = static_cast<int>(v);
      dim_line = line;
    } else if (key == "map") {
      if (!values.empty()) throw ParseError(line, "'map' takes no values");
      pending.push_back(PendingMap{line, {}, {}, {}});
    } else if (key == "matrix" || key == "translation" || key == "ratio") {
      if (pending.empty()) throw ParseError(line, "'" + key + "' outside a 'map' block");
      if (!dim) throw ParseError(line, "'dim' must precede map blocks");
      auto& m = pending.back();
      std::vector<double> numbers;
      for (const auto& v : values) numbers.push_back(parse_number(v, line));
      const auto d = static_cast<std::size_t>(*dim);
      if (key == "matrix") {
        if (m.matrix) throw ParseError(line, "duplicate 'matrix' in map");
        if (numbers.size() != d * d)
          throw ParseError(line, "'matrix' expects " + std::to_string(d * d) + " entries, got " +
                                     std::to_string(numbers.size()));
        m.matrix = numbers;
      } else if (key == "translation") {
        if (m.translation) throw ParseError(line, "duplicate 'translation' in map");
        if (numbers.size() != d)
          throw ParseError(line, "'translation' expects " + std::to_string(d) + " entries, got " +
                                     std::to_string(numbers.size()));
        m.translation = numbers;
      } else {
        if (m.ratio) throw ParseError(line, "duplicate 'ratio' in map");
        if (numbers.size() != 1) throw ParseError(line, "'ratio' takes exactly one value");
        m.ratio = numbers[0];
      }
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }

  if (!dim) throw ParseError(line, "missing 'dim'");
  if (pending.size() < 2)
    throw ParseError(line, "need at least two 'map' blocks, found " +
                               std::to_string(pending.size()));
  const auto d = static_cast<Eigen::Index>(*dim);
  std::vector<SimilarityMap<double>> maps;
  for (const auto& m : pending) {
    if (!m.matrix) throw ParseError(m.line, "map is missing 'matrix'");
    if (!m.translation) throw ParseError(m.line, "map is missing 'translation'");
    if (!m.ratio) throw ParseError(m.line, "map is missing 'ratio'");
    Eigen::MatrixXd linear(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) linear(r, c) = (*m.matrix)[static_cast<std::size_t>(r * d + c)];
    const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(m.translation->data(), d);
    try {
      maps.emplace_back(linear, t, *m.ratio);
    } catch (const ArgumentError& e) {
      throw ParseError(m.line, e.what());
    }
  }
  return Ifs(std::move(maps));
}

Ifs parse_ifs_string(const std::string& text) {
  std::istringstream in(text);
  return parse_ifs(in);
}

Ifs load_ifs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open IFS file '" + path + "'");
  return parse_ifs(in);
}

Ifs resolve_ifs(const std::string& name_or_path) {
  if (auto preset = ifs_preset(name_or_path)) return *preset;
  return load_ifs_file(name_or_path);
}

void write_ifs(std::ostream& out, const Ifs& ifs) {
  const auto d = ifs.dim();
  out << std::setprecision(17) << "dim " << d << '\n';
  for (const auto& m : ifs.maps()) {
    out << "map\n  matrix";
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) out << ' ' << m.linear()(r, c);
    out << "\n  translation";
    for (Eigen::Index k = 0; k < d; ++k) out << ' ' << m.translation()(k);
    out << "\n  ratio " << m.ratio() << '\n';
  }
}

}  // namespace fdrum
