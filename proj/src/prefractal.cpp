#include "fdrum/prefractal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace fdrum {

namespace {

std::int64_t checked_pow(std::int64_t b, int n) {
  std::int64_t r = 1;
  for (int i = 0; i < n; ++i) {
    if (r > (std::int64_t{1} << 40) / b) throw ArgumentError("grid too large: " + std::to_string(b) + "^" + std::to_string(n));
    r *= b;
  }
  return r;
}

// Signed permutation describing how an aligned map acts on cell indices:
// output axis k takes input axis perm[k] with sign sign[k], then shifts by
// offset[k] cells of side 1/b.
struct AlignedAction {
  std::vector<int> perm;
  std::vector<int> sign;
  std::vector<std::int64_t> offset;
};

std::optional<AlignedAction> aligned_action(const SimilarityMap<double>& m, int base) {
  const double tol = 1e-12;
  const auto d = m.dim();
  if (std::abs(m.ratio() * base - 1.0) > tol) return std::nullopt;
  AlignedAction a;
  const Eigen::MatrixXd q = m.linear() * base;
  for (Eigen::Index r = 0; r < d; ++r) {
    int found = -1;
    int s = 0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double v = q(r, c);
      if (std::abs(v) < tol) continue;
      if (std::abs(std::abs(v) - 1.0) > tol || found >= 0) return std::nullopt;
      found = static_cast<int>(c);
      s = v > 0 ? 1 : -1;
    }
    if (found < 0) return std::nullopt;
    // Image of [0,1] along this axis starts at t (s=+1) or t - 1/b (s=-1).
    const double lower = m.translation()(r) - (s < 0 ? 1.0 / base : 0.0);
    const double cells = lower * base;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 || rounded < 0 || rounded > base - 1) return std::nullopt;
    a.perm.push_back(found);
    a.sign.push_back(s);
    a.offset.push_back(static_cast<std::int64_t>(rounded));
  }
  return a;
}

}  // namespace

CellSet::CellSet(int level, int base, int dim, std::vector<std::int64_t> cells)
    : level_(level), base_(base), dim_(dim), cells_(std::move(cells)) {
  if (level < 0) throw ArgumentError("CellSet: level must be >= 0");
  if (base < 2) throw ArgumentError("CellSet: base must be >= 2");
  if (dim < 1) throw ArgumentError("CellSet: dim must be >= 1");
  side_ = checked_pow(base, level);
  const std::int64_t total = checked_pow(side_, dim);
  std::sort(cells_.begin(), cells_.end());
  if (std::adjacent_find(cells_.begin(), cells_.end()) != cells_.end())
    throw ArgumentError("CellSet: duplicate cell");
  if (!cells_.empty() && (cells_.front() < 0 || cells_.back() >= total))
    throw ArgumentError("CellSet: cell coordinate out of range");
}

CellSet CellSet::from_coords(int level, int base, int dim, const std::vector<IndexVector>& coords) {
  const std::int64_t side = checked_pow(base, level);
  std::vector<std::int64_t> cells;
  cells.reserve(coords.size());
  for (const auto& c : coords) {
    if (c.size() != dim) throw ArgumentError("CellSet: coordinate has wrong dimension");
    std::int64_t idx = 0;
    for (int k = dim - 1; k >= 0; --k) {
      if (c(k) < 0 || c(k) >= side) throw ArgumentError("CellSet: cell coordinate out of range");
      idx = idx * side + c(k);
    }
    cells.push_back(idx);
  }
  return CellSet(level, base, dim, std::move(cells));
}

IndexVector CellSet::coords(std::size_t i) const {
  IndexVector c(dim_);
  std::int64_t idx = cells_.at(i);
  for (int k = 0; k < dim_; ++k) {
    c(k) = idx % side_;
    idx /= side_;
  }
  return c;
}

std::int64_t CellSet::linear_index(const IndexVector& c) const {
  std::int64_t idx = 0;
  for (int k = dim_ - 1; k >= 0; --k) idx = idx * side_ + c(k);
  return idx;
}

bool CellSet::contains(const IndexVector& c) const {
  if (c.size() != dim_) return false;
  for (int k = 0; k < dim_; ++k)
    if (c(k) < 0 || c(k) >= side_) return false;
  return std::binary_search(cells_.begin(), cells_.end(), linear_index(c));
}

GridDomain::GridDomain(double spacing, IndexVector divisions, std::vector<std::int64_t> interior)
    : spacing_(spacing), divisions_(std::move(divisions)), interior_(std::move(interior)) {
  if (!(spacing_ > 0.0)) throw ArgumentError("GridDomain: spacing must be positive");
  if (divisions_.size() < 1) throw ArgumentError("GridDomain: dim must be >= 1");
  if ((divisions_.array() < 1).any()) throw ArgumentError("GridDomain: divisions must be >= 1");
  std::sort(interior_.begin(), interior_.end());
  interior_.erase(std::unique(interior_.begin(), interior_.end()), interior_.end());
}

GridDomain GridDomain::box(double spacing, const IndexVector& divisions) {
  std::vector<std::int64_t> interior;
  const auto d = divisions.size();
  IndexVector node = IndexVector::Ones(d);
  if ((divisions.array() < 2).any()) return GridDomain(spacing, divisions, {});
  GridDomain shell(spacing, divisions, {});
  while (true) {
    interior.push_back(shell.linear_node(node));
    Eigen::Index k = 0;
    for (; k < d; ++k) {
      if (++node(k) < divisions(k)) break;
      node(k) = 1;
    }
    if (k == d) break;
  }
  return GridDomain(spacing, divisions, std::move(interior));
}

std::int64_t GridDomain::linear_node(const IndexVector& node) const {
  std::int64_t idx = 0;
  for (int k = dim() - 1; k >= 0; --k) idx = idx * (divisions_(k) + 1) + node(k);
  return idx;
}

IndexVector GridDomain::node(std::size_t row) const {
  IndexVector n(dim());
  std::int64_t idx = interior_.at(row);
  for (int k = 0; k < dim(); ++k) {
    n(k) = idx % (divisions_(k) + 1);
    idx /= divisions_(k) + 1;
  }
  return n;
}

Eigen::VectorXd GridDomain::point(std::size_t row) const {
  return node(row).cast<double>() * spacing_;
}

std::optional<std::size_t> GridDomain::find(const IndexVector& n) const {
  if (n.size() != dim()) return std::nullopt;
  for (int k = 0; k < dim(); ++k)
    if (n(k) < 0 || n(k) > divisions_(k)) return std::nullopt;
  const auto idx = linear_node(n);
  const auto it = std::lower_bound(interior_.begin(), interior_.end(), idx);
  if (it == interior_.end() || *it != idx) return std::nullopt;
  return static_cast<std::size_t>(it - interior_.begin());
}

bool GridDomain::on_grid(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim()) return false;
  const Eigen::ArrayXd u = x.array() / spacing_;
  return ((u - u.round()).abs() <= tol).all();
}

std::optional<std::size_t> GridDomain::find_point(const Eigen::VectorXd& x, double tol) const {
  if (!on_grid(x, tol)) return std::nullopt;
  const IndexVector n = (x.array() / spacing_).round().cast<std::int64_t>().matrix();
  return find(n);
}

bool is_grid_aligned(const Ifs& ifs, int base) {
  if (base < 2) return false;
  return std::all_of(ifs.maps().begin(), ifs.maps().end(),
                     [&](const auto& m) { return aligned_action(m, base).has_value(); });
}

std::optional<int> natural_base(const Ifs& ifs) {
  const double inv = 1.0 / ifs.map(0).ratio();
  const double b = std::round(inv);
  if (b < 2 || std::abs(inv - b) > 1e-9) return std::nullopt;
  for (const auto& m : ifs.maps())
    if (std::abs(1.0 / m.ratio() - b) > 1e-9) return std::nullopt;
  return static_cast<int>(b);
}

CellSet rasterize_prefractal(const Ifs& ifs, int level, int base) {
  if (level < 0) throw ArgumentError("rasterize_prefractal: level must be >= 0");
  std::vector<AlignedAction> actions;
  for (const auto& m : ifs.maps()) {
    auto a = aligned_action(m, base);
    if (!a)
      throw UnsupportedIfsError(
          "rasterize_prefractal: IFS is not grid aligned for base " + std::to_string(base) +
          "; use sample_prefractal or build a GridDomain directly");
    actions.push_back(std::move(*a));
  }
  const int d = static_cast<int>(ifs.dim());
  std::vector<IndexVector> cells{IndexVector::Zero(d)};
  std::int64_t side = 1;
  for (int n = 1; n <= level; ++n) {
    std::vector<IndexVector> next;
    next.reserve(cells.size() * actions.size());
    for (const auto& a : actions) {
      for (const auto& c : cells) {
        IndexVector out(d);
        for (int k = 0; k < d; ++k) {
          const std::int64_t in = c(a.perm[static_cast<std::size_t>(k)]);
          const std::int64_t along = a.sign[static_cast<std::size_t>(k)] > 0 ? in : side - 1 - in;
          out(k) = a.offset[static_cast<std::size_t>(k)] * side + along;
        }
        next.push_back(std::move(out));
      }
    }
    side *= base;
    // Overlapping aligned copies may produce repeats.
    CellSet dedup = [&] {
      std::vector<std::int64_t> lin;
      lin.reserve(next.size());
      for (const auto& c : next) {
        std::int64_t idx = 0;
        for (int k = d - 1; k >= 0; --k) idx = idx * side + c(k);
        lin.push_back(idx);
      }
      std::sort(lin.begin(), lin.end());
      lin.erase(std::unique(lin.begin(), lin.end()), lin.end());
      return CellSet(n, base, d, std::move(lin));
    }();
    cells.clear();
    for (std::size_t i = 0; i < dedup.size(); ++i) cells.push_back(dedup.coords(i));
  }
  return CellSet::from_coords(level, base, d, cells);
}

CellSet sample_prefractal(const Ifs& ifs, int level, int base) {
  if (level < 0) throw ArgumentError("sample_prefractal: level must be >= 0");
  if (base < 2) throw ArgumentError("sample_prefractal: base must be >= 2");
  const int d = static_cast<int>(ifs.dim());
  const std::int64_t side = checked_pow(base, level);
  const double cell = 1.0 / static_cast<double>(side);
  const double half_diag = 0.5 * cell * std::sqrt(static_cast<double>(d));
  const int p = static_cast<int>(ifs.size());

  std::vector<std::int64_t> hits;
  Address a;
  a.word.assign(static_cast<std::size_t>(level), 1);
  while (true) {
    const auto w = compose_word(ifs, a);
    // Bounding box of the image of the unit cube.
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, 1e300);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, -1e300);
    for (int corner = 0; corner < (1 << d); ++corner) {
      Eigen::VectorXd u(d);
      for (int k = 0; k < d; ++k) u(k) = (corner >> k) & 1;
      const Eigen::VectorXd x = apply_map(w, u);
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    IndexVector first(d);
    IndexVector last(d);
    for (int k = 0; k < d; ++k) {
      first(k) = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::floor((lo(k) - half_diag) / cell)), 0, side - 1);
      last(k) = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::floor((hi(k) + half_diag) / cell)), 0, side - 1);
    }
    const double slack = half_diag / w.ratio();
    IndexVector c = first;
    while (true) {
      const Eigen::VectorXd center = (c.cast<double>().array() + 0.5).matrix() * cell;
      const Eigen::VectorXd u = invert_map(w, center);
      if ((u.array() >= -slack).all() && (u.array() <= 1.0 + slack).all()) {
        std::int64_t idx = 0;
        for (int k = d - 1; k >= 0; --k) idx = idx * side + c(k);
        hits.push_back(idx);
      }
      int k = 0;
      for (; k < d; ++k) {
        if (++c(k) <= last(k)) break;
        c(k) = first(k);
      }
      if (k == d) break;
    }

    int pos = level - 1;
    while (pos >= 0 && a.word[static_cast<std::size_t>(pos)] == p) {
      a.word[static_cast<std::size_t>(pos)] = 1;
      --pos;
    }
    if (pos < 0) break;
    ++a.word[static_cast<std::size_t>(pos)];
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return CellSet(level, base, d, std::move(hits));
}

GridDomain refine_to_grid(const CellSet& cs, int refinement) {
  if (refinement < 2) throw ArgumentError("refine_to_grid: refinement must be >= 2");
  const int d = cs.dim();
  const std::int64_t n = cs.side() * refinement;
  const double h = 1.0 / static_cast<double>(n);
  const IndexVector divisions = IndexVector::Constant(d, n);
  GridDomain shell(h, divisions, {});

  // A node is interior to the union of closed cells iff every cell whose
  // closure contains the node is present.
  std::vector<std::int64_t> interior;
  IndexVector node = IndexVector::Ones(d);
  if (n >= 2) {
    std::vector<std::vector<std::int64_t>> candidates(static_cast<std::size_t>(d));
    while (true) {
      bool inside = true;
      for (int k = 0; k < d && inside; ++k) {
        auto& cand = candidates[static_cast<std::size_t>(k)];
        cand.clear();
        const std::int64_t i = node(k);
        if (i % refinement == 0) {
          cand.push_back(i / refinement - 1);
          cand.push_back(i / refinement);
        } else {
          cand.push_back(i / refinement);
        }
      }
      // Enumerate the cartesian product of candidate cells.
      std::vector<std::size_t> pick(static_cast<std::size_t>(d), 0);
      IndexVector cell(d);
      while (inside) {
        for (int k = 0; k < d; ++k)
          cell(k) = candidates[static_cast<std::size_t>(k)][pick[static_cast<std::size_t>(k)]];
        if (!cs.contains(cell)) inside = false;
        int k = 0;
        for (; k < d; ++k) {
          auto& pk = pick[static_cast<std::size_t>(k)];
          if (++pk < candidates[static_cast<std::size_t>(k)].size()) break;
          pk = 0;
        }
        if (k == d) break;
      }
      if (inside) interior.push_back(shell.linear_node(node));

      int k = 0;
      for (; k < d; ++k) {
        if (++node(k) < n) break;
        node(k) = 1;
      }
      if (k == d) break;
    }
  }
  return GridDomain(h, divisions, std::move(interior));
}

std::vector<BoxCount> box_counts(const CellSet& cs, std::span<const double> scales) {
  std::vector<BoxCount> out;
  out.reserve(scales.size());
  const double logb = std::log(static_cast<double>(cs.base()));
  for (double delta : scales) {
    if (!(delta > 0.0 && delta <= 1.0))
      throw ArgumentError("box_counts: scale must lie in (0,1]");
    const double kf = -std::log(delta) / logb;
    const int k = static_cast<int>(std::lround(kf));
    if (k < 0 || k > cs.level() ||
        std::abs(delta - std::pow(static_cast<double>(cs.base()), -k)) > 1e-12 * delta)
      throw ArgumentError("box_counts: scale " + std::to_string(delta) +
                          " is not b^-k with 0 <= k <= level");
    const std::int64_t shrink = checked_pow(cs.base(), cs.level() - k);
    const std::int64_t boxes_side = checked_pow(cs.base(), k);
    std::vector<std::int64_t> boxes;
    boxes.reserve(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const IndexVector c = cs.coords(i);
      std::int64_t idx = 0;
      for (int a = cs.dim() - 1; a >= 0; --a) idx = idx * boxes_side + c(a) / shrink;
      boxes.push_back(idx);
    }
    std::sort(boxes.begin(), boxes.end());
    const auto distinct = std::unique(boxes.begin(), boxes.end()) - boxes.begin();
    out.push_back({delta, static_cast<std::int64_t>(distinct)});
  }
  return out;
}

std::vector<BoxCount> box_counts(const CellSet& cs, int max_k) {
  if (max_k < 1 || max_k > cs.level())
    throw ArgumentError("box_counts: max_k must lie in [1, level]");
  std::vector<double> scales;
  for (int k = 1; k <= max_k; ++k) scales.push_back(std::pow(static_cast<double>(cs.base()), -k));
  return box_counts(cs, std::span<const double>(scales));
}

double box_dimension_fit(std::span<const BoxCount> counts) {
  if (counts.size() < 2) throw ArgumentError("box_dimension_fit: need at least two scales");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(counts.size()), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].count < 1) throw ArgumentError("box_dimension_fit: counts must be >= 1");
    if (!(counts[i].delta > 0.0)) throw ArgumentError("box_dimension_fit: scales must be positive");
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = -std::log(counts[i].delta);
    design(r, 1) = 1.0;
    rhs(r) = std::log(static_cast<double>(counts[i].count));
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  return coef(0);
}

void write_cellset(std::ostream& out, const CellSet& cs) {
  out << "# level base dim\n" << cs.level() << ' ' << cs.base() << ' ' << cs.dim() << '\n';
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const IndexVector c = cs.coords(i);
    for (int k = 0; k < cs.dim(); ++k) out << (k ? " " : "") << c(k);
    out << '\n';
  }
}

CellSet read_cellset(std::istream& in) {
  std::string line;
  int lineno = 0;
  std::optional<std::array<int, 3>> header;
  std::vector<IndexVector> coords;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::int64_t> v;
    for (std::int64_t x; fields >> x;) v.push_back(x);
    if (!fields.eof()) throw ParseError(lineno, "expected integers");
    if (!header) {
      if (v.size() != 3) throw ParseError(lineno, "expected header 'level base dim'");
      header = {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
      continue;
    }
    if (static_cast<int>(v.size()) != (*header)[2])
      throw ParseError(lineno, "expected " + std::to_string((*header)[2]) + " coordinates");
    coords.push_back(Eigen::Map<IndexVector>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  if (!header) throw ParseError(lineno, "missing header");
  return CellSet::from_coords((*header)[0], (*header)[1], (*header)[2], coords);
}

void write_box_counts_csv(std::ostream& out, std::span<const BoxCount> counts) {
  out << "delta,count,log_count\n" << std::setprecision(17);
  for (const auto& c : counts)
    out << c.delta << ',' << c.count << ',' << std::log(static_cast<double>(c.count)) << '\n';
}

}  // namespace fdrum
