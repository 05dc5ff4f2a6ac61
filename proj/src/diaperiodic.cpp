#include "fdrum/diaperiodic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace fdrum {

namespace {

double merge_tol(double log_value) {
  return 1e-12 + 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(log_value));
}

double log_add(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

struct RatioClass {
  double ratio;
  int count;
  int first_map;  // 1-based
};

std::vector<RatioClass> group_ratios(std::span<const double> ratios) {
  std::vector<RatioClass> classes;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double c = ratios[i];
    if (!(c > 0.0 && c < 1.0)) throw ArgumentError("predicted_spectrum: ratios must lie in (0,1)");
    auto it = std::find_if(classes.begin(), classes.end(),
                           [&](const RatioClass& k) { return std::abs(k.ratio - c) <= 1e-12 * c; });
    if (it == classes.end())
      classes.push_back({c, 1, static_cast<int>(i) + 1});
    else
      ++it->count;
  }
  return classes;
}

void enumerate_compositions(int parts, int total, std::vector<int>& current,
                            std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int k = total; k >= 0; --k) {
    current.push_back(k);
    enumerate_compositions(parts - 1, total - k, current, out);
    current.pop_back();
  }
}

struct Candidate {
  double log_magnitude;
  double log_multiplicity;
  std::size_t composition;
};

// Sorted candidates merged where log magnitudes collide. The first member of
// a run keeps its provenance.
std::vector<Candidate> merge_sorted(const std::vector<Candidate>& sorted) {
  std::vector<Candidate> merged;
  for (const auto& c : sorted) {
    if (!merged.empty() &&
        std::abs(c.log_magnitude - merged.back().log_magnitude) <= merge_tol(c.log_magnitude)) {
      merged.back().log_multiplicity = log_add(merged.back().log_multiplicity, c.log_multiplicity);
    } else {
      merged.push_back(c);
    }
  }
  return merged;
}

}  // namespace

LogSpectrum PredictedSpectrum::to_log() const {
  LogSpectrum out;
  out.convention = convention;
  for (const auto& e : entries) {
    out.log_magnitudes.push_back(e.log_magnitude);
    out.log_multiplicities.push_back(e.log_multiplicity);
  }
  return out;
}

PredictedSpectrum predicted_spectrum(const Spectrum& initiator, std::span<const double> ratios,
                                     int level, std::optional<std::size_t> max_entries) {
  if (level < 0) throw ArgumentError("predicted_spectrum: level must be >= 0");
  if (ratios.empty()) throw ArgumentError("predicted_spectrum: no ratios given");
  const auto classes = group_ratios(ratios);
  const int q = static_cast<int>(classes.size());
  const double exponent = exponent_of(initiator.meta.convention);

  const std::size_t per_class =
      max_entries ? std::min(*max_entries, initiator.size()) : initiator.size();
  std::vector<double> base_log_mag(per_class);
  std::vector<double> base_log_mul(per_class);
  for (std::size_t i = 0; i < per_class; ++i) {
    if (!(initiator.magnitudes[i] > 0.0))
      throw ArgumentError("predicted_spectrum: initiator magnitudes must be positive");
    base_log_mag[i] = std::log(initiator.magnitudes[i]);
    base_log_mul[i] = std::log(static_cast<double>(initiator.multiplicities[i]));
  }

  // Level-N scales come from the count vector (k_1..k_q), sum k = N, with
  // multinomial(N; k) * prod p_i^k_i words sharing that scale.
  const double n_classes = std::lgamma(level + q) - std::lgamma(level + 1.0) - std::lgamma(q);
  if (n_classes > std::log(2e7)) throw ArgumentError("predicted_spectrum: too many ratio classes at this level");
  std::vector<std::vector<int>> compositions;
  std::vector<int> scratch;
  enumerate_compositions(q, level, scratch, compositions);

  std::vector<double> log_scale(compositions.size());
  std::vector<double> log_count(compositions.size());
  for (std::size_t c = 0; c < compositions.size(); ++c) {
    double s = 0.0;
    double w = std::lgamma(level + 1.0);
    for (int i = 0; i < q; ++i) {
      const int k = compositions[c][static_cast<std::size_t>(i)];
      s -= exponent * k * std::log(classes[static_cast<std::size_t>(i)].ratio);
      w += k * std::log(static_cast<double>(classes[static_cast<std::size_t>(i)].count)) -
           std::lgamma(k + 1.0);
    }
    log_scale[c] = s;
    log_count[c] = w;
  }
  std::vector<std::size_t> by_scale(compositions.size());
  std::iota(by_scale.begin(), by_scale.end(), std::size_t{0});
  std::stable_sort(by_scale.begin(), by_scale.end(),
                   [&](std::size_t a, std::size_t b) { return log_scale[a] < log_scale[b]; });

  std::vector<Candidate> collected;
  double threshold = std::numeric_limits<double>::infinity();
  for (std::size_t c : by_scale) {
    if (per_class == 0) break;
    if (log_scale[c] + base_log_mag[0] > threshold + merge_tol(threshold)) break;
    for (std::size_t i = 0; i < per_class; ++i)
      collected.push_back({log_scale[c] + base_log_mag[i], log_count[c] + base_log_mul[i], c});
    if (max_entries && collected.size() >= *max_entries) {
      std::vector<Candidate> sorted = collected;
      std::sort(sorted.begin(), sorted.end(),
                [](const Candidate& a, const Candidate& b) { return a.log_magnitude < b.log_magnitude; });
      const auto merged = merge_sorted(sorted);
      if (merged.size() >= *max_entries) threshold = merged[*max_entries - 1].log_magnitude;
    }
  }

  std::stable_sort(collected.begin(), collected.end(), [](const Candidate& a, const Candidate& b) {
    return a.log_magnitude < b.log_magnitude;
  });
  auto merged = merge_sorted(collected);
  if (max_entries && merged.size() > *max_entries) merged.resize(*max_entries);

  PredictedSpectrum out;
  out.convention = initiator.meta.convention;
  out.level = level;
  out.entries.reserve(merged.size());
  for (const auto& m : merged) {
    PredictedEntry e;
    e.log_magnitude = m.log_magnitude;
    e.log_multiplicity = m.log_multiplicity;
    const auto& comp = compositions[m.composition];
    for (int i = 0; i < q; ++i)
      e.provenance.insert(e.provenance.end(), static_cast<std::size_t>(comp[static_cast<std::size_t>(i)]),
                          classes[static_cast<std::size_t>(i)].first_map);
    std::sort(e.provenance.begin(), e.provenance.end());
    out.entries.push_back(std::move(e));
  }
  return out;
}

Eigen::VectorXd lift_eigenfunction(const Eigen::VectorXd& parent, const GridDomain& parent_grid,
                                   const Ifs& ifs, int branch, const GridDomain& target) {
  if (branch < 1 || branch > static_cast<int>(ifs.size()))
    throw ArgumentError("lift_eigenfunction: branch " + std::to_string(branch) + " outside [1," +
                        std::to_string(ifs.size()) + "]");
  if (parent.size() != static_cast<Eigen::Index>(parent_grid.size()))
    throw ArgumentError("lift_eigenfunction: parent vector does not match parent grid");
  if (parent_grid.dim() != ifs.dim() || target.dim() != ifs.dim())
    throw ArgumentError("lift_eigenfunction: grid dimension differs from IFS dimension");

  const auto& w = ifs.map(static_cast<std::size_t>(branch - 1));
  const int d = target.dim();
  const double tol = 1e-9;
  const Eigen::VectorXd extent = parent_grid.divisions().cast<double>() * parent_grid.spacing();

  auto parent_value = [&](const IndexVector& node) {
    const auto row = parent_grid.find(node);
    return row ? parent(static_cast<Eigen::Index>(*row)) : 0.0;
  };

  Eigen::VectorXd lifted = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target.size()));
  std::size_t inside_copy = 0;
  for (std::size_t row = 0; row < target.size(); ++row) {
    const Eigen::VectorXd y = invert_map(w, target.point(row));
    if ((y.array() < -tol).any() || (y.array() > extent.array() + tol).any()) continue;
    if ((y.array() > tol).all() && (y.array() < extent.array() - tol).all()) ++inside_copy;

    const Eigen::ArrayXd u = y.array() / parent_grid.spacing();
    const Eigen::ArrayXd nearest = u.round();
    double value = 0.0;
    if (((u - nearest).abs() <= 1e-7).all()) {
      value = parent_value(nearest.cast<std::int64_t>().matrix());
    } else {
      const Eigen::ArrayXd lower = u.floor();
      const Eigen::ArrayXd frac = u - lower;
      for (int corner = 0; corner < (1 << d); ++corner) {
        IndexVector node(d);
        double weight = 1.0;
        for (int k = 0; k < d; ++k) {
          const bool up = (corner >> k) & 1;
          node(k) = static_cast<std::int64_t>(lower(k)) + (up ? 1 : 0);
          weight *= up ? frac(k) : 1.0 - frac(k);
        }
        if (weight != 0.0) value += weight * parent_value(node);
      }
    }
    lifted(static_cast<Eigen::Index>(row)) = value;
  }
  if (inside_copy == 0)
    throw ResolutionError("lift_eigenfunction: copy " + std::to_string(branch) +
                          " contains no interior node of the target grid");
  return lifted;
}

double lift_residual(const Eigen::VectorXd& lifted, const SparseSymMatrix& laplacian,
                     double predicted_magnitude, MagnitudeConvention c) {
  const double norm = lifted.norm();
  if (norm == 0.0) throw ArgumentError("lift_residual: zero vector");
  if (lifted.size() != laplacian.order())
    throw ArgumentError("lift_residual: vector does not match matrix order");
  if (!(predicted_magnitude > 0.0)) throw ArgumentError("lift_residual: magnitude must be positive");
  const double lambda = c == MagnitudeConvention::wavenumber
                            ? predicted_magnitude * predicted_magnitude
                            : predicted_magnitude;
  const Eigen::VectorXd r = laplacian.matrix * lifted + lambda * lifted;
  return r.norm() / (lambda * norm);
}

std::vector<ClassifiedEntry> Classification::diaperiodic() const {
  std::vector<ClassifiedEntry> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [](const ClassifiedEntry& e) { return e.label.branch != 0; });
  return out;
}

std::vector<ClassifiedEntry> Classification::interconnective() const {
  std::vector<ClassifiedEntry> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [](const ClassifiedEntry& e) { return e.label.branch == 0; });
  return out;
}

std::int64_t Classification::diaperiodic_count() const {
  std::int64_t n = 0;
  for (const auto& e : rows)
    if (e.label.branch != 0) n += e.multiplicity;
  return n;
}

std::int64_t Classification::interconnective_count() const {
  std::int64_t n = 0;
  for (const auto& e : rows)
    if (e.label.branch == 0) n += e.multiplicity;
  return n;
}

Classification classify_spectrum(const Spectrum& child, const Spectrum& parent,
                                 std::span<const double> ratios, double match_tol,
                                 int child_level) {
  if (child.meta.convention != parent.meta.convention)
    throw ArgumentError("classify_spectrum: child and parent use different magnitude conventions");
  if (match_tol < 0.0) throw ArgumentError("classify_spectrum: match_tol must be >= 0");
  const double exponent = exponent_of(child.meta.convention);

  struct Slot {
    double value;
    int branch;
    std::size_t parent_index;
    std::int64_t budget;
  };
  std::vector<Slot> slots;
  for (std::size_t j = 0; j < ratios.size(); ++j)
    for (std::size_t n = 0; n < parent.size(); ++n)
      slots.push_back({parent.magnitudes[n] * std::pow(ratios[j], -exponent),
                       static_cast<int>(j) + 1, n, parent.multiplicities[n]});
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return a.value < b.value || (a.value == b.value && a.branch < b.branch);
  });

  Classification out;
  for (std::size_t i = 0; i < child.size(); ++i) {
    const double kappa = child.magnitudes[i];
    std::int64_t remaining = child.multiplicities[i];
    // Predicted values v with |kappa - v| <= tol * v.
    const double lo = kappa / (1.0 + match_tol);
    const double hi = match_tol < 1.0 ? kappa / (1.0 - match_tol) : std::numeric_limits<double>::infinity();
    const auto first = std::lower_bound(slots.begin(), slots.end(), lo * (1.0 - 1e-15),
                                        [](const Slot& s, double v) { return s.value < v; });
    std::map<std::pair<int, std::size_t>, std::int64_t> claimed;
    while (remaining > 0) {
      Slot* best = nullptr;
      for (auto it = first; it != slots.end() && it->value <= hi * (1.0 + 1e-15); ++it) {
        if (it->budget == 0) continue;
        if (std::abs(kappa - it->value) > match_tol * it->value) continue;
        if (!best || std::abs(kappa - it->value) < std::abs(kappa - best->value)) best = &*it;
      }
      if (!best) break;
      const std::int64_t take = std::min(remaining, best->budget);
      best->budget -= take;
      remaining -= take;
      claimed[{best->branch, best->parent_index}] += take;
    }
    for (const auto& [key, count] : claimed) {
      ClassifiedEntry e;
      e.magnitude = kappa;
      e.multiplicity = count;
      e.label = {child_level, key.first, i, key.second};
      e.parent_magnitude = parent.magnitudes[key.second];
      out.rows.push_back(e);
    }
    if (remaining > 0) {
      ClassifiedEntry e;
      e.magnitude = kappa;
      e.multiplicity = remaining;
      e.label = {child_level, 0, i, std::nullopt};
      out.rows.push_back(e);
    }
  }
  return out;
}

void write_classification_csv(std::ostream& out, const Classification& c) {
  out << std::setprecision(17) << "magnitude,multiplicity,branch,parent_magnitude\n";
  for (const auto& e : c.rows) {
    out << e.magnitude << ',' << e.multiplicity << ',' << e.label.branch << ',';
    if (e.parent_magnitude) out << *e.parent_magnitude;
    out << '\n';
  }
}

}  // namespace fdrum
