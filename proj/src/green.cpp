#include "fdrum/green.hpp"

#include <cmath>

#include "fdrum/diaperiodic.hpp"

namespace fdrum {

GreenEvaluator::GreenEvaluator(GridDomain grid, Eigen::VectorXd raw_values,
                               const Eigen::MatrixXd& vectors, std::optional<Eigen::Index> truncation)
    : grid_(std::move(grid)), values_(std::move(raw_values)) {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  if (vectors.rows() != n)
    throw ArgumentError("GreenEvaluator: eigenvectors do not match the grid");
  if (vectors.cols() != values_.size())
    throw ArgumentError("GreenEvaluator: eigenvalue and eigenvector counts differ");
  truncation_ = truncation.value_or(values_.size());
  if (truncation_ < 1 || truncation_ > values_.size())
    throw ArgumentError("GreenEvaluator: truncation must lie in [1, available modes]");
  const double cell = std::pow(grid_.spacing(), grid_.dim());
  modes_ = vectors.leftCols(truncation_);
  for (Eigen::Index k = 0; k < truncation_; ++k) {
    const double norm = modes_.col(k).norm();
    if (norm == 0.0) throw ArgumentError("GreenEvaluator: zero eigenvector");
    modes_.col(k) /= norm * std::sqrt(cell);
  }
  values_.conservativeResize(truncation_);
}

GreenEvaluator GreenEvaluator::from_spectrum(const GridDomain& grid, const Spectrum& s,
                                             std::optional<Eigen::Index> truncation) {
  if (!s.eigenvectors) throw ArgumentError("GreenEvaluator: spectrum carries no eigenvectors");
  const Eigen::VectorXd raw = Eigen::Map<const Eigen::VectorXd>(
      s.raw_values.data(), static_cast<Eigen::Index>(s.raw_values.size()));
  return GreenEvaluator(grid, raw, *s.eigenvectors, truncation);
}

GreenEvaluator GreenEvaluator::from_raw(const GridDomain& grid, const RawSpectrum& raw,
                                        std::optional<Eigen::Index> truncation) {
  if (!raw.vectors) throw ArgumentError("GreenEvaluator: spectrum carries no eigenvectors");
  return GreenEvaluator(grid, raw.values, *raw.vectors, truncation);
}

double green_modal(const GreenEvaluator& ev, const Eigen::VectorXd& x, const Eigen::VectorXd& xp,
                   double lambda) {
  const auto& g = ev.grid();
  if (!g.on_grid(x) || !g.on_grid(xp))
    throw ArgumentError("green_modal: points must be grid nodes (spacing " +
                        std::to_string(g.spacing()) + ")");
  for (Eigen::Index n = 0; n < ev.raw_values().size(); ++n) {
    const double ln = ev.raw_values()(n);
    if (std::abs(lambda - ln) < ev.pole_guard * std::abs(ln))
      throw PoleError("green_modal: lambda " + std::to_string(lambda) +
                          " within pole guard of eigenvalue " + std::to_string(ln),
                      ln);
  }
  const auto row = g.find_point(x);
  const auto col = g.find_point(xp);
  if (!row || !col) return 0.0;
  const auto a = ev.modes().row(static_cast<Eigen::Index>(*row));
  const auto b = ev.modes().row(static_cast<Eigen::Index>(*col));
  const Eigen::ArrayXd denom = lambda - ev.raw_values().array();
  return (a.array().transpose() * b.array().transpose() / denom).sum();
}

namespace {

bool in_copy_closure(const SimilarityMap<double>& w, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y = invert_map(w, x);
  const double tol = 1e-9;
  return (y.array() >= -tol).all() && (y.array() <= 1.0 + tol).all();
}

}  // namespace

double green_renormalized(const GreenEvaluator& parent, const Ifs& ifs, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& xp, double lambda) {
  if (x.size() != ifs.dim() || xp.size() != ifs.dim())
    throw ArgumentError("green_renormalized: point dimension differs from IFS dimension");
  const int d = static_cast<int>(ifs.dim());
  bool x_found = false;
  bool xp_found = false;
  double value = 0.0;
  Eigen::VectorXd y;
  Eigen::VectorXd yp;
  for (const auto& w : ifs.maps()) {
    const bool has_x = in_copy_closure(w, x, y);
    const bool has_xp = in_copy_closure(w, xp, yp);
    x_found = x_found || has_x;
    xp_found = xp_found || has_xp;
    if (!has_x || !has_xp) continue;
    const double c = w.ratio();
    value += std::pow(c, 2 - d) * green_modal(parent, y, yp, c * c * lambda);
  }
  if (!x_found || !xp_found)
    throw DomainError("green_renormalized: point lies outside every copy w_j([0,1]^d)");
  return value;
}

GreenEvaluator lifted_green_evaluator(const GreenEvaluator& parent, const Ifs& ifs,
                                      const GridDomain& child) {
  const Eigen::Index m = parent.truncation();
  const auto p = static_cast<Eigen::Index>(ifs.size());
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(child.size()), m * p);
  Eigen::VectorXd values(m * p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double c = ifs.map(static_cast<std::size_t>(j)).ratio();
    for (Eigen::Index n = 0; n < m; ++n) {
      vectors.col(j * m + n) = lift_eigenfunction(parent.modes().col(n), parent.grid(), ifs,
                                                  static_cast<int>(j) + 1, child);
      values(j * m + n) = parent.raw_values()(n) / (c * c);
    }
  }
  return GreenEvaluator(child, values, vectors);
}

}  // namespace fdrum
