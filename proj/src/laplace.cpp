#include "fdrum/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace fdrum {

std::string to_string(MagnitudeConvention c) {
  return c == MagnitudeConvention::wavenumber ? "wavenumber" : "eigenvalue";
}

MagnitudeConvention convention_from_exponent(int exponent) {
  if (exponent == 1) return MagnitudeConvention::wavenumber;
  if (exponent == 2) return MagnitudeConvention::eigenvalue;
  throw ArgumentError("magnitude exponent must be 1 (wavenumber) or 2 (eigenvalue)");
}

int exponent_of(MagnitudeConvention c) { return c == MagnitudeConvention::wavenumber ? 1 : 2; }

std::int64_t Spectrum::total_multiplicity() const {
  return std::accumulate(multiplicities.begin(), multiplicities.end(), std::int64_t{0});
}

std::size_t Spectrum::cluster_offset(std::size_t k) const {
  if (k > multiplicities.size()) throw ArgumentError("Spectrum: cluster index out of range");
  return static_cast<std::size_t>(
      std::accumulate(multiplicities.begin(), multiplicities.begin() + static_cast<std::ptrdiff_t>(k),
                      std::int64_t{0}));
}

SparseSymMatrix assemble_dirichlet_laplacian(const GridDomain& g) {
  if (g.size() == 0) throw ArgumentError("assemble_dirichlet_laplacian: empty interior");
  const int d = g.dim();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const auto n = static_cast<Eigen::Index>(g.size());

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(2 * d + 1));
  for (std::size_t row = 0; row < g.size(); ++row) {
    const auto r = static_cast<Eigen::Index>(row);
    entries.emplace_back(r, r, -2.0 * d * inv_h2);
    IndexVector node = g.node(row);
    for (int k = 0; k < d; ++k) {
      for (int step : {-1, 1}) {
        node(k) += step;
        if (auto col = g.find(node)) entries.emplace_back(r, static_cast<Eigen::Index>(*col), inv_h2);
        node(k) -= step;
      }
    }
  }
  SparseSymMatrix m;
  m.matrix.resize(n, n);
  m.matrix.setFromTriplets(entries.begin(), entries.end());
  m.matrix.makeCompressed();
  m.spacing = g.spacing();
  m.dim = d;
  return m;
}

RawSpectrum full_spectrum(const SparseSymMatrix& m, const FullSpectrumOptions& opts) {
  const auto n = m.order();
  if (n == 0) throw ArgumentError("full_spectrum: empty matrix");
  if (n > opts.dense_cap)
    throw ArgumentError("full_spectrum: order " + std::to_string(n) + " exceeds dense cap " +
                        std::to_string(opts.dense_cap) + "; use partial_spectrum");
  const Eigen::MatrixXd dense(m.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      dense, opts.want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("full_spectrum: dense eigensolver failed", 0.0);

  // Values come most-negative first; reverse for increasing |lambda|.
  RawSpectrum out;
  out.values = es.eigenvalues().reverse();
  if (opts.want_vectors) {
    out.vectors = es.eigenvectors().rowwise().reverse();
    const double norm = out.values.cwiseAbs().maxCoeff();
    const Eigen::MatrixXd residual =
        dense * (*out.vectors) - (*out.vectors) * out.values.asDiagonal();
    const double worst = residual.colwise().norm().maxCoeff();
    if (worst > 1e-8 * std::max(norm, 1.0))
      throw ConvergenceError("full_spectrum: eigenpair residual too large", worst);
  }
  return out;
}

std::vector<double> to_magnitudes(std::span<const double> raw, MagnitudeConvention c) {
  double scale = 1.0;
  for (double v : raw) scale = std::max(scale, std::abs(v));
  const double zero_tol = 1e-12 * scale;
  std::vector<double> out;
  out.reserve(raw.size());
  for (double v : raw) {
    if (std::abs(v) <= zero_tol) continue;
    if (v > 0.0)
      throw MatrixConventionError("to_magnitudes: positive Laplacian eigenvalue " +
                                  std::to_string(v));
    out.push_back(c == MagnitudeConvention::wavenumber ? std::sqrt(-v) : -v);
  }
  return out;
}

namespace {

Spectrum cluster_impl(const std::vector<double>& raw, const Eigen::MatrixXd* vectors,
                      double rel_tol, MagnitudeConvention c) {
  double scale = 1.0;
  for (double v : raw) scale = std::max(scale, std::abs(v));
  const double zero_tol = 1e-12 * scale;

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (std::abs(raw[i]) <= zero_tol) continue;
    if (raw[i] > 0.0)
      throw MatrixConventionError("cluster_multiplicities: positive Laplacian eigenvalue " +
                                  std::to_string(raw[i]));
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(raw[a]) < std::abs(raw[b]); });

  Spectrum s;
  s.meta.convention = c;
  s.meta.rel_tol = rel_tol;
  std::size_t begin = 0;
  while (begin < order.size()) {
    double sum = raw[order[begin]];
    std::size_t end = begin + 1;
    while (end < order.size()) {
      const double mean = sum / static_cast<double>(end - begin);
      const double v = raw[order[end]];
      if (std::abs(v - mean) > rel_tol * std::max(1.0, std::abs(mean))) break;
      sum += v;
      ++end;
    }
    double mag = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = raw[order[i]];
      mag += c == MagnitudeConvention::wavenumber ? std::sqrt(-v) : -v;
      s.raw_values.push_back(v);
    }
    s.magnitudes.push_back(mag / static_cast<double>(end - begin));
    s.multiplicities.push_back(static_cast<std::int64_t>(end - begin));
    begin = end;
  }
  if (vectors) {
    Eigen::MatrixXd grouped(vectors->rows(), static_cast<Eigen::Index>(order.size()));
    for (std::size_t i = 0; i < order.size(); ++i)
      grouped.col(static_cast<Eigen::Index>(i)) = vectors->col(static_cast<Eigen::Index>(order[i]));
    s.eigenvectors = std::move(grouped);
  }
  return s;
}

}  // namespace

Spectrum cluster_multiplicities(std::span<const double> raw, double rel_tol, MagnitudeConvention c) {
  return cluster_impl(std::vector<double>(raw.begin(), raw.end()), nullptr, rel_tol, c);
}

Spectrum cluster_multiplicities(const RawSpectrum& raw, double rel_tol, MagnitudeConvention c) {
  std::vector<double> values(raw.values.data(), raw.values.data() + raw.values.size());
  return cluster_impl(values, raw.vectors ? &*raw.vectors : nullptr, rel_tol, c);
}

void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
  out << std::setprecision(17);
  out << "# level " << s.meta.level << '\n';
  out << "# spacing " << s.meta.spacing << '\n';
  out << "# convention " << to_string(s.meta.convention) << '\n';
  out << "# rel_tol " << s.meta.rel_tol << '\n';
  out << "magnitude,multiplicity\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << s.magnitudes[i] << ',' << s.multiplicities[i] << '\n';
}

void write_plateau_csv(std::ostream& out, const Spectrum& s) {
  out << std::setprecision(17);
  out << "# convention " << to_string(s.meta.convention) << '\n';
  out << "count,magnitude\n";
  std::int64_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::int64_t k = 0; k < s.multiplicities[i]; ++k) out << ++count << ',' << s.magnitudes[i] << '\n';
}

}  // namespace fdrum
