#include "fdrum/dimension.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "fdrum/diaperiodic.hpp"
#include "fdrum/prefractal.hpp"

namespace fdrum {

std::string to_string(SpectralMode m) { return m == SpectralMode::analytic ? "analytic" : "numeric"; }

double spectral_dimension(const LogSpectrum& s, std::size_t truncation) {
  return spectral_dimension_with_extras(s, truncation, {});
}

double spectral_dimension(const Spectrum& s, std::size_t truncation) {
  return spectral_dimension(to_log_spectrum(s), truncation);
}

double spectral_dimension_with_extras(const LogSpectrum& s, std::size_t truncation,
                                      std::span<const LogEntry> extras) {
  if (truncation < 1) throw ArgumentError("spectral_dimension: truncation must be >= 1");
  if (s.size() < truncation)
    throw ArgumentError("spectral_dimension: spectrum has " + std::to_string(s.size()) +
                        " entries, truncation needs " + std::to_string(truncation));
  double num = 0.0;
  double den = 0.0;
  for (std::size_t n = 0; n < truncation; ++n) {
    if (!(s.log_magnitudes[n] > 0.0))
      throw IllConditionedSpectrumError("spectral_dimension: magnitude " +
                                        std::to_string(std::exp(s.log_magnitudes[n])) +
                                        " <= 1 at index " + std::to_string(n));
    num += s.log_multiplicities[n];
    den += s.log_magnitudes[n];
  }
  for (const auto& e : extras) {
    if (!(e.log_magnitude > 0.0))
      throw IllConditionedSpectrumError("spectral_dimension: extra magnitude <= 1");
    num += e.log_multiplicity;
    den += e.log_magnitude;
  }
  return num / den;
}

std::vector<std::pair<int, double>> spectral_dimension_sequence(const Ifs& ifs,
                                                                const Spectrum& initiator,
                                                                std::span<const int> levels,
                                                                std::size_t truncation) {
  const auto ratios = ifs.ratios();
  std::vector<std::pair<int, double>> out;
  out.reserve(levels.size());
  for (int level : levels) {
    const auto predicted = predicted_spectrum(initiator, ratios, level, truncation);
    out.emplace_back(level, spectral_dimension(predicted.to_log(), truncation));
  }
  return out;
}

namespace {

CellSet cells_for(const Ifs& ifs, int level, int base, bool& exact) {
  exact = is_grid_aligned(ifs, base);
  return exact ? rasterize_prefractal(ifs, level, base) : sample_prefractal(ifs, level, base);
}

int resolve_base(const Ifs& ifs, int requested) {
  if (requested >= 2) return requested;
  if (auto b = natural_base(ifs)) return *b;
  throw ArgumentError("no natural grid base for this IFS; pass a base explicitly");
}

}  // namespace

std::vector<std::pair<int, double>> spectral_dimension_sequence_numeric(
    const Ifs& ifs, const NumericGrid& grid, std::span<const int> levels, std::size_t truncation) {
  const int base = resolve_base(ifs, grid.base);
  std::vector<std::pair<int, double>> out;
  for (int level : levels) {
    bool exact = true;
    const CellSet cs = cells_for(ifs, level, base, exact);
    const GridDomain g = refine_to_grid(cs, grid.refinement);
    const SparseSymMatrix L = assemble_dirichlet_laplacian(g);
    RawSpectrum raw;
    if (L.order() <= grid.dense_cap) {
      raw = full_spectrum(L, {false, grid.dense_cap});
    } else {
      const auto k = std::min<Eigen::Index>(L.order() - 1, static_cast<Eigen::Index>(8 * truncation));
      raw = partial_spectrum(L, k);
    }
    Spectrum s = cluster_multiplicities(raw, grid.cluster_tol);
    s.meta.level = level;
    s.meta.spacing = g.spacing();
    out.emplace_back(level, spectral_dimension(s, truncation));
  }
  return out;
}

AsymptoticFit fit_asymptotic(std::span<const std::pair<int, double>> sequence, double limit) {
  AsymptoticFit fit;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [n, value] : sequence) {
    const double err = std::abs(value - limit);
    fit.errors.push_back(err);
    const double x = 1.0 / n;
    sxx += x * x;
    sxy += x * err;
  }
  fit.constant = sxx > 0.0 ? sxy / sxx : 0.0;
  return fit;
}

DimensionReport dimension_report(const Ifs& ifs, const DimensionOptions& opts) {
  DimensionReport r;
  r.truncation = opts.truncation;
  r.convention = opts.convention;
  r.mode = opts.mode;

  const auto ratios = ifs.ratios();
  r.moran_dim = moran_dimension(ratios);

  const int base = resolve_base(ifs, opts.grid.base);
  bool exact = true;
  const CellSet cs = cells_for(ifs, opts.box_level, base, exact);
  const auto counts = box_counts(cs, opts.box_level);
  r.box_dim = box_dimension_fit(counts);
  r.box_exact = exact;

  const int level = opts.spectral_level;
  if (opts.mode == SpectralMode::analytic) {
    const Spectrum initiator =
        hypercube_spectrum(static_cast<int>(ifs.dim()), 1.0, opts.truncation, opts.convention);
    const auto predicted = predicted_spectrum(initiator, ratios, level, opts.truncation);
    r.spectral_dim = spectral_dimension(predicted.to_log(), opts.truncation);
  } else {
    NumericGrid grid = opts.grid;
    grid.base = base;
    const int levels[] = {level};
    r.spectral_dim = spectral_dimension_sequence_numeric(ifs, grid, levels, opts.truncation)[0].second;
  }
  r.levels_used = {level, opts.box_level};
  return r;
}

void write_report_text(std::ostream& out, const DimensionReport& r) {
  out << std::setprecision(12);
  out << "mode: " << to_string(r.mode) << '\n';
  out << "convention: " << to_string(r.convention) << '\n';
  out << "spectral_level: " << r.levels_used.at(0) << '\n';
  out << "box_level: " << r.levels_used.at(1) << '\n';
  out << "truncation: " << r.truncation << '\n';
  out << "box_exact: " << (r.box_exact ? "true" : "false") << '\n';
  out << "spectral_dim: " << r.spectral_dim << '\n';
  out << "box_dim: " << r.box_dim << '\n';
  out << "moran_dim: " << r.moran_dim << '\n';
  out << "gap_spectral_box: " << r.gap_spectral_box() << '\n';
  out << "gap_spectral_moran: " << r.gap_spectral_moran() << '\n';
  out << "gap_box_moran: " << r.gap_box_moran() << '\n';
}

void write_report_csv(std::ostream& out, const DimensionReport& r) {
  out << std::setprecision(12);
  out << "mode,convention,spectral_level,box_level,truncation,box_exact,spectral_dim,box_dim,"
         "moran_dim,gap_spectral_box,gap_spectral_moran,gap_box_moran\n";
  out << to_string(r.mode) << ',' << to_string(r.convention) << ',' << r.levels_used.at(0) << ','
      << r.levels_used.at(1) << ',' << r.truncation << ',' << (r.box_exact ? "true" : "false")
      << ',' << r.spectral_dim << ',' << r.box_dim << ',' << r.moran_dim << ','
      << r.gap_spectral_box() << ',' << r.gap_spectral_moran() << ',' << r.gap_box_moran()
      << '\n';
}

}  // namespace fdrum
