#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdrum/analytic.hpp"
#include "fdrum/ifs_io.hpp"
#include "fdrum/laplace.hpp"

namespace fdrum {

/// (sum_{n<M} log mul_n) / (sum_{n<M} log kappa_n) over the M smallest
/// distinct magnitudes. Throws IllConditionedSpectrumError if any of them is
/// <= 1 and ArgumentError if fewer than M entries exist.
double spectral_dimension(const LogSpectrum& s, std::size_t truncation);
double spectral_dimension(const Spectrum& s, std::size_t truncation);

/// One spectral entry given by its logs.
struct LogEntry {
  double log_magnitude;
  double log_multiplicity;
};

/// Same ratio with the first M entries of `s` plus every entry of `extras`
/// added to both sums.
double spectral_dimension_with_extras(const LogSpectrum& s, std::size_t truncation,
                                      std::span<const LogEntry> extras);

enum class SpectralMode { analytic, numeric };
std::string to_string(SpectralMode m);

/// dim of E_N for each requested level from the predicted diaperiodic
/// spectrum of `initiator` under the IFS ratios.
std::vector<std::pair<int, double>> spectral_dimension_sequence(const Ifs& ifs,
                                                                const Spectrum& initiator,
                                                                std::span<const int> levels,
                                                                std::size_t truncation);

struct NumericGrid {
  int base = 0;
  int refinement = 4;
  double cluster_tol = kDiscreteClusterTol;
  Eigen::Index dense_cap = 4000;
};

/// dim of E_N computed from the discrete Laplacian spectrum of each level.
std::vector<std::pair<int, double>> spectral_dimension_sequence_numeric(
    const Ifs& ifs, const NumericGrid& grid, std::span<const int> levels, std::size_t truncation);

/// Fit of |dim(N) - limit| ~ C / N by least squares on 1/N.
struct AsymptoticFit {
  double constant = 0.0;
  std::vector<double> errors;
};
AsymptoticFit fit_asymptotic(std::span<const std::pair<int, double>> sequence, double limit);

struct DimensionReport {
  double spectral_dim = 0.0;
  double box_dim = 0.0;
  double moran_dim = 0.0;
  std::vector<int> levels_used;  // spectral level, box-count level
  std::size_t truncation = 0;
  MagnitudeConvention convention = MagnitudeConvention::wavenumber;
  SpectralMode mode = SpectralMode::analytic;
  bool box_exact = true;

  double gap_spectral_box() const { return std::abs(spectral_dim - box_dim); }
  double gap_spectral_moran() const { return std::abs(spectral_dim - moran_dim); }
  double gap_box_moran() const { return std::abs(box_dim - moran_dim); }
};

struct DimensionOptions {
  SpectralMode mode = SpectralMode::analytic;
  /// Prefractal level for the spectral estimate (analytic: large, e.g. 1000).
  int spectral_level = 1000;
  std::size_t truncation = 100;
  /// Level of the cell set used for box counting over k = 1..box_level.
  int box_level = 4;
  NumericGrid grid;
  MagnitudeConvention convention = MagnitudeConvention::wavenumber;
};

DimensionReport dimension_report(const Ifs& ifs, const DimensionOptions& opts);

void write_report_text(std::ostream& out, const DimensionReport& r);
void write_report_csv(std::ostream& out, const DimensionReport& r);

}  // namespace fdrum
