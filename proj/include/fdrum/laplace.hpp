#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdrum/prefractal.hpp"

namespace fdrum {

/// How a raw Laplacian eigenvalue lambda <= 0 becomes a positive magnitude.
/// wavenumber: sqrt(-lambda), scaling by c^-1 per iteration (default).
/// eigenvalue: -lambda itself, scaling by c^-2.
enum class MagnitudeConvention { wavenumber, eigenvalue };

std::string to_string(MagnitudeConvention c);
MagnitudeConvention convention_from_exponent(int exponent);
int exponent_of(MagnitudeConvention c);

struct SparseSymMatrix {
  Eigen::SparseMatrix<double> matrix;
  double spacing = 0.0;
  int dim = 0;

  Eigen::Index order() const { return matrix.rows(); }
};

/// Raw Laplacian eigenpairs ordered by increasing |lambda|. Vectors have unit
/// Euclidean norm, one column per eigenvalue.
struct RawSpectrum {
  Eigen::VectorXd values;
  std::optional<Eigen::MatrixXd> vectors;
};

struct SpectrumMeta {
  int level = -1;
  double spacing = 0.0;
  MagnitudeConvention convention = MagnitudeConvention::wavenumber;
  double rel_tol = 0.0;
};

/// Clustered spectrum: strictly ascending magnitudes with multiplicities.
/// When present, eigenvector columns are grouped by cluster in the same
/// order, and raw_values holds the Laplacian eigenvalue of each column.
struct Spectrum {
  std::vector<double> magnitudes;
  std::vector<std::int64_t> multiplicities;
  std::vector<double> raw_values;
  std::optional<Eigen::MatrixXd> eigenvectors;
  SpectrumMeta meta;

  std::size_t size() const { return magnitudes.size(); }
  bool empty() const { return magnitudes.empty(); }
  std::int64_t total_multiplicity() const;
  /// First eigenvector column of cluster k.
  std::size_t cluster_offset(std::size_t k) const;
};

SparseSymMatrix assemble_dirichlet_laplacian(const GridDomain& g);

struct FullSpectrumOptions {
  bool want_vectors = false;
  Eigen::Index dense_cap = 4000;
};

RawSpectrum full_spectrum(const SparseSymMatrix& m, const FullSpectrumOptions& opts = {});

struct PartialSpectrumOptions {
  bool want_vectors = false;
  int block_size = 8;
  /// Krylov basis limit; 0 picks min(order, 20 * k + 200).
  Eigen::Index max_basis = 0;
  double tol = 1e-12;
  std::uint64_t seed = 20240601;
};

/// k smallest-magnitude eigenpairs by block Lanczos with full
/// reorthogonalization on the shift-inverted operator (-L)^-1.
RawSpectrum partial_spectrum(const SparseSymMatrix& m, Eigen::Index k,
                             const PartialSpectrumOptions& opts = {});

/// Magnitudes of the nonzero raw eigenvalues, in input order. Zero (up to
/// 1e-12 relative to the largest |lambda|) is dropped; a positive eigenvalue
/// throws MatrixConventionError.
std::vector<double> to_magnitudes(std::span<const double> raw,
                                  MagnitudeConvention c = MagnitudeConvention::wavenumber);

/// Greedy clustering along increasing |lambda|: a value joins the open
/// cluster when |lambda - mean| <= rel_tol * max(1, |mean|).
Spectrum cluster_multiplicities(std::span<const double> raw, double rel_tol,
                                MagnitudeConvention c = MagnitudeConvention::wavenumber);
Spectrum cluster_multiplicities(const RawSpectrum& raw, double rel_tol,
                                MagnitudeConvention c = MagnitudeConvention::wavenumber);

inline constexpr double kAnalyticClusterTol = 1e-6;
inline constexpr double kDiscreteClusterTol = 1e-3;

/// magnitude,multiplicity with '#' metadata lines.
void write_spectrum_csv(std::ostream& out, const Spectrum& s);
/// Staircase data: one row per eigenvalue, cumulative count against magnitude.
void write_plateau_csv(std::ostream& out, const Spectrum& s);

}  // namespace fdrum
