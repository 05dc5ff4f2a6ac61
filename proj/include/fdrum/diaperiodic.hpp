#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fdrum/analytic.hpp"
#include "fdrum/ifs_io.hpp"
#include "fdrum/laplace.hpp"
#include "fdrum/prefractal.hpp"

namespace fdrum {

/// (N, j, n): branch 0 marks an interconnective mode, 1..p a mode lifted
/// onto copy j from parent index n.
struct ModeLabel {
  int level = 0;
  int branch = 0;
  std::size_t index = 0;
  std::optional<std::size_t> parent_index;
};

struct PredictedEntry {
  double log_magnitude = 0.0;
  double log_multiplicity = 0.0;
  /// Representative word (lexicographically smallest) producing this entry.
  std::vector<int> provenance;

  double magnitude() const { return std::exp(log_magnitude); }
  double multiplicity() const { return std::exp(log_multiplicity); }
};

struct PredictedSpectrum {
  std::vector<PredictedEntry> entries;
  MagnitudeConvention convention = MagnitudeConvention::wavenumber;
  int level = 0;

  std::size_t size() const { return entries.size(); }
  LogSpectrum to_log() const;
};

/// Values of `parent` (a grid function on parent_grid) pulled back through
/// w_j^-1 onto the target grid, zero outside copy j. Exact node
/// correspondence when grids align, multilinear interpolation otherwise.
/// `branch` is 1-based.
Eigen::VectorXd lift_eigenfunction(const Eigen::VectorXd& parent, const GridDomain& parent_grid,
                                   const Ifs& ifs, int branch, const GridDomain& target);

/// ||L v + lambda v|| / (|lambda| ||v||) with lambda the raw eigenvalue
/// implied by the predicted magnitude (kappa^2 for wavenumbers).
double lift_residual(const Eigen::VectorXd& lifted, const SparseSymMatrix& laplacian,
                     double predicted_magnitude,
                     MagnitudeConvention c = MagnitudeConvention::wavenumber);

/// Diaperiodic multiset after `level` rescalings S_k = U_j c_j^-1 S_{k-1}
/// (c_j^-2 in the eigenvalue convention), colliding magnitudes merged. With
/// max_entries only the smallest max_entries distinct magnitudes are kept.
PredictedSpectrum predicted_spectrum(const Spectrum& initiator, std::span<const double> ratios,
                                     int level, std::optional<std::size_t> max_entries = {});

struct ClassifiedEntry {
  double magnitude = 0.0;
  std::int64_t multiplicity = 0;
  ModeLabel label;
  std::optional<double> parent_magnitude;
};

struct Classification {
  std::vector<ClassifiedEntry> rows;

  std::vector<ClassifiedEntry> diaperiodic() const;
  std::vector<ClassifiedEntry> interconnective() const;
  std::int64_t diaperiodic_count() const;
  std::int64_t interconnective_count() const;
};

inline constexpr double kDiscreteMatchTol = 5e-2;
inline constexpr double kAnalyticMatchTol = 1e-9;

/// Greedy matching of child magnitudes to predicted c_j^-1 * parent
/// magnitudes within relative tolerance, respecting parent multiplicities
/// per branch. Ties go to the smaller predicted magnitude, then lower branch.
Classification classify_spectrum(const Spectrum& child, const Spectrum& parent,
                                 std::span<const double> ratios, double match_tol,
                                 int child_level = 1);

/// magnitude,multiplicity,branch,parent_magnitude
void write_classification_csv(std::ostream& out, const Classification& c);

}  // namespace fdrum
