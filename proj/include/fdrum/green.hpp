#pragma once

#include <Eigen/Dense>

#include <optional>

#include "fdrum/ifs_io.hpp"
#include "fdrum/laplace.hpp"
#include "fdrum/prefractal.hpp"

namespace fdrum {

/// Truncated modal expansion of the Dirichlet Green's function on a grid,
/// cohomologic (zero-eigenvalue) part excluded:
///   g(x, x'; lambda) = sum_n phi_n(x) phi_n(x') / (lambda - lambda_n).
/// Modes are stored normalized to unit discrete L2 norm, sum phi^2 h^d = 1,
/// so that g solves (lambda - L) g = delta_{x'} / h^d when all modes are kept.
class GreenEvaluator {
 public:
  /// `vectors` has unit Euclidean columns; `raw_values` are the matching
  /// Laplacian eigenvalues. truncation defaults to every mode.
  GreenEvaluator(GridDomain grid, Eigen::VectorXd raw_values, const Eigen::MatrixXd& vectors,
                 std::optional<Eigen::Index> truncation = std::nullopt);

  static GreenEvaluator from_spectrum(const GridDomain& grid, const Spectrum& s,
                                      std::optional<Eigen::Index> truncation = std::nullopt);
  static GreenEvaluator from_raw(const GridDomain& grid, const RawSpectrum& raw,
                                 std::optional<Eigen::Index> truncation = std::nullopt);

  const GridDomain& grid() const { return grid_; }
  const Eigen::VectorXd& raw_values() const { return values_; }
  const Eigen::MatrixXd& modes() const { return modes_; }
  Eigen::Index truncation() const { return truncation_; }

  double pole_guard = 1e-6;

 private:
  GridDomain grid_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd modes_;
  Eigen::Index truncation_;
};

/// x and x' must be grid nodes; a node off the interior (on the Dirichlet
/// boundary) yields 0. Throws PoleError within pole_guard of a retained
/// eigenvalue.
double green_modal(const GreenEvaluator& ev, const Eigen::VectorXd& x, const Eigen::VectorXd& xp,
                   double lambda);

/// Diaperiodic part of the level-N Green's function rebuilt from the level
/// N-1 evaluator:
///   sum_j c_j^(2-d) g_{N-1}(w_j^-1 x, w_j^-1 x'; c_j^2 lambda)
/// over copies j whose closure holds both points (raw-eigenvalue form; in
/// the wavenumber reading this is c_j g(.,.; c_j lambda) for d = 1).
double green_renormalized(const GreenEvaluator& parent, const Ifs& ifs, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& xp, double lambda);

/// Evaluator on `child` built from the parent's modes lifted onto every
/// copy, each renormalized, with eigenvalues lambda_n / c_j^2.
GreenEvaluator lifted_green_evaluator(const GreenEvaluator& parent, const Ifs& ifs,
                                      const GridDomain& child);

}  // namespace fdrum
