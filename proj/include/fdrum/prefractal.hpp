#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fdrum/ifs_io.hpp"

namespace fdrum {

using IndexVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Level-N prefractal as the set of occupied cells of the b^N-per-side grid
/// on [0,1]^d. Cells are stored as sorted unique linear indices with axis 0
/// varying fastest.
class CellSet {
 public:
  CellSet(int level, int base, int dim, std::vector<std::int64_t> cells);
  static CellSet from_coords(int level, int base, int dim, const std::vector<IndexVector>& coords);

  int level() const { return level_; }
  int base() const { return base_; }
  int dim() const { return dim_; }
  /// Cells per side, b^N.
  std::int64_t side() const { return side_; }
  std::size_t size() const { return cells_.size(); }
  const std::vector<std::int64_t>& cells() const { return cells_; }

  IndexVector coords(std::size_t i) const;
  bool contains(const IndexVector& c) const;
  std::int64_t linear_index(const IndexVector& c) const;

 private:
  int level_;
  int base_;
  int dim_;
  std::int64_t side_;
  std::vector<std::int64_t> cells_;
};

/// Dirichlet discretization: nodes of a uniform grid of spacing h on
/// [0, divisions_k * h] per axis, keeping only nodes strictly inside the
/// domain. Unknowns are numbered in increasing linear node order.
class GridDomain {
 public:
  GridDomain(double spacing, IndexVector divisions, std::vector<std::int64_t> interior);

  /// Every node strictly inside the box [0, divisions * spacing].
  static GridDomain box(double spacing, const IndexVector& divisions);

  double spacing() const { return spacing_; }
  int dim() const { return static_cast<int>(divisions_.size()); }
  const IndexVector& divisions() const { return divisions_; }
  std::size_t size() const { return interior_.size(); }
  const std::vector<std::int64_t>& interior() const { return interior_; }

  IndexVector node(std::size_t row) const;
  Eigen::VectorXd point(std::size_t row) const;
  /// Row of the interior node with these grid coordinates, if any.
  std::optional<std::size_t> find(const IndexVector& node) const;
  /// Row of the interior node at (approximately) this point, if any.
  std::optional<std::size_t> find_point(const Eigen::VectorXd& x, double tol = 1e-9) const;
  bool on_grid(const Eigen::VectorXd& x, double tol = 1e-9) const;
  std::int64_t linear_node(const IndexVector& node) const;

 private:
  double spacing_;
  IndexVector divisions_;
  std::vector<std::int64_t> interior_;
};

/// Integer b if every map is (1/b) times a signed permutation with a
/// translation on the 1/b lattice.
bool is_grid_aligned(const Ifs& ifs, int base);
std::optional<int> natural_base(const Ifs& ifs);

/// All images of the unit cell under words of length N. Requires a grid
/// aligned ISS; otherwise throws UnsupportedIfsError.
CellSet rasterize_prefractal(const Ifs& ifs, int level, int base);

/// Approximate rasterization for ISSs that do not align with the square grid
/// (e.g. the gasket): a cell is kept when its center lies within half a cell
/// diagonal of some word image of the unit cell.
CellSet sample_prefractal(const Ifs& ifs, int level, int base);

GridDomain refine_to_grid(const CellSet& cs, int refinement);

struct BoxCount {
  double delta;
  std::int64_t count;
};

/// Occupied boxes of side delta = b^-k in the native b-adic hierarchy.
std::vector<BoxCount> box_counts(const CellSet& cs, std::span<const double> scales);
/// Scales b^-1 .. b^-max_k.
std::vector<BoxCount> box_counts(const CellSet& cs, int max_k);

/// Least-squares slope of log(count) against -log(delta).
double box_dimension_fit(std::span<const BoxCount> counts);

void write_cellset(std::ostream& out, const CellSet& cs);
CellSet read_cellset(std::istream& in);
void write_box_counts_csv(std::ostream& out, std::span<const BoxCount> counts);

}  // namespace fdrum
