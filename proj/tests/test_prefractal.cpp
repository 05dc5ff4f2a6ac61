#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fdrum/prefractal.hpp"

using namespace fdrum;

namespace {

// Base-3 digits of a level-N carpet cell index must never both be 1.
bool carpet_cell(std::int64_t i, std::int64_t j, int level) {
  for (int k = 0; k < level; ++k, i /= 3, j /= 3)
    if (i % 3 == 1 && j % 3 == 1) return false;
  return true;
}

bool cantor_cell(std::int64_t i, int level) {
  for (int k = 0; k < level; ++k, i /= 3)
    if (i % 3 == 1) return false;
  return true;
}

}  // namespace

TEST_CASE("rasterize the Cantor prefractal") {
  const Ifs cantor = *ifs_preset("cantor");
  const CellSet l2 = rasterize_prefractal(cantor, 2, 3);
  CHECK(l2.side() == 9);
  CHECK(l2.cells() == std::vector<std::int64_t>{0, 2, 6, 8});

  for (int level = 0; level <= 6; ++level) {
    const CellSet cs = rasterize_prefractal(cantor, level, 3);
    CHECK(cs.size() == static_cast<std::size_t>(1) << level);
    for (std::int64_t i : cs.cells()) CHECK(cantor_cell(i, level));
  }
  CHECK_THROWS_AS(rasterize_prefractal(cantor, -1, 3), ArgumentError);
}

TEST_CASE("rasterize the carpet against digit membership") {
  const Ifs carpet = *ifs_preset("carpet");
  for (int level = 1; level <= 3; ++level) {
    const CellSet cs = rasterize_prefractal(carpet, level, 3);
    CHECK(cs.size() == static_cast<std::size_t>(std::pow(8, level)));
    std::size_t expected = 0;
    for (std::int64_t j = 0; j < cs.side(); ++j)
      for (std::int64_t i = 0; i < cs.side(); ++i) {
        const bool in = carpet_cell(i, j, level);
        expected += in;
        IndexVector c(2);
        c << i, j;
        CHECK(cs.contains(c) == in);
      }
    CHECK(cs.size() == expected);
  }
}

TEST_CASE("interval fills its grid") {
  const CellSet cs = rasterize_prefractal(*ifs_preset("interval"), 5, 2);
  CHECK(cs.size() == 32);
  CHECK(cs.side() == 32);
}

TEST_CASE("grid alignment and the gasket") {
  CHECK(is_grid_aligned(*ifs_preset("cantor"), 3));
  CHECK_FALSE(is_grid_aligned(*ifs_preset("cantor"), 2));
  CHECK(natural_base(*ifs_preset("carpet")) == 3);
  CHECK(natural_base(*ifs_preset("interval")) == 2);
  const Ifs gasket = *ifs_preset("gasket");
  CHECK_FALSE(is_grid_aligned(gasket, 2));
  CHECK_THROWS_AS(rasterize_prefractal(gasket, 2, 2), UnsupportedIfsError);

  const CellSet g = sample_prefractal(gasket, 3, 2);
  CHECK(g.size() >= 27u);
  CHECK(g.size() < 64u);
  IndexVector origin(2);
  origin << 0, 0;
  IndexVector far_corner(2);
  far_corner << 7, 7;
  CHECK(g.contains(origin));
  CHECK_FALSE(g.contains(far_corner));
}

TEST_CASE("refine_to_grid interior nodes") {
  // Interval level 1, refinement 2: internal interface node stays interior.
  const GridDomain interval = refine_to_grid(rasterize_prefractal(*ifs_preset("interval"), 1, 2), 2);
  CHECK(interval.spacing() == doctest::Approx(0.25));
  CHECK(interval.interior() == std::vector<std::int64_t>{1, 2, 3});

  const GridDomain cantor = refine_to_grid(rasterize_prefractal(*ifs_preset("cantor"), 1, 3), 3);
  CHECK(cantor.spacing() == doctest::Approx(1.0 / 9.0));
  CHECK(cantor.interior() == std::vector<std::int64_t>{1, 2, 7, 8});

  // Carpet: a node is interior iff its four surrounding cells are occupied.
  for (int r : {2, 3}) {
    const GridDomain g = refine_to_grid(rasterize_prefractal(*ifs_preset("carpet"), 1, 3), r);
    std::vector<std::int64_t> expected;
    const std::int64_t n = 3 * r;
    for (std::int64_t y = 1; y < n; ++y)
      for (std::int64_t x = 1; x < n; ++x) {
        bool all = true;
        for (std::int64_t dx : {-1, 0})
          for (std::int64_t dy : {-1, 0}) all &= carpet_cell((x + dx) / r, (y + dy) / r, 1);
        if (all) expected.push_back(x + (n + 1) * y);
      }
    CHECK(g.interior() == expected);
  }

  CHECK_THROWS_AS(refine_to_grid(rasterize_prefractal(*ifs_preset("cantor"), 1, 3), 1), ArgumentError);
}

TEST_CASE("GridDomain lookup") {
  IndexVector div(2);
  div << 4, 4;
  const GridDomain box = GridDomain::box(0.25, div);
  CHECK(box.size() == 9u);
  Eigen::VectorXd x(2);
  x << 0.5, 0.25;
  const auto row = box.find_point(x);
  REQUIRE(row.has_value());
  CHECK(box.point(*row).isApprox(x));
  x << 0.0, 0.5;
  CHECK_FALSE(box.find_point(x).has_value());
  x << 0.3, 0.5;
  CHECK_FALSE(box.on_grid(x));
}

TEST_CASE("box counting") {
  const CellSet cantor = rasterize_prefractal(*ifs_preset("cantor"), 4, 3);
  const auto counts = box_counts(cantor, 4);
  REQUIRE(counts.size() == 4u);
  for (int k = 1; k <= 4; ++k) {
    CHECK(counts[static_cast<std::size_t>(k - 1)].count == (1 << k));
    CHECK(counts[static_cast<std::size_t>(k - 1)].delta == doctest::Approx(std::pow(3.0, -k)));
  }
  CHECK(std::abs(box_dimension_fit(counts) - std::log(2.0) / std::log(3.0)) < 1e-12);

  const double bad[] = {0.3};
  CHECK_THROWS_AS(box_counts(cantor, bad), ArgumentError);
  CHECK_THROWS_AS(box_counts(cantor, 5), ArgumentError);

  std::ostringstream csv;
  write_box_counts_csv(csv, counts);
  CHECK(csv.str().rfind("delta,count,log_count\n", 0) == 0);
}

TEST_CASE("cell set round trip") {
  const CellSet cs = rasterize_prefractal(*ifs_preset("carpet"), 2, 3);
  std::stringstream io;
  write_cellset(io, cs);
  const CellSet back = read_cellset(io);
  CHECK(back.level() == 2);
  CHECK(back.base() == 3);
  CHECK(back.dim() == 2);
  CHECK(back.cells() == cs.cells());
}
