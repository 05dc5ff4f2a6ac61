#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fdrum/analytic.hpp"
#include "fdrum/laplace.hpp"
#include "oracles.hpp"

using namespace fdrum;

namespace {

GridDomain box_grid(std::vector<int> n, double h) {
  IndexVector div(static_cast<Eigen::Index>(n.size()));
  for (std::size_t k = 0; k < n.size(); ++k) div(static_cast<Eigen::Index>(k)) = n[k];
  return GridDomain::box(h, div);
}

double max_rel_error(const Eigen::VectorXd& got, const std::vector<double>& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.size(); ++i) {
    const double w = want[static_cast<std::size_t>(i)];
    worst = std::max(worst, std::abs(got(i) - w) / std::abs(w));
  }
  return worst;
}

}  // namespace

TEST_CASE("assemble the Dirichlet Laplacian") {
  const GridDomain g = refine_to_grid(rasterize_prefractal(*ifs_preset("interval"), 1, 2), 2);
  const SparseSymMatrix L = assemble_dirichlet_laplacian(g);
  Eigen::MatrixXd want(3, 3);
  want << -32, 16, 0, 16, -32, 16, 0, 16, -32;
  CHECK(Eigen::MatrixXd(L.matrix).isApprox(want));
  CHECK(L.spacing == 0.25);
  CHECK(L.dim == 1);

  // Cantor level 1: the two intervals decouple.
  const GridDomain c = refine_to_grid(rasterize_prefractal(*ifs_preset("cantor"), 1, 3), 3);
  const Eigen::MatrixXd dense(assemble_dirichlet_laplacian(c).matrix);
  CHECK(dense(1, 2) == 0.0);
  CHECK(dense(0, 1) == doctest::Approx(81.0));
  CHECK(dense(0, 0) == doctest::Approx(-162.0));
}

TEST_CASE("full spectrum of boxes matches the closed form") {
  for (int n : {8, 17, 40}) {
    const double h = 1.0 / n;
    const RawSpectrum raw = full_spectrum(assemble_dirichlet_laplacian(box_grid({n}, h)));
    CHECK(max_rel_error(raw.values, oracle::fd_box_eigenvalues({n}, h)) < 1e-10);
  }
  for (auto [nx, ny] : {std::pair{5, 7}, std::pair{9, 9}, std::pair{12, 20}}) {
    const double h = 0.1;
    const RawSpectrum raw = full_spectrum(assemble_dirichlet_laplacian(box_grid({nx, ny}, h)));
    CHECK(max_rel_error(raw.values, oracle::fd_box_eigenvalues({nx, ny}, h)) < 1e-10);
  }
}

TEST_CASE("full spectrum returns orthonormal eigenvectors") {
  const GridDomain g = refine_to_grid(rasterize_prefractal(*ifs_preset("carpet"), 1, 3), 3);
  const SparseSymMatrix L = assemble_dirichlet_laplacian(g);
  const RawSpectrum raw = full_spectrum(L, {true, 4000});
  REQUIRE(raw.vectors.has_value());
  const Eigen::MatrixXd& V = *raw.vectors;
  CHECK((V.transpose() * V - Eigen::MatrixXd::Identity(V.cols(), V.cols())).norm() < 1e-10);
  const Eigen::MatrixXd residual = L.matrix * V - V * raw.values.asDiagonal();
  CHECK(residual.norm() < 1e-8 * raw.values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 1; i < raw.values.size(); ++i)
    CHECK(std::abs(raw.values(i - 1)) <= std::abs(raw.values(i)));
}

TEST_CASE("dense cap") {
  const SparseSymMatrix L = assemble_dirichlet_laplacian(box_grid({20, 20}, 0.05));
  CHECK_THROWS_AS(full_spectrum(L, {false, 100}), ArgumentError);
}

TEST_CASE("partial spectrum agrees with the dense solver") {
  const GridDomain g = refine_to_grid(rasterize_prefractal(*ifs_preset("carpet"), 2, 3), 2);
  const SparseSymMatrix L = assemble_dirichlet_laplacian(g);
  const RawSpectrum full = full_spectrum(L);
  PartialSpectrumOptions opts;
  opts.want_vectors = true;
  const RawSpectrum part = partial_spectrum(L, 30, opts);
  REQUIRE(part.values.size() == 30);
  for (Eigen::Index i = 0; i < 30; ++i)
    CHECK(std::abs(part.values(i) - full.values(i)) < 1e-9 * std::abs(full.values(i)));
  REQUIRE(part.vectors.has_value());
  const Eigen::MatrixXd res = L.matrix * *part.vectors - *part.vectors * part.values.asDiagonal();
  CHECK(res.norm() < 1e-7 * std::abs(part.values(29)));
}

TEST_CASE("partial spectrum beyond the dense cap") {
  const int n = 90;
  const double h = 1.0 / n;
  const SparseSymMatrix L = assemble_dirichlet_laplacian(box_grid({n, n}, h));
  REQUIRE(L.order() > 4000);
  const RawSpectrum part = partial_spectrum(L, 25);
  const auto want = oracle::fd_box_eigenvalues({n, n}, h);
  CHECK(max_rel_error(part.values, want) < 1e-10);
  CHECK_THROWS_AS(partial_spectrum(L, 0), ArgumentError);
}

TEST_CASE("magnitudes and conventions") {
  const std::vector<double> raw{-4.0, -9.0, 0.0};
  const auto wn = to_magnitudes(raw);
  CHECK(wn == std::vector<double>{2.0, 3.0});
  const auto ev = to_magnitudes(raw, MagnitudeConvention::eigenvalue);
  CHECK(ev == std::vector<double>{4.0, 9.0});
  const std::vector<double> bad{-4.0, 1.0};
  CHECK_THROWS_AS(to_magnitudes(bad), MatrixConventionError);
  CHECK(convention_from_exponent(1) == MagnitudeConvention::wavenumber);
  CHECK(convention_from_exponent(2) == MagnitudeConvention::eigenvalue);
  CHECK_THROWS_AS(convention_from_exponent(3), ArgumentError);
  CHECK(exponent_of(MagnitudeConvention::eigenvalue) == 2);
}

TEST_CASE("clustering") {
  const std::vector<double> raw{-1.0, -1.0000001, -4.0, -4.000001, -4.0000005, -9.0};
  const Spectrum s = cluster_multiplicities(raw, 1e-6);
  CHECK(s.multiplicities == std::vector<std::int64_t>{2, 3, 1});
  CHECK(s.magnitudes[2] == doctest::Approx(3.0));
  CHECK(s.total_multiplicity() == 6);
  CHECK(s.cluster_offset(2) == 5u);
  // A tight tolerance splits everything.
  CHECK(cluster_multiplicities(raw, 1e-12).size() == 6u);

  // Discrete Cantor level 1: two identical intervals, every mode doubled.
  const GridDomain g = refine_to_grid(rasterize_prefractal(*ifs_preset("cantor"), 1, 3), 9);
  const Spectrum c = cluster_multiplicities(full_spectrum(assemble_dirichlet_laplacian(g)),
                                            kDiscreteClusterTol);
  REQUIRE(c.size() == 8u);
  const auto single = oracle::fd_box_eigenvalues({9}, 1.0 / 27.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    CHECK(c.multiplicities[k] == 2);
    CHECK(c.magnitudes[k] == doctest::Approx(std::sqrt(-single[k])).epsilon(1e-10));
  }
}

TEST_CASE("hypercube spectrum") {
  const Spectrum line = hypercube_spectrum(1, 1.0, 5);
  for (std::size_t n = 0; n < 5; ++n) {
    CHECK(line.magnitudes[n] == doctest::Approx(std::numbers::pi * (n + 1)));
    CHECK(line.multiplicities[n] == 1);
  }
  // |m|^2 = 2, 5, 8, 10, 13, 17, 18, 20, 25 in the square; 25 = 9 + 16 only.
  const Spectrum sq = hypercube_spectrum(2, 1.0, 9, MagnitudeConvention::eigenvalue);
  const std::vector<double> norms{2, 5, 8, 10, 13, 17, 18, 20, 25};
  const std::vector<std::int64_t> muls{1, 2, 1, 2, 2, 2, 1, 2, 2};
  for (std::size_t n = 0; n < norms.size(); ++n)
    CHECK(sq.magnitudes[n] == doctest::Approx(std::numbers::pi * std::numbers::pi * norms[n]));
  CHECK(sq.multiplicities == muls);
  CHECK_THROWS_AS(hypercube_spectrum(0, 1.0, 3), ArgumentError);
}

TEST_CASE("spectrum csv output") {
  Spectrum s = cluster_multiplicities(std::vector<double>{-1.0, -1.0, -4.0}, 1e-6);
  s.meta.level = 2;
  std::ostringstream csv;
  write_spectrum_csv(csv, s);
  CHECK(csv.str().find("magnitude,multiplicity\n") != std::string::npos);
  CHECK(csv.str().find("# level 2") != std::string::npos);
  std::ostringstream plateau;
  write_plateau_csv(plateau, s);
  CHECK(plateau.str().find("count,magnitude\n1,1\n2,1\n3,2\n") != std::string::npos);
}

TEST_CASE("three-node interval") {
  const SparseSymMatrix L = assemble_dirichlet_laplacian(box_grid({4}, 0.25));
  const RawSpectrum full = full_spectrum(L);
  CHECK(full.values(0) == doctest::Approx(-9.3726).epsilon(1e-4));
  CHECK(full.values(1) == doctest::Approx(-32.0));
  CHECK(full.values(2) == doctest::Approx(-54.627).epsilon(1e-4));
  const RawSpectrum one = partial_spectrum(L, 1);
  CHECK(one.values(0) == doctest::Approx(full.values(0)).epsilon(1e-12));

  // Unit square, h = 1/3: four nodes.
  const RawSpectrum sq = full_spectrum(assemble_dirichlet_laplacian(box_grid({3, 3}, 1.0 / 3.0)));
  CHECK(max_rel_error(sq.values, oracle::fd_box_eigenvalues({3, 3}, 1.0 / 3.0)) < 1e-12);

  CHECK_THROWS_AS(assemble_dirichlet_laplacian(GridDomain(0.5, IndexVector::Constant(1, 2), {})),
                  ArgumentError);
}

TEST_CASE("assembled matrix is symmetric") {
  const GridDomain g = refine_to_grid(rasterize_prefractal(*ifs_preset("carpet"), 2, 3), 2);
  const Eigen::MatrixXd A(assemble_dirichlet_laplacian(g).matrix);
  CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * A.cwiseAbs().maxCoeff());
}

TEST_CASE("direct sums double every eigenvalue") {
  const RawSpectrum one = full_spectrum(assemble_dirichlet_laplacian(box_grid({7}, 1.0)));
  const GridDomain two(1.0, IndexVector::Constant(1, 16), {1, 2, 3, 4, 5, 6, 9, 10, 11, 12, 13, 14});
  const RawSpectrum both = full_spectrum(assemble_dirichlet_laplacian(two));
  REQUIRE(both.values.size() == 2 * one.values.size());
  for (Eigen::Index i = 0; i < one.values.size(); ++i) {
    CHECK(both.values(2 * i) == doctest::Approx(one.values(i)).epsilon(1e-12));
    CHECK(both.values(2 * i + 1) == doctest::Approx(one.values(i)).epsilon(1e-12));
  }
  const RawSpectrum part = partial_spectrum(assemble_dirichlet_laplacian(two), 4);
  CHECK(part.values(1) == doctest::Approx(one.values(0)).epsilon(1e-10));
}

TEST_CASE("lowest interval magnitude converges at second order") {
  std::vector<double> err;
  for (int n : {8, 16, 32, 64}) {
    const RawSpectrum raw = full_spectrum(assemble_dirichlet_laplacian(box_grid({n}, 1.0 / n)));
    err.push_back(std::abs(std::sqrt(-raw.values(0)) - std::numbers::pi));
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(err[k - 1] / err[k] == doctest::Approx(4.0).epsilon(1e-2));
}

TEST_CASE("clustering examples") {
  const std::vector<double> raw{-1.0, -1.0 - 1e-9, -2.0};
  const Spectrum ev = cluster_multiplicities(raw, 1e-6, MagnitudeConvention::eigenvalue);
  CHECK(ev.magnitudes[0] == doctest::Approx(1.0));
  CHECK(ev.magnitudes[1] == doctest::Approx(2.0));
  CHECK(ev.multiplicities == std::vector<std::int64_t>{2, 1});
  const Spectrum wn = cluster_multiplicities(raw, 1e-6);
  CHECK(wn.magnitudes[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(cluster_multiplicities(std::vector<double>{}, 1e-6).empty());
  CHECK(to_magnitudes(std::vector<double>{-std::numbers::pi * std::numbers::pi})[0] ==
        doctest::Approx(std::numbers::pi));

  // Cantor level 2: four identical intervals.
  const GridDomain g = refine_to_grid(rasterize_prefractal(*ifs_preset("cantor"), 2, 3), 6);
  const Spectrum c = cluster_multiplicities(full_spectrum(assemble_dirichlet_laplacian(g)), 1e-6);
  CHECK(c.size() == 5u);
  for (auto m : c.multiplicities) CHECK(m == 4);
}
