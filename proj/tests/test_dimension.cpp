#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fdrum/dimension.hpp"
#include "fdrum/prefractal.hpp"
#include "oracles.hpp"

using namespace fdrum;

namespace {

// Smallest `terms` entries of the brute-force level-N multiset.
double brute_force_dimension(const Spectrum& init, const std::vector<double>& ratios, int level,
                             std::size_t terms) {
  const std::vector<double> mags(init.magnitudes.begin(), init.magnitudes.end());
  const std::vector<double> muls(init.multiplicities.begin(), init.multiplicities.end());
  const auto set = oracle::recursive_multiset(mags, muls, ratios, level);
  double num = 0.0;
  double den = 0.0;
  std::size_t n = 0;
  for (const auto& [key, mul] : set) {
    if (n++ == terms) break;
    num += std::log(mul);
    den += key * 1e-9;
  }
  return num / den;
}

}  // namespace

TEST_CASE("analytic spectral dimension of homogeneous systems") {
  const Spectrum line = hypercube_spectrum(1, 1.0, 100);
  const int levels[] = {1000};
  const auto cantor = spectral_dimension_sequence(*ifs_preset("cantor"), line, levels, 100);
  const double want = oracle::homogeneous_partial_sum(2, 3.0, 1000, 100);
  CHECK(std::abs(cantor[0].second - want) < 1e-12);
  CHECK(want == doctest::Approx(0.628195).epsilon(1e-6));

  const auto interval = spectral_dimension_sequence(*ifs_preset("interval"), line, levels, 100);
  CHECK(std::abs(interval[0].second - oracle::homogeneous_partial_sum(2, 2.0, 1000, 100)) < 1e-12);
  CHECK(interval[0].second == doctest::Approx(0.993148).epsilon(1e-6));
}

TEST_CASE("mixed ratios agree with brute force") {
  const Spectrum line = hypercube_spectrum(1, 1.0, 100);
  const std::vector<double> ratios{0.5, 1.0 / 3.0};
  const Ifs mixed({SimilarityMap<double>::homothety(0.5, Eigen::VectorXd::Zero(1)),
                   SimilarityMap<double>::homothety(1.0 / 3.0, Eigen::VectorXd::Constant(1, 2.0 / 3.0))});
  const int levels[] = {4, 10};
  const auto seq = spectral_dimension_sequence(mixed, line, levels, 100);
  for (const auto& [level, value] : seq)
    CHECK(std::abs(value - brute_force_dimension(line, ratios, level, 100)) < 1e-9);
  // Does not tend to the Moran dimension (about 0.788); see README.
  CHECK(seq[1].second == doctest::Approx(0.2353).epsilon(1e-3));
  const int far[] = {100, 1000};
  const auto tail = spectral_dimension_sequence(mixed, line, far, 100);
  CHECK(tail[0].second == doctest::Approx(0.0949).epsilon(1e-3));
  CHECK(tail[1].second == doctest::Approx(0.01597).epsilon(1e-3));
}

TEST_CASE("Cantor sequence rises toward log 2 / log 3") {
  const Spectrum line = hypercube_spectrum(1, 1.0, 100);
  const int levels[] = {10, 100, 1000};
  const auto seq = spectral_dimension_sequence(*ifs_preset("cantor"), line, levels, 100);
  const double limit = std::log(2.0) / std::log(3.0);
  CHECK(seq[0].second < seq[1].second);
  CHECK(seq[1].second < seq[2].second);
  CHECK(seq[2].second < limit);
  const AsymptoticFit fit = fit_asymptotic(seq, limit);
  for (std::size_t k = 0; k < seq.size(); ++k) CHECK(fit.errors[k] * seq[k].first < 2.0 * fit.constant);
}

TEST_CASE("spectral dimension identities") {
  LogSpectrum one;
  one.log_magnitudes = {1.0};
  one.log_multiplicities = {1.0};
  CHECK(spectral_dimension(one, 1) == 1.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    LogSpectrum s;
    double acc = 0.0;
    for (int k = 0; k < 20; ++k) {
      acc += u(rng);
      s.log_magnitudes.push_back(acc);
      s.log_multiplicities.push_back(u(rng));
    }
    const double base = spectral_dimension(s, 20);
    const double log_a = u(rng);
    LogSpectrum scaled = s;
    for (double& v : scaled.log_magnitudes) v += log_a;
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k < 20; ++k) {
      num += s.log_multiplicities[static_cast<std::size_t>(k)];
      den += s.log_magnitudes[static_cast<std::size_t>(k)];
    }
    CHECK(spectral_dimension(scaled, 20) == doctest::Approx(num / (den + 20 * log_a)).epsilon(1e-12));
    const double t = u(rng);
    LogSpectrum powered = s;
    for (double& v : powered.log_multiplicities) v *= t;
    CHECK(spectral_dimension(powered, 20) == doctest::Approx(t * base).epsilon(1e-12));
  }
}

TEST_CASE("carpet from the square initiator") {
  const Spectrum square = hypercube_spectrum(2, 1.0, 100);
  const int levels[] = {1000};
  const auto seq = spectral_dimension_sequence(*ifs_preset("carpet"), square, levels, 100);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t n = 0; n < 100; ++n) {
    num += 1000 * std::log(8.0) + std::log(static_cast<double>(square.multiplicities[n]));
    den += 1000 * std::log(3.0) + std::log(square.magnitudes[n]);
  }
  CHECK(std::abs(seq[0].second - num / den) < 1e-12);
  CHECK(std::abs(seq[0].second - std::log(8.0) / std::log(3.0)) < 2e-2);
}

TEST_CASE("spectral_dimension errors and extras") {
  LogSpectrum s;
  s.log_magnitudes = {1.0, 2.0, 3.0};
  s.log_multiplicities = {0.5, 0.5, 1.0};
  CHECK(spectral_dimension(s, 2) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(spectral_dimension(s, 4), ArgumentError);
  CHECK_THROWS_AS(spectral_dimension(s, 0), ArgumentError);
  const LogEntry extra[] = {{3.0, 0.0}};
  CHECK(spectral_dimension_with_extras(s, 2, extra) == doctest::Approx(1.0 / 6.0));

  s.log_magnitudes[0] = 0.0;
  CHECK_THROWS_AS(spectral_dimension(s, 2), IllConditionedSpectrumError);
  const Spectrum low = cluster_multiplicities(std::vector<double>{-0.25, -4.0}, 1e-6);
  CHECK_THROWS_AS(spectral_dimension(low, 1), IllConditionedSpectrumError);
}

TEST_CASE("fit_asymptotic") {
  const std::vector<std::pair<int, double>> seq{{10, 1.3}, {100, 1.03}, {1000, 1.003}};
  const AsymptoticFit fit = fit_asymptotic(seq, 1.0);
  CHECK(fit.constant == doctest::Approx(3.0));
  CHECK(fit.errors[1] == doctest::Approx(0.03));
}

TEST_CASE("numeric spectral dimension") {
  NumericGrid grid;
  grid.refinement = 6;
  const int levels[] = {1, 2};
  const auto seq = spectral_dimension_sequence_numeric(*ifs_preset("cantor"), grid, levels, 5);
  REQUIRE(seq.size() == 2u);
  for (const auto& [level, value] : seq) {
    CHECK(value > 0.0);
    CHECK(value < 1.0);
  }
}

TEST_CASE("dimension report") {
  DimensionOptions opts;
  const DimensionReport r = dimension_report(*ifs_preset("carpet"), opts);
  CHECK(r.moran_dim == doctest::Approx(std::log(8.0) / std::log(3.0)).epsilon(1e-13));
  CHECK(r.gap_box_moran() < 1e-9);
  CHECK(r.box_exact);
  CHECK(r.gap_spectral_moran() < 2e-2);
  CHECK(r.levels_used == std::vector<int>{1000, 4});

  const DimensionReport g = dimension_report(*ifs_preset("gasket"), opts);
  CHECK_FALSE(g.box_exact);
  CHECK(g.moran_dim == doctest::Approx(std::log(3.0) / std::log(2.0)));

  std::ostringstream text;
  write_report_text(text, r);
  CHECK(text.str().find("spectral_dim: ") != std::string::npos);
  CHECK(text.str().find("box_exact: true") != std::string::npos);
  std::ostringstream csv;
  write_report_csv(csv, r);
  CHECK(csv.str().rfind("mode,convention,", 0) == 0);
}
