#include "fdrum/analytic.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace fdrum {

namespace {

void count_lattice(int dims_left, std::int64_t partial, std::int64_t bound,
                   std::map<std::int64_t, std::int64_t>& counts) {
  if (dims_left == 0) {
    ++counts[partial];
    return;
  }
  // Each remaining coordinate is at least 1.
  for (std::int64_t m = 1; partial + m * m + (dims_left - 1) <= bound; ++m)
    count_lattice(dims_left - 1, partial + m * m, bound, counts);
}

}  // namespace

LogSpectrum to_log_spectrum(const Spectrum& s) {
  LogSpectrum out;
  out.convention = s.meta.convention;
  out.log_magnitudes.reserve(s.size());
  out.log_multiplicities.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.log_magnitudes.push_back(std::log(s.magnitudes[i]));
    out.log_multiplicities.push_back(std::log(static_cast<double>(s.multiplicities[i])));
  }
  return out;
}

Spectrum hypercube_spectrum(int dim, double side, std::size_t count, MagnitudeConvention c) {
  if (dim < 1) throw ArgumentError("hypercube_spectrum: dim must be >= 1");
  if (!(side > 0.0)) throw ArgumentError("hypercube_spectrum: side must be positive");
  std::map<std::int64_t, std::int64_t> counts;
  std::int64_t bound = std::max<std::int64_t>(dim, 4);
  while (true) {
    counts.clear();
    count_lattice(dim, 0, bound, counts);
    if (counts.size() >= count) break;
    bound *= 2;
  }
  Spectrum s;
  s.meta.convention = c;
  s.meta.level = 0;
  for (const auto& [norm2, mul] : counts) {
    if (s.size() == count) break;
    const double kappa = std::numbers::pi * std::sqrt(static_cast<double>(norm2)) / side;
    s.magnitudes.push_back(c == MagnitudeConvention::wavenumber ? kappa : kappa * kappa);
    s.multiplicities.push_back(mul);
  }
  return s;
}

}  // namespace fdrum
