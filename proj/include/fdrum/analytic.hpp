#pragma once

#include <cstddef>
#include <vector>

#include "fdrum/laplace.hpp"

namespace fdrum {

/// Spectrum held in log domain so that magnitudes like 3^1000 and
/// multiplicities like 2^1000 stay representable. Entries ascend in
/// log_magnitudes.
struct LogSpectrum {
  std::vector<double> log_magnitudes;
  std::vector<double> log_multiplicities;
  MagnitudeConvention convention = MagnitudeConvention::wavenumber;

  std::size_t size() const { return log_magnitudes.size(); }
};

LogSpectrum to_log_spectrum(const Spectrum& s);

/// Exact Dirichlet spectrum of the cube [0, side]^d: magnitudes pi |m| / side
/// over m in N^d (m_i >= 1), multiplicity = number of lattice points with
/// equal |m|^2. Returns the `count` smallest distinct magnitudes.
Spectrum hypercube_spectrum(int dim, double side, std::size_t count,
                            MagnitudeConvention c = MagnitudeConvention::wavenumber);

}  // namespace fdrum
