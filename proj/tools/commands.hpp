#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "fdrum/laplace.hpp"

namespace fdrum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string ifs = "cantor";
  std::optional<int> level;
  int base = 0;  // 0: natural base of the IFS
  int refine = 4;
  std::size_t trunc = 100;
  std::optional<double> cluster_tol;
  std::optional<double> match_tol;
  double pole_guard = 1e-6;
  std::string mode = "analytic";
  std::uint64_t seed = 20240601;
  std::string out = ".";
  bool json = false;
  int exponent = 1;
  std::string batch;
  bool renormalized = false;
  int box_level = 4;
  Eigen::Index dense_cap = 4000;
  Eigen::Index eigs = 0;  // partial solve size when the dense cap is exceeded; 0 = auto
};

int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_green(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_dims(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (subcommand first) and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdrum::cli
