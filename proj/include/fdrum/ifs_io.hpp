#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdrum/ifs.hpp"

namespace fdrum {

using Ifs = IteratedFunctionSystem<double>;

// Named systems: interval, cantor, carpet, gasket.
std::optional<Ifs> ifs_preset(const std::string& name);
std::vector<std::string> ifs_preset_names();

// Reads the line-based definition format:
//
//   # comment
//   dim 2
//   map
//     matrix 1/3 0 0 1/3      (row-major, d*d entries)
//     translation 0 2/3       (d entries)
//     ratio 1/3
//   map
//     ...
//
// Numbers accept decimal or a/b rational literals. Errors throw ParseError
// carrying the offending line.
Ifs parse_ifs(std::istream& in);
Ifs parse_ifs_string(const std::string& text);
Ifs load_ifs_file(const std::string& path);

// Preset name first, then a file path.
Ifs resolve_ifs(const std::string& name_or_path);

void write_ifs(std::ostream& out, const Ifs& ifs);

}  // namespace fdrum
