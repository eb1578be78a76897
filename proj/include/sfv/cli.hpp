#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sfv::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line (without the program name). Data goes to `out`,
/// diagnostics to `err`. Returns 0 on success, 1 on runtime failure and 2 on
/// usage errors.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sfv::cli
