#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace saftlab::cli {

/// Exit codes: 0 success, 1 structural error (bad input files, shapes,
/// incompatible grids), 2 validation failure (constraint, stability or
/// tolerance failures), 64 usage errors such as unknown flags.
inline constexpr int kOk = 0;
inline constexpr int kStructural = 1;
inline constexpr int kValidation = 2;
inline constexpr int kUsage = 64;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

} // namespace saftlab::cli
