#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace layoutpref::cli {

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 usage error, 2 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `key=value` lines; '#' starts a comment line. Throws
/// Error(kParseError) naming the offending line.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

}  // namespace layoutpref::cli
