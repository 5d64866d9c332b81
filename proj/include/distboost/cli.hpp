#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace distboost::cli {

/// Runs the command-line interface on `args` (args[0] is the program name).
/// Returns the process exit code; diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::string& path);

}  // namespace distboost::cli
