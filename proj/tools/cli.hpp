#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tempolower::cli {

enum ExitCode : int {
  kSuccess = 0,
  kNegative = 1,      // invalid plan, disagreement, unsolvable
  kInputError = 2,    // usage or input error
  kInconclusive = 3,  // a search bound was hit
};

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes `content` to a sibling temporary file and renames it over `path`.
/// Throws std::runtime_error on failure, leaving `path` untouched.
void write_atomically(const std::string& path, const std::string& content);

}  // namespace tempolower::cli
