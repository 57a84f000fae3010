#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coreset {

/// Entry point behind the `coreset` executable. `args` excludes the program
/// name. Returns the process exit code: 0 success, 2 usage or validation
/// error, 3 capability mismatch, 4 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coreset
