#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace drs::cli {

/// Runs one `drs` invocation; `args` excludes the program name. Returns the
/// process exit code. Diagnostics go to `err` as "error: code=... message=...".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drs::cli
