#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lrkit::tools {

/// Exit codes of run_cli.
inline constexpr int kExitClean = 0;      // parsed with no syntax errors
inline constexpr int kExitRecovered = 1;  // parsed after recovering from errors
inline constexpr int kExitFailed = 2;     // bad arguments or files, or recovery failed

/// nimbleparse [options] <lexer.l> <grammar.y> <input>
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// lrbench <run|mutate|generate> [options]
/// Returns 0 on success, 2 on bad arguments or files.
int run_bench_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lrkit::tools
