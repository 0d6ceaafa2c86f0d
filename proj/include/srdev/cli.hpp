#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace srdev {

/// Exit codes: 0 success, 1 mathematical infeasibility or failed check,
/// 2 input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace srdev
