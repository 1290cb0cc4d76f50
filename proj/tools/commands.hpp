#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace semshift::cli {

// Runs the command line `args` (without the program name). Output files are
// written as requested, progress and warnings go to `err`. Returns the
// process exit status: 0 on success, 1 on a failed command, 2 on a usage
// error. Failures are reported as one line on `err`:
//   semshift: error: <kind>: <message>
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semshift::cli
