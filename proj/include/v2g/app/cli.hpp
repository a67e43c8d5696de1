#ifndef V2G_APP_CLI_HPP
#define V2G_APP_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace v2g::app {

enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,       // usage or configuration problem
    kExitInfeasible = 2,  // design violates the grid limit; results are still written
};

/// Entry point behind the `depot-v2g` executable. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace v2g::app

#endif  // V2G_APP_CLI_HPP
