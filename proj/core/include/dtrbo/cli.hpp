#pragma once

#include <string>
#include <vector>

namespace dtrbo {

// Command-line entry point (argv without the program name). Exit codes:
// 0 success, 1 usage error, 2 numerical/convergence/estimation error.
int cli_main(const std::vector<std::string>& args);

}  // namespace dtrbo
