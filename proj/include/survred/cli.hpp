#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace survred {

// Command dispatch used by the survred binary; exposed for testing.
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string cli_usage();

}  // namespace survred
