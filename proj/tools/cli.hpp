#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psc::cli {

// Runs one subcommand. `args` excludes the program name. Returns the process
// exit code; failures print a single diagnostic line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace psc::cli
