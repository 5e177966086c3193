#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tde {

/// Entry point of the `tde` executable. Subcommands: simulate, fit, select,
/// benchmark, price. Returns the process exit status; failures print one
/// line "tde-error:<kind>:<message>" to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tde
