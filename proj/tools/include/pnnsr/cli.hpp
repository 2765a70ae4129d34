#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pnnsr {

/// Runs one `pnnsr` invocation. `args` excludes the program name. Returns 0 on
/// success, 1 on a usage error and 2 on a runtime error; diagnostics go to
/// `err`, reports that are not written to files go to `out`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace pnnsr
