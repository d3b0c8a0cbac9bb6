#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cosearch {

/// Exit codes: 0 success, 1 domain error, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with `args` excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Directory searched for `<name>.json` device specs before the built-ins.
inline constexpr const char* kDeviceDirEnv = "COSEARCH_DEVICE_DIR";

}  // namespace cosearch
