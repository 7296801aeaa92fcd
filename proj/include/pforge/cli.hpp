#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pforge {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDenied = 2;
inline constexpr int kExitUnclassifiable = 3;
inline constexpr int kExitSchema = 4;

// Runs one command line (without the program name):
//   build --space S --p P --kind K [--count M] [--horizon H] ... [--out FILE]
//   certify FILE --claim C [--q Q] [--depth D] [--member K] [--out FILE]
//   export FILE --depth D --format csv [--member K] [--out FILE]
//   transport FILE --map F|L|G|G-inverse|T|T-inverse [--out FILE]
//   suite [--only N]
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pforge
