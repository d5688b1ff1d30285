#pragma once

// Command-line front end: fit, cpp, select-xi and simulate.

#include <ostream>

#include <json.hpp>

namespace dmcle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNonConvergence = 4;

// Runs one invocation. Results go to files named by --out, or to `out` when
// no file is given; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// The defaults table printed by --show-defaults, keyed by command (and by
// scenario for simulate).
nlohmann::json defaults();

}  // namespace dmcle::cli
