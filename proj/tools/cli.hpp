#pragma once

#include <iosfwd>

namespace scenesynth::cli {

enum ExitCode : int { kOk = 0, kDataFailure = 1, kUsageError = 2 };

// Entry point shared by the executable and the tests. argv[0] is the
// program name, as in main().
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scenesynth::cli
