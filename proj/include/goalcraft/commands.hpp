#pragma once

#include <string>

namespace goalcraft {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// The goalcraft command line: train, eval, finetune, transfer, ablate,
/// analyze and report. Returns the process exit code.
int run_cli(int argc, char** argv);

/// Output directory for --out: relative paths are placed under
/// $GOALCRAFT_OUT when it is set; an empty --out means $GOALCRAFT_OUT or "runs".
std::string resolve_out_dir(const std::string& out);

const char* version();

}  // namespace goalcraft
