#pragma once

namespace kgcn {

/// Entry point behind the kgcn binary. Returns the process exit status:
/// 0 success, 1 usage error, 2 data error, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace kgcn
