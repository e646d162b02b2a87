#pragma once

namespace stegsan::app {

/// Command-line entry point. Returns 0 on success, 1 on a usage error and
/// 2 on any runtime failure.
int run_cli(int argc, char** argv);

}  // namespace stegsan::app
