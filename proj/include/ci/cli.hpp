#pragma once

#include <ostream>

namespace ci {

/// Exit codes: 0 success, 2 config/IO error, 3 mathematical precondition failure,
/// 4 audit failure, 1 anything else.
enum ExitCode { kExitOk = 0, kExitInternal = 1, kExitConfig = 2, kExitPrecondition = 3, kExitAudit = 4 };

/// Entry point of the `ci` tool: seed, stage, run, verify, export.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ci
