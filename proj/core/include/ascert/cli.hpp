#pragma once

namespace ascert {

// Full command-line surface: certify | solve | validate | slice | report.
// Exit codes: 0 success, 1 validation mismatches, 2 bad input, 3 iteration cap.
int run_cli(int argc, char** argv);

}  // namespace ascert
