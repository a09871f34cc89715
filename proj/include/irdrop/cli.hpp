#pragma once

namespace irdrop {

// Batch front end: extract, solve, predict, eval, adjust, inspect.
// Returns 0 on success, 1 on usage errors, 2 on data errors.
int cli_run(int argc, const char* const* argv);

}  // namespace irdrop
