#pragma once

namespace qkd {

// argv-style entry point of the qkdsim tool. Returns the process exit code:
// 0 on success, 1 on usage/config/validation errors, 2 when a session ends
// with a monitor alarm.
int cli_main(int argc, const char* const* argv);

}  // namespace qkd
