#pragma once

#include <iosfwd>

namespace qkd {

// Full acceptance battery: every check prints one [PASS]/[FAIL] line with
// the measured numbers. Returns the number of failed checks (0 = healthy
// build). Every check is deterministic.
int run_selftest(std::ostream& out);

}  // namespace qkd
