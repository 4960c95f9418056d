#pragma once

#include <ostream>

namespace afrg {

// Quick oracle, gradient, and shape suites; prints one line per check.
// Returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace afrg
