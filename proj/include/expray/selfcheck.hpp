#pragma once

#include <cstdint>
#include <iosfwd>

namespace expray {

struct SelfcheckOptions {
    int samples = 25;
    uint64_t seed = 20240817;
};

/// Runs the cross-module invariant battery, printing one line per suite.
/// Returns the total number of violations (0 means everything held).
int run_selfcheck(const SelfcheckOptions& options, std::ostream& out);

}  // namespace expray
