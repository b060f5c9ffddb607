#pragma once

#include <ostream>

namespace qmeter {

// Fast invariant suite behind the CLI `selftest` subcommand: drive-law
// endpoints, eigensystem identities, beta closed form vs quadrature,
// Parseval/dual-momentum agreement, kernel backend equivalence, mirror
// reconstruction, norm drift, and worker-count determinism. Prints one
// PASS/FAIL line per check; returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace qmeter
