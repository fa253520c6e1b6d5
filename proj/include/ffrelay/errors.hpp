#pragma once

#include <stdexcept>

namespace ffrelay {

/// Feedback pole too close to the unit circle: |1 - alpha_hat * Theta| (or the
/// mirror denominator |1 + alpha_hat * Xi|) fell below the singularity guard.
struct SingularLoopError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dual point at which the per-bin Lagrangian is unbounded (mu = 0 with no
/// relay price active); the caller must issue a feasibility cut instead.
struct DegenerateDualError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Time-domain feedback recursion left the stable regime.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Not enough samples for the requested spectral averaging.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Frozen relay amplitudes already exceed the relay power budget on noise
/// forwarding alone; no source allocation can be feasible.
struct InfeasibleRelayBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ffrelay
