#pragma once

#include "ffrelay/relay_model.hpp"
#include "ffrelay/subproblem.hpp"

namespace ffrelay {

/// Dual prices of the source and relay power constraints [(bps/Hz)/W].
struct DualPoint {
    double mu = 0.0;
    double lambda = 0.0;
};

/// Central-cut ellipsoid over (mu, lambda): center plus symmetric
/// positive-definite shape matrix.
struct EllipsoidState {
    double center[2] = {0.0, 0.0};
    double shape[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    int iteration = 0;

    bool positive_definite() const {
        return shape[0][0] > 0.0 &&
               shape[0][0] * shape[1][1] - shape[0][1] * shape[1][0] > 0.0;
    }
};

struct SolverOptions {
    double gap_tol = 1e-4;      ///< stop at this relative duality gap
    int max_iter = 200;         ///< ellipsoid iteration cap
    double radius_scale = 1e6;  ///< initial sphere radius, times the center scale
    bool polish = true;         ///< coordinate polish of the recovered primal
};

/// Dual function value, its subgradient, and the per-bin maximizers.
struct DualEval {
    double value = 0.0;
    double subgrad[2] = {0.0, 0.0};
    std::vector<BinSolution> bins;
};

struct JointSolution {
    Allocation allocation;
    DualPoint duals;
    RateReport report;
};

/// Evaluates the dual function: value = sum_k v_k df + mu P + lambda Q with
/// v_k the exact per-bin Lagrangian maximum, and subgradient
/// [P - sum P* df, Q - sum Xi*^2 (|H_SR|^2 P* + N0) df].
/// Throws DegenerateDualError at mu <= 0 or lambda < 0 (caller must cut).
DualEval dual_value(const DualPoint& duals, const ChannelSet& channels,
                    const SystemConfig& config);

/// Assembles the allocation from per-bin solutions; on a budget violation
/// beyond 1e-9 relative (degenerate plateau) rescales P once, re-solves
/// Xi bin-wise at the fixed duals, and flags the adjustment.
Allocation recover_primal(const DualPoint& duals, const std::vector<BinSolution>& bins,
                          const ChannelSet& channels, const SystemConfig& config,
                          bool* adjusted = nullptr);

/// Joint source/relay optimization via the ellipsoid method on the 2-D dual.
/// seed_candidates, when given, are feasible allocations whose rate the
/// returned solution is guaranteed to match or beat.
JointSolution ellipsoid_minimize(const ChannelSet& channels, const SystemConfig& config,
                                 const SolverOptions& opts = {},
                                 const std::vector<Allocation>* seed_candidates = nullptr);

/// Concave sub-step: optimal source PSD under both power constraints with the
/// relay amplitudes frozen. Throws InfeasibleRelayBudgetError when the frozen
/// amplitudes exceed the relay budget on noise forwarding alone.
JointSolution solve_p_given_xi(const ChannelSet& channels, const SystemConfig& config,
                               const dvec& xi_bar, const SolverOptions& opts = {});

/// Sub-step: optimal relay amplitudes under the relay power constraint with
/// the source PSD frozen; 1-D dual bisection with per-bin bracketed searches.
JointSolution solve_xi_given_p(const ChannelSet& channels, const SystemConfig& config,
                               const dvec& p, const SolverOptions& opts = {},
                               int scan_points = 256);

}  // namespace ffrelay
