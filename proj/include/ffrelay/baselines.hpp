#pragma once

#include "ffrelay/dual_solver.hpp"

namespace ffrelay {

/// Residual self-interference left after imperfect cancellation at the relay:
/// white with PSD Q alpha^2 / (W zeta), added to the relay receive noise.
struct ResidualSiModel {
    double zeta = 1.0;    ///< linear self-interference reduction factor, > 0
    double si_psd = 0.0;  ///< [W/Hz]
};

ResidualSiModel residual_si(const SystemConfig& config, double zeta, double alpha_sq);

/// P(f) = P/W and the amplitude that saturates the relay budget,
/// Xi(f) = sqrt(Q / (W (|H_SR|^2 P(f) + N0))).
JointSolution equal_power(const ChannelSet& channels, const SystemConfig& config);

/// Relay amplitudes frozen at the equal-power rule; source PSD optimized
/// under both budgets (concave water-filling with two prices).
JointSolution source_only(const ChannelSet& channels, const SystemConfig& config,
                          const SolverOptions& opts = {});

/// Source PSD frozen flat; relay amplitudes optimized under the relay budget.
JointSolution relay_only(const ChannelSet& channels, const SystemConfig& config,
                         const SolverOptions& opts = {});

/// Rate of one design when a residual-SI PSD rides on the relay receive noise:
/// per bin 0.5 log2(1 + |H_SD + H_RD H_SR Theta|^2 P / (|H_RD Theta|^2 (N0+s) + N0)).
/// The reported relay power is the inflated actual usage
/// sum |Theta|^2 (|H_SR|^2 P + N0 + s) df, unscaled unless rescale_to_budget.
RateReport evaluate_with_residual_si(const Allocation& alloc, const ChannelSet& channels,
                                     const SystemConfig& config, double si_psd,
                                     bool rescale_to_budget = false);

/// Rebuilds a joint design's filter for the cancellation receiver
/// (alpha treated as 0, so Theta = Xi).
Allocation conventional_design(const JointSolution& joint, const ChannelSet& channels);

/// Conventional baseline: design jointly assuming perfect cancellation
/// (alpha = 0), then evaluate under the residual-SI PSD implied by
/// config.loopback_alpha and the given linear reduction factor zeta.
RateReport conventional_sic(const ChannelSet& channels, const SystemConfig& config,
                            double zeta, const SolverOptions& opts = {});

}  // namespace ffrelay
