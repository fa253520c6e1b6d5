#pragma once

#include "ffrelay/channel.hpp"

namespace ffrelay {

/// Loop-back channel response alpha_hat(f) = alpha * exp(-j 2 pi tau f).
struct LoopbackResponse {
    cvec alpha_hat;
};

/// Joint design point: source PSD P(f), relay amplitude Xi_bar(f) >= 0, and
/// the induced complex filter response Theta(f).
struct Allocation {
    dvec p;        ///< source PSD per bin [W/Hz]
    dvec xi_bar;   ///< relay amplitude per bin (dimensionless, >= 0)
    cvec theta;    ///< filter response per bin, derived from xi_bar

    int size() const { return static_cast<int>(p.size()); }
};

/// Rate and power accounting for one allocation, plus solver diagnostics.
struct RateReport {
    double rate_bps_hz = 0.0;
    dvec rate_density;               ///< R(f) per bin [bps/Hz]
    double source_power_used = 0.0;  ///< [W]
    double relay_power_used = 0.0;   ///< [W]
    double duality_gap_rel = 0.0;
    int iterations = 0;

    // Diagnostics.
    double max_loop_gain = 0.0;      ///< max_k |alpha_hat_k * theta_k|; > 1 is reported, not rejected
    bool budget_adjusted = false;    ///< primal recovery had to rescale
    bool converged = true;
};

/// Guard below which the feedback denominators are treated as singular.
inline constexpr double kSingularDenominator = 1e-12;

/// Numerical ceiling on Xi_bar; far beyond any power-feasible amplitude.
inline constexpr double kXiBarMax = 1e12;

LoopbackResponse loopback_response(double alpha, double tau, const FrequencyGrid& grid);

/// H_SD + H_RD H_SR Theta / (1 - alpha_hat Theta) per bin.
cvec effective_response(const cvec& h_sd, const cvec& h_sr, const cvec& h_rd,
                        const cvec& theta, const cvec& alpha_hat);

/// (|H_RD Theta / (1 - alpha_hat Theta)|^2 + 1) * N0 per bin [W/Hz].
dvec effective_noise_psd(const cvec& h_rd, const cvec& theta, const cvec& alpha_hat,
                         double n0);

/// |Theta / (1 - alpha_hat Theta)|^2 (|H_SR|^2 P + N0) per bin [W/Hz].
dvec relay_tx_psd(const cvec& theta, const cvec& alpha_hat, const cvec& h_sr,
                  const dvec& p, double n0);

/// Theta = Xi / (1 + alpha_hat Xi) and its inverse Xi = Theta / (1 - alpha_hat Theta).
cvec theta_from_xi(const cvec& xi, const cvec& alpha_hat);
cvec xi_from_theta(const cvec& theta, const cvec& alpha_hat);

/// Rotates nonnegative amplitudes onto the coherent-combining phase
/// H_SD H_RD^* H_SR^* / |...|; bins where that product vanishes keep phase 0.
cvec align_phase(const dvec& xi_bar, const cvec& h_sd, const cvec& h_sr,
                 const cvec& h_rd);

/// Per-bin rate density through the loop formulas (effective response/noise).
dvec rate_density(const dvec& p, const cvec& theta, const ChannelSet& channels,
                  const cvec& alpha_hat, double n0);

/// Per-bin rate density in (P, Xi_bar) form:
/// 0.5 log2(1 + (|H_SD| + |H_RD H_SR|Xi)^2 P / ((|H_RD|^2 Xi^2 + 1) N0)).
/// Independent of the loop-back channel by construction.
dvec rate_density_reformulated(const dvec& p, const dvec& xi_bar,
                               const ChannelSet& channels, double n0);

/// Builds theta = theta_from_xi(align_phase(xi_bar), alpha_hat).
Allocation make_allocation(const dvec& p, const dvec& xi_bar,
                           const ChannelSet& channels, const cvec& alpha_hat);

/// Average rate (1/W) sum R_k df plus power usage per the amplitude form
/// sum Xi^2 (|H_SR|^2 P + N0) df. Rate densities use the reformulated
/// expression; the loop-formula route is available above for cross-checks.
RateReport total_rate(const Allocation& alloc, const ChannelSet& channels,
                      const SystemConfig& config);

}  // namespace ffrelay
