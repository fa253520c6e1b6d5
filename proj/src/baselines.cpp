#include "ffrelay/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "ffrelay/errors.hpp"

namespace ffrelay {

namespace {

constexpr double kLn2 = 0.6931471805599453;

dvec equal_power_p(const SystemConfig& config) {
    return dvec(config.num_subchannels, config.source_budget_p / config.bandwidth_w);
}

dvec equal_power_xi(const ChannelSet& channels, const SystemConfig& config,
                    const dvec& p) {
    dvec xi(channels.size(), 0.0);
    if (config.relay_budget_q <= 0.0) return xi;
    for (int k = 0; k < channels.size(); ++k) {
        const double denom =
            config.bandwidth_w * (std::norm(channels.h_sr[k]) * p[k] + config.noise_psd_n0);
        xi[k] = std::sqrt(config.relay_budget_q / denom);
    }
    return xi;
}

JointSolution pick_better(JointSolution a, JointSolution b) {
    return b.report.rate_bps_hz > a.report.rate_bps_hz ? b : a;
}

}  // namespace

ResidualSiModel residual_si(const SystemConfig& config, double zeta, double alpha_sq) {
    if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be > 0");
    ResidualSiModel m;
    m.zeta = zeta;
    m.si_psd = config.relay_budget_q * alpha_sq / (config.bandwidth_w * zeta);
    return m;
}

JointSolution equal_power(const ChannelSet& channels, const SystemConfig& config) {
    config.validate();
    const dvec p = equal_power_p(config);
    const dvec xi = equal_power_xi(channels, config, p);
    const FrequencyGrid grid = build_grid(config);
    const LoopbackResponse lb =
        loopback_response(config.loopback_alpha, config.loopback_tau, grid);
    JointSolution js;
    js.allocation = make_allocation(p, xi, channels, lb.alpha_hat);
    js.report = total_rate(js.allocation, channels, config);
    js.report.converged = true;
    return js;
}

JointSolution source_only(const ChannelSet& channels, const SystemConfig& config,
                          const SolverOptions& opts) {
    const JointSolution eq = equal_power(channels, config);
    JointSolution js = solve_p_given_xi(channels, config, eq.allocation.xi_bar, opts);
    // The equal-power point is feasible for this program; never fall below it.
    return pick_better(std::move(js), eq);
}

JointSolution relay_only(const ChannelSet& channels, const SystemConfig& config,
                         const SolverOptions& opts) {
    config.validate();
    const dvec p = equal_power_p(config);
    JointSolution js = solve_xi_given_p(channels, config, p, opts, 256);
    return pick_better(std::move(js), equal_power(channels, config));
}

RateReport evaluate_with_residual_si(const Allocation& alloc, const ChannelSet& channels,
                                     const SystemConfig& config, double si_psd,
                                     bool rescale_to_budget) {
    if (alloc.size() != channels.size() || alloc.theta.size() != alloc.p.size())
        throw std::invalid_argument("allocation/channel size mismatch");
    const double df = config.delta_f();
    const double n0 = config.noise_psd_n0;
    cvec theta = alloc.theta;

    auto relay_power = [&](const cvec& th) {
        double q = 0.0;
        for (int k = 0; k < channels.size(); ++k) {
            q += std::norm(th[k]) *
                 (std::norm(channels.h_sr[k]) * alloc.p[k] + n0 + si_psd);
        }
        return q * df;
    };

    RateReport rep;
    rep.relay_power_used = relay_power(theta);
    if (rescale_to_budget && rep.relay_power_used > config.relay_budget_q &&
        rep.relay_power_used > 0.0) {
        const double s = std::sqrt(config.relay_budget_q / rep.relay_power_used);
        for (auto& t : theta) t *= s;
        rep.relay_power_used = relay_power(theta);
        rep.budget_adjusted = true;
    }

    rep.rate_density.resize(channels.size());
    double rate_sum = 0.0;
    double p_used = 0.0;
    for (int k = 0; k < channels.size(); ++k) {
        const cplx h = channels.h_sd[k] + channels.h_rd[k] * channels.h_sr[k] * theta[k];
        const double noise = std::norm(channels.h_rd[k] * theta[k]) * (n0 + si_psd) + n0;
        rep.rate_density[k] =
            0.5 * std::log1p(std::norm(h) * alloc.p[k] / noise) / kLn2;
        rate_sum += rep.rate_density[k];
        p_used += alloc.p[k];
    }
    rep.rate_bps_hz = rate_sum * df / config.bandwidth_w;
    rep.source_power_used = p_used * df;
    rep.converged = true;
    return rep;
}

Allocation conventional_design(const JointSolution& joint, const ChannelSet& channels) {
    const cvec no_loop(channels.size(), cplx{0.0, 0.0});
    return make_allocation(joint.allocation.p, joint.allocation.xi_bar, channels, no_loop);
}

RateReport conventional_sic(const ChannelSet& channels, const SystemConfig& config,
                            double zeta, const SolverOptions& opts) {
    SystemConfig design_cfg = config;
    design_cfg.loopback_alpha = 0.0;
    design_cfg.loopback_tau = 0.0;
    const JointSolution joint = ellipsoid_minimize(channels, design_cfg, opts);
    const Allocation design = conventional_design(joint, channels);
    const ResidualSiModel si =
        residual_si(config, zeta, config.loopback_alpha * config.loopback_alpha);
    return evaluate_with_residual_si(design, channels, config, si.si_psd);
}

}  // namespace ffrelay
