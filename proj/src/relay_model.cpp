#include "ffrelay/relay_model.hpp"

#include <cmath>
#include <stdexcept>

#include "ffrelay/errors.hpp"

namespace ffrelay {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void check_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string("size mismatch in ") + what);
}

double log2_1p(double x) { return std::log1p(x) / kLn2; }

}  // namespace

LoopbackResponse loopback_response(double alpha, double tau, const FrequencyGrid& grid) {
    if (alpha < 0.0 || alpha >= 1.0)
        throw std::invalid_argument("loop-back alpha must be in [0, 1)");
    LoopbackResponse lr;
    lr.alpha_hat.resize(grid.centers.size());
    for (std::size_t k = 0; k < grid.centers.size(); ++k) {
        lr.alpha_hat[k] = std::polar(alpha, -2.0 * M_PI * tau * grid.centers[k]);
    }
    return lr;
}

cvec effective_response(const cvec& h_sd, const cvec& h_sr, const cvec& h_rd,
                        const cvec& theta, const cvec& alpha_hat) {
    check_same_size(h_sd.size(), theta.size(), "effective_response");
    cvec out(h_sd.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const cplx den = 1.0 - alpha_hat[k] * theta[k];
        if (std::abs(den) < kSingularDenominator)
            throw SingularLoopError("feedback pole at bin " + std::to_string(k));
        out[k] = h_sd[k] + h_rd[k] * h_sr[k] * theta[k] / den;
    }
    return out;
}

dvec effective_noise_psd(const cvec& h_rd, const cvec& theta, const cvec& alpha_hat,
                         double n0) {
    check_same_size(h_rd.size(), theta.size(), "effective_noise_psd");
    dvec out(h_rd.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const cplx den = 1.0 - alpha_hat[k] * theta[k];
        if (std::abs(den) < kSingularDenominator)
            throw SingularLoopError("feedback pole at bin " + std::to_string(k));
        out[k] = (std::norm(h_rd[k] * theta[k] / den) + 1.0) * n0;
    }
    return out;
}

dvec relay_tx_psd(const cvec& theta, const cvec& alpha_hat, const cvec& h_sr,
                  const dvec& p, double n0) {
    check_same_size(theta.size(), p.size(), "relay_tx_psd");
    dvec out(theta.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const cplx den = 1.0 - alpha_hat[k] * theta[k];
        if (std::abs(den) < kSingularDenominator)
            throw SingularLoopError("feedback pole at bin " + std::to_string(k));
        out[k] = std::norm(theta[k] / den) * (std::norm(h_sr[k]) * p[k] + n0);
    }
    return out;
}

cvec theta_from_xi(const cvec& xi, const cvec& alpha_hat) {
    check_same_size(xi.size(), alpha_hat.size(), "theta_from_xi");
    cvec out(xi.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const cplx den = 1.0 + alpha_hat[k] * xi[k];
        if (std::abs(den) < kSingularDenominator)
            throw SingularLoopError("singular Xi->Theta mapping at bin " + std::to_string(k));
        out[k] = xi[k] / den;
    }
    return out;
}

cvec xi_from_theta(const cvec& theta, const cvec& alpha_hat) {
    check_same_size(theta.size(), alpha_hat.size(), "xi_from_theta");
    cvec out(theta.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const cplx den = 1.0 - alpha_hat[k] * theta[k];
        if (std::abs(den) < kSingularDenominator)
            throw SingularLoopError("singular Theta->Xi mapping at bin " + std::to_string(k));
        out[k] = theta[k] / den;
    }
    return out;
}

cvec align_phase(const dvec& xi_bar, const cvec& h_sd, const cvec& h_sr,
                 const cvec& h_rd) {
    check_same_size(xi_bar.size(), h_sd.size(), "align_phase");
    cvec out(xi_bar.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (xi_bar[k] < 0.0) throw std::invalid_argument("xi_bar must be >= 0");
        const cplx u = h_sd[k] * std::conj(h_rd[k]) * std::conj(h_sr[k]);
        const double mag = std::abs(u);
        // Vanishing channel product: the combining phase is undefined, keep 0.
        out[k] = mag > 0.0 ? xi_bar[k] * (u / mag) : cplx{xi_bar[k], 0.0};
    }
    return out;
}

dvec rate_density(const dvec& p, const cvec& theta, const ChannelSet& channels,
                  const cvec& alpha_hat, double n0) {
    const cvec h_eff = effective_response(channels.h_sd, channels.h_sr, channels.h_rd,
                                          theta, alpha_hat);
    const dvec noise = effective_noise_psd(channels.h_rd, theta, alpha_hat, n0);
    dvec out(p.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (p[k] < 0.0) throw std::invalid_argument("p must be >= 0");
        out[k] = 0.5 * log2_1p(std::norm(h_eff[k]) * p[k] / noise[k]);
    }
    return out;
}

dvec rate_density_reformulated(const dvec& p, const dvec& xi_bar,
                               const ChannelSet& channels, double n0) {
    check_same_size(p.size(), xi_bar.size(), "rate_density_reformulated");
    dvec out(p.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (p[k] < 0.0 || xi_bar[k] < 0.0)
            throw std::invalid_argument("p and xi_bar must be >= 0");
        const double xi = std::min(xi_bar[k], kXiBarMax);
        const double a = std::abs(channels.h_sd[k]);
        const double b = std::abs(channels.h_rd[k] * channels.h_sr[k]);
        const double c = std::norm(channels.h_rd[k]);
        // (a + b xi)^2 / (c xi^2 + 1) computed as a square of a ratio so the
        // intermediate stays in range for xi up to the clamp.
        const double amp = (a + b * xi) / std::sqrt(c * xi * xi + 1.0);
        out[k] = 0.5 * log2_1p(amp * amp * p[k] / n0);
    }
    return out;
}

Allocation make_allocation(const dvec& p, const dvec& xi_bar,
                           const ChannelSet& channels, const cvec& alpha_hat) {
    Allocation alloc;
    alloc.p = p;
    alloc.xi_bar = xi_bar;
    alloc.theta = theta_from_xi(align_phase(xi_bar, channels.h_sd, channels.h_sr, channels.h_rd),
                                alpha_hat);
    return alloc;
}

RateReport total_rate(const Allocation& alloc, const ChannelSet& channels,
                      const SystemConfig& config) {
    check_same_size(alloc.p.size(), channels.h_sd.size(), "total_rate");
    const double df = config.delta_f();
    RateReport report;
    report.rate_density = rate_density_reformulated(alloc.p, alloc.xi_bar, channels,
                                                    config.noise_psd_n0);
    double rate_sum = 0.0;
    double p_used = 0.0;
    double q_used = 0.0;
    for (int k = 0; k < alloc.size(); ++k) {
        rate_sum += report.rate_density[k];
        p_used += alloc.p[k];
        q_used += alloc.xi_bar[k] * alloc.xi_bar[k] *
                  (std::norm(channels.h_sr[k]) * alloc.p[k] + config.noise_psd_n0);
    }
    report.rate_bps_hz = rate_sum * df / config.bandwidth_w;
    report.source_power_used = p_used * df;
    report.relay_power_used = q_used * df;
    if (!alloc.theta.empty()) {
        const FrequencyGrid grid = build_grid(config);
        const LoopbackResponse lb =
            loopback_response(config.loopback_alpha, config.loopback_tau, grid);
        double g_max = 0.0;
        for (std::size_t k = 0; k < alloc.theta.size(); ++k) {
            g_max = std::max(g_max, std::abs(lb.alpha_hat[k] * alloc.theta[k]));
        }
        report.max_loop_gain = g_max;
    }
    return report;
}

}  // namespace ffrelay
