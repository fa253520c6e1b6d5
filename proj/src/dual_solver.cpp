#include "ffrelay/dual_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "ffrelay/errors.hpp"

namespace ffrelay {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kGoldenRatio = 0.6180339887498949;

double amp_ratio(const BinCoefficients& k, double xi) {
    return (k.a + k.b * xi) / std::sqrt(k.c * xi * xi + 1.0);
}

/// Rate density [bps/Hz] of one bin at (p, xi).
double bin_rate(const BinCoefficients& k, double p, double xi) {
    const double amp = amp_ratio(k, xi);
    return 0.5 * std::log1p(amp * amp * p / k.n0) / kLn2;
}

struct Usage {
    double source = 0.0;  ///< sum P df [W]
    double relay = 0.0;   ///< sum Xi^2 (g P + N0) df [W]
};

Usage usage_of(const std::vector<BinCoefficients>& coeffs, const dvec& p,
               const dvec& xi, double df) {
    Usage u;
    for (std::size_t i = 0; i < p.size(); ++i) {
        u.source += p[i];
        u.relay += xi[i] * xi[i] * (coeffs[i].g * p[i] + coeffs[i].n0);
    }
    u.source *= df;
    u.relay *= df;
    return u;
}

double rate_of(const std::vector<BinCoefficients>& coeffs, const dvec& p,
               const dvec& xi, double df, double w) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += bin_rate(coeffs[i], p[i], xi[i]);
    return sum * df / w;
}

/// Projects (p, xi) into the budget box: p scales linearly, then xi scales so
/// the relay usage (quadratic in xi at fixed p) lands on the budget.
void scale_to_fit(const std::vector<BinCoefficients>& coeffs, dvec& p, dvec& xi,
                  double df, double pbar, double qbar) {
    Usage u = usage_of(coeffs, p, xi, df);
    if (u.source > pbar) {
        const double s = pbar / u.source * (1.0 - 1e-15);
        for (auto& v : p) v *= s;
        u = usage_of(coeffs, p, xi, df);
    }
    if (u.relay > qbar) {
        const double s = u.relay > 0.0 ? std::sqrt(qbar / u.relay) * (1.0 - 1e-15) : 0.0;
        for (auto& v : xi) v *= s;
    }
}

/// 1-D maximization of the bin Lagrangian over xi at fixed source PSD:
///   (1/(2W)) log2(1 + snr(xi)) - price * xi^2 (g p + n0).
/// Log-spaced scan with golden refinement; robust against non-unimodality.
double maximize_xi_fixed_p(const BinCoefficients& k, double p, double price,
                           double xi_cap, int scan_points) {
    if (k.b <= 0.0 || p <= 0.0 || xi_cap <= 0.0) return 0.0;
    const double cost = price * (k.g * p + k.n0);
    auto f = [&](double xi) {
        return bin_rate(k, p, xi) / k.w - cost * xi * xi;
    };
    double best_xi = 0.0;
    double best_f = f(0.0);
    int best_idx = -1;
    dvec grid(scan_points);
    const double lo_ratio = 1e-8;
    for (int i = 0; i < scan_points; ++i) {
        grid[i] = xi_cap * lo_ratio * std::pow(1.0 / lo_ratio, double(i) / (scan_points - 1));
        const double fi = f(grid[i]);
        if (fi > best_f) {
            best_f = fi;
            best_xi = grid[i];
            best_idx = i;
        }
    }
    double lo = best_idx <= 0 ? 0.0 : grid[best_idx - 1];
    double hi = (best_idx < 0) ? grid[0]
                               : (best_idx == scan_points - 1 ? xi_cap : grid[best_idx + 1]);
    double x1 = hi - kGoldenRatio * (hi - lo);
    double x2 = lo + kGoldenRatio * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int i = 0; i < 60; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGoldenRatio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGoldenRatio * (hi - lo);
            f1 = f(x1);
        }
    }
    const double xm = 0.5 * (lo + hi);
    if (f(xm) > best_f) best_xi = xm;
    return best_xi;
}

struct EllipsoidOutcome {
    DualPoint best_point;
    double best_value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool stopped_early = false;
};

/// Central-cut ellipsoid minimization over {mu > 0, lambda >= 0}.
/// eval must return {value, {g_mu, g_lambda}}; stop() is polled after every
/// objective evaluation.
EllipsoidOutcome run_ellipsoid(
    double mu0, double la0, double radius, int max_iter,
    const std::function<std::pair<double, std::array<double, 2>>(double, double)>& eval,
    const std::function<bool()>& stop) {
    EllipsoidOutcome out;
    out.best_point = {mu0, la0};
    double c[2] = {mu0, la0};
    double P[2][2] = {{radius * radius, 0.0}, {0.0, radius * radius}};
    const double det0 = P[0][0] * P[1][1];
    for (int iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter + 1;
        double g[2];
        if (c[0] <= 0.0) {
            g[0] = -1.0;
            g[1] = 0.0;
        } else if (c[1] < 0.0) {
            g[0] = 0.0;
            g[1] = -1.0;
        } else {
            auto [val, sg] = eval(c[0], c[1]);
            if (val < out.best_value) {
                out.best_value = val;
                out.best_point = {c[0], c[1]};
            }
            if (stop()) {
                out.stopped_early = true;
                break;
            }
            g[0] = sg[0];
            g[1] = sg[1];
            if (g[0] == 0.0 && g[1] == 0.0) break;
        }
        const double pg0 = P[0][0] * g[0] + P[0][1] * g[1];
        const double pg1 = P[1][0] * g[0] + P[1][1] * g[1];
        const double gpg = g[0] * pg0 + g[1] * pg1;
        if (!(gpg > 0.0)) break;
        const double s = std::sqrt(gpg);
        const double gt0 = pg0 / s;
        const double gt1 = pg1 / s;
        c[0] -= gt0 / 3.0;
        c[1] -= gt1 / 3.0;
        const double f = 4.0 / 3.0;
        const double h = 2.0 / 3.0;
        double p00 = f * (P[0][0] - h * gt0 * gt0);
        double p01 = f * (P[0][1] - h * gt0 * gt1);
        double p11 = f * (P[1][1] - h * gt1 * gt1);
        P[0][0] = p00;
        P[0][1] = P[1][0] = p01;
        P[1][1] = p11;
        const double det = P[0][0] * P[1][1] - P[0][1] * P[1][0];
        if (!(P[0][0] > 0.0) || !(det > 0.0)) break;
        if (std::sqrt(det / det0) < 1e-24) break;
    }
    return out;
}

RateReport report_for(const Allocation& alloc, const ChannelSet& channels,
                      const SystemConfig& config, double best_dual, int iterations,
                      bool adjusted, double gap_tol) {
    RateReport rep = total_rate(alloc, channels, config);
    rep.iterations = iterations;
    rep.budget_adjusted = adjusted;
    if (rep.rate_bps_hz > 0.0 && std::isfinite(best_dual)) {
        rep.duality_gap_rel = (best_dual - rep.rate_bps_hz) / rep.rate_bps_hz;
    } else {
        rep.duality_gap_rel = 0.0;
    }
    rep.converged = rep.duality_gap_rel <= gap_tol;
    return rep;
}

void check_inputs(const ChannelSet& channels, const SystemConfig& config) {
    config.validate();
    if (channels.size() != config.num_subchannels ||
        channels.h_sr.size() != channels.h_sd.size() ||
        channels.h_rd.size() != channels.h_sd.size())
        throw std::invalid_argument("channel vectors must match num_subchannels");
}

}  // namespace

DualEval dual_value(const DualPoint& duals, const ChannelSet& channels,
                    const SystemConfig& config) {
    check_inputs(channels, config);
    if (duals.mu <= 0.0 || duals.lambda < 0.0)
        throw DegenerateDualError("dual_value requires mu > 0 and lambda >= 0");
    const double df = config.delta_f();
    const double n0 = config.noise_psd_n0;
    const auto coeffs = bin_coefficients(channels, n0, config.bandwidth_w);
    const double xi_hint =
        config.relay_budget_q > 0.0
            ? 10.0 * std::sqrt(config.relay_budget_q / (df * n0))
            : 0.0;
    DualEval ev;
    ev.bins.resize(coeffs.size());
    double vsum = 0.0;
    double used_p = 0.0;
    double used_q = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        ev.bins[i] = solve_bin_exact(coeffs[i], duals.mu, duals.lambda, xi_hint);
        vsum += ev.bins[i].value;
        used_p += ev.bins[i].p_star;
        used_q += ev.bins[i].xi_star * ev.bins[i].xi_star *
                  (coeffs[i].g * ev.bins[i].p_star + n0);
    }
    ev.value = vsum * df + duals.mu * config.source_budget_p +
               duals.lambda * config.relay_budget_q;
    ev.subgrad[0] = config.source_budget_p - used_p * df;
    ev.subgrad[1] = config.relay_budget_q - used_q * df;
    return ev;
}

Allocation recover_primal(const DualPoint& duals, const std::vector<BinSolution>& bins,
                          const ChannelSet& channels, const SystemConfig& config,
                          bool* adjusted) {
    check_inputs(channels, config);
    const double df = config.delta_f();
    const double pbar = config.source_budget_p;
    const double qbar = config.relay_budget_q;
    const auto coeffs = bin_coefficients(channels, config.noise_psd_n0, config.bandwidth_w);
    dvec p(bins.size()), xi(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) {
        p[i] = bins[i].p_star;
        xi[i] = bins[i].xi_star;
    }
    Usage u = usage_of(coeffs, p, xi, df);
    bool adj = false;
    if (u.source > pbar * (1.0 + 1e-9) || u.relay > qbar * (1.0 + 1e-9)) {
        adj = true;
        if (u.source > pbar && u.source > 0.0) {
            const double s = pbar / u.source;
            for (auto& v : p) v *= s;
        }
        // One bin-wise re-solve of the amplitudes at the fixed duals.
        for (std::size_t i = 0; i < xi.size(); ++i) {
            const double cap =
                qbar > 0.0
                    ? std::sqrt(qbar / (df * (coeffs[i].g * p[i] + coeffs[i].n0)))
                    : 0.0;
            xi[i] = maximize_xi_fixed_p(coeffs[i], p[i], duals.lambda, cap, 96);
        }
        u = usage_of(coeffs, p, xi, df);
        if (u.relay > qbar) {
            const double s = u.relay > 0.0 ? std::sqrt(qbar / u.relay) * (1.0 - 1e-12) : 0.0;
            for (auto& v : xi) v *= s;
        }
    }
    if (adjusted) *adjusted = adj;
    const FrequencyGrid grid = build_grid(config);
    const LoopbackResponse lb =
        loopback_response(config.loopback_alpha, config.loopback_tau, grid);
    return make_allocation(p, xi, channels, lb.alpha_hat);
}

JointSolution solve_p_given_xi(const ChannelSet& channels, const SystemConfig& config,
                               const dvec& xi_bar, const SolverOptions& opts) {
    check_inputs(channels, config);
    if (static_cast<int>(xi_bar.size()) != channels.size())
        throw std::invalid_argument("xi_bar size mismatch");
    const double df = config.delta_f();
    const double w = config.bandwidth_w;
    const double n0 = config.noise_psd_n0;
    const double pbar = config.source_budget_p;
    const double qbar = config.relay_budget_q;
    const auto coeffs = bin_coefficients(channels, n0, w);
    const FrequencyGrid grid = build_grid(config);
    const LoopbackResponse lb =
        loopback_response(config.loopback_alpha, config.loopback_tau, grid);

    double noise_fwd = 0.0;
    for (std::size_t i = 0; i < xi_bar.size(); ++i)
        noise_fwd += xi_bar[i] * xi_bar[i] * n0 * df;
    if (noise_fwd > qbar * (1.0 + 1e-12))
        throw InfeasibleRelayBudgetError(
            "frozen relay amplitudes exceed the relay budget on noise forwarding alone");
    const double q_sig = std::max(0.0, qbar - noise_fwd);

    JointSolution js;
    js.allocation.xi_bar = xi_bar;
    if (pbar <= 0.0) {
        js.allocation.p.assign(xi_bar.size(), 0.0);
        js.allocation =
            make_allocation(js.allocation.p, xi_bar, channels, lb.alpha_hat);
        js.report = report_for(js.allocation, channels, config, 0.0, 0, false, opts.gap_tol);
        return js;
    }

    auto fill_p = [&](double mu, double la, dvec& p) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = chi(xi_bar[i], coeffs[i], mu, la);
    };
    auto source_used = [&](const dvec& p) {
        double s = 0.0;
        for (double v : p) s += v;
        return s * df;
    };
    auto relay_sig_used = [&](const dvec& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            s += xi_bar[i] * xi_bar[i] * coeffs[i].g * p[i];
        return s * df;
    };

    dvec p(xi_bar.size(), 0.0);

    // Water-filling with the relay constraint ignored; exact when it ends slack.
    {
        double mu_lo = 1e-300;
        double mu_hi = 1.0 / (2.0 * kLn2 * pbar);
        fill_p(mu_hi, 0.0, p);
        while (source_used(p) > pbar) {
            mu_hi *= 8.0;
            fill_p(mu_hi, 0.0, p);
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (mu_lo + mu_hi);
            fill_p(mid, 0.0, p);
            if (source_used(p) > pbar)
                mu_lo = mid;
            else
                mu_hi = mid;
            if (mu_hi - mu_lo <= 1e-15 * mu_hi) break;
        }
        fill_p(mu_hi, 0.0, p);
        if (relay_sig_used(p) <= q_sig * (1.0 + 1e-12) || q_sig == 0.0) {
            if (q_sig == 0.0) {
                // Bins the relay listens to must stay silent.
                for (std::size_t i = 0; i < p.size(); ++i)
                    if (xi_bar[i] * xi_bar[i] * coeffs[i].g > 0.0) p[i] = 0.0;
            }
            const Usage u = usage_of(coeffs, p, const_cast<dvec&>(xi_bar), df);
            (void)u;
            js.allocation = make_allocation(p, xi_bar, channels, lb.alpha_hat);
            js.duals = {mu_hi, 0.0};
            js.report =
                report_for(js.allocation, channels, config, rate_of(coeffs, p, xi_bar, df, w),
                           1, false, opts.gap_tol);
            js.report.duality_gap_rel = 0.0;
            js.report.converged = true;
            return js;
        }
    }

    // Both constraints active: 2-D dual, tracked feasible primal.
    double best_rate = -1.0;
    dvec best_p;
    double best_dual = std::numeric_limits<double>::infinity();
    const double mu0 = 1.0 / (2.0 * kLn2 * pbar);
    const double la0 = 1.0 / (2.0 * kLn2 * std::max(q_sig, 1e-12 * qbar + 1e-300));
    auto eval = [&](double mu, double la) {
        dvec pc(xi_bar.size());
        fill_p(mu, la, pc);
        double vsum = 0.0;
        for (std::size_t i = 0; i < pc.size(); ++i)
            vsum += v_value(xi_bar[i], coeffs[i], mu, la);
        const double up = source_used(pc);
        const double uq = relay_sig_used(pc);
        const double value = vsum * df + mu * pbar + la * q_sig;
        best_dual = std::min(best_dual, value);
        double s = 1.0;
        if (up > pbar && up > 0.0) s = std::min(s, pbar / up);
        if (uq > q_sig && uq > 0.0) s = std::min(s, q_sig / uq);
        if (s < 1.0)
            for (auto& v : pc) v *= s * (1.0 - 1e-15);
        const double r = rate_of(coeffs, pc, xi_bar, df, w);
        if (r > best_rate) {
            best_rate = r;
            best_p = pc;
        }
        return std::make_pair(value, std::array<double, 2>{pbar - up, q_sig - uq});
    };
    auto stop = [&]() {
        return best_rate > 0.0 && best_dual - best_rate <= 1e-11 * best_rate;
    };
    EllipsoidOutcome out = run_ellipsoid(mu0, la0, opts.radius_scale * std::max(mu0, la0),
                                         std::max(opts.max_iter, 300), eval, stop);
    js.allocation = make_allocation(best_p, xi_bar, channels, lb.alpha_hat);
    js.duals = {out.best_point.mu, out.best_point.lambda};
    js.report = report_for(js.allocation, channels, config, out.best_value, out.iterations,
                           false, opts.gap_tol);
    return js;
}

JointSolution solve_xi_given_p(const ChannelSet& channels, const SystemConfig& config,
                               const dvec& p, const SolverOptions& opts,
                               int scan_points) {
    check_inputs(channels, config);
    if (static_cast<int>(p.size()) != channels.size())
        throw std::invalid_argument("p size mismatch");
    const double df = config.delta_f();
    const double w = config.bandwidth_w;
    const double n0 = config.noise_psd_n0;
    const double qbar = config.relay_budget_q;
    const auto coeffs = bin_coefficients(channels, n0, w);
    const FrequencyGrid grid = build_grid(config);
    const LoopbackResponse lb =
        loopback_response(config.loopback_alpha, config.loopback_tau, grid);

    JointSolution js;
    if (qbar <= 0.0) {
        js.allocation = make_allocation(p, dvec(p.size(), 0.0), channels, lb.alpha_hat);
        js.report = report_for(js.allocation, channels, config, 0.0, 0, false, opts.gap_tol);
        js.report.duality_gap_rel = 0.0;
        js.report.converged = true;
        return js;
    }

    auto caps = [&](std::size_t i) {
        return std::sqrt(qbar / (df * (coeffs[i].g * p[i] + coeffs[i].n0)));
    };
    auto solve_at = [&](double la, dvec& xi) {
        double used = 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i) {
            xi[i] = maximize_xi_fixed_p(coeffs[i], p[i], la, caps(i), scan_points);
            used += xi[i] * xi[i] * (coeffs[i].g * p[i] + coeffs[i].n0);
        }
        return used * df;
    };

    double best_rate = -1.0;
    dvec best_xi(p.size(), 0.0);
    auto consider = [&](dvec xi, double used) {
        if (used > qbar) {
            const double s = std::sqrt(qbar / used) * (1.0 - 1e-15);
            for (auto& v : xi) v *= s;
        }
        const double r = rate_of(coeffs, p, xi, df, w);
        if (r > best_rate) {
            best_rate = r;
            best_xi = xi;
        }
    };

    dvec xi(p.size(), 0.0);
    double used = solve_at(0.0, xi);
    consider(xi, used);
    double la_final = 0.0;
    int iters = 1;
    if (used > qbar) {
        double la_lo = 0.0;
        double la_hi = 1.0 / (2.0 * kLn2 * qbar);
        double used_hi = solve_at(la_hi, xi);
        consider(xi, used_hi);
        ++iters;
        while (used_hi > qbar && la_hi < 1e30) {
            la_hi *= 8.0;
            used_hi = solve_at(la_hi, xi);
            consider(xi, used_hi);
            ++iters;
        }
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (la_lo + la_hi);
            const double um = solve_at(mid, xi);
            consider(xi, um);
            ++iters;
            if (um > qbar)
                la_lo = mid;
            else
                la_hi = mid;
        }
        la_final = la_hi;
    }
    js.allocation = make_allocation(p, best_xi, channels, lb.alpha_hat);
    js.duals = {0.0, la_final};
    js.report = report_for(js.allocation, channels, config,
                           std::numeric_limits<double>::quiet_NaN(), iters, false,
                           opts.gap_tol);
    js.report.duality_gap_rel = 0.0;
    js.report.converged = true;
    return js;
}

JointSolution ellipsoid_minimize(const ChannelSet& channels, const SystemConfig& config,
                                 const SolverOptions& opts,
                                 const std::vector<Allocation>* seed_candidates) {
    check_inputs(channels, config);
    const double df = config.delta_f();
    const double w = config.bandwidth_w;
    const double n0 = config.noise_psd_n0;
    const double pbar = config.source_budget_p;
    const double qbar = config.relay_budget_q;
    const auto coeffs = bin_coefficients(channels, n0, w);
    const int n = channels.size();
    const FrequencyGrid grid = build_grid(config);
    const LoopbackResponse lb =
        loopback_response(config.loopback_alpha, config.loopback_tau, grid);

    JointSolution js;
    if (pbar <= 0.0) {
        js.allocation = make_allocation(dvec(n, 0.0), dvec(n, 0.0), channels, lb.alpha_hat);
        js.report = total_rate(js.allocation, channels, config);
        js.report.converged = true;
        return js;
    }
    if (qbar <= 0.0) {
        js = solve_p_given_xi(channels, config, dvec(n, 0.0), opts);
        return js;
    }

    double best_dual = std::numeric_limits<double>::infinity();
    double best_rate = -1.0;
    dvec best_p, best_xi;
    std::vector<BinSolution> best_bins;
    DualPoint best_duals;

    auto consider = [&](dvec p, dvec xi) {
        scale_to_fit(coeffs, p, xi, df, pbar, qbar);
        const double r = rate_of(coeffs, p, xi, df, w);
        if (r > best_rate) {
            best_rate = r;
            best_p = std::move(p);
            best_xi = std::move(xi);
        }
    };

    auto eval = [&](double mu, double la) {
        DualEval ev = dual_value({mu, la}, channels, config);
        if (ev.value < best_dual) {
            best_dual = ev.value;
            best_duals = {mu, la};
            best_bins = ev.bins;
        }
        dvec p(n), xi(n);
        for (int i = 0; i < n; ++i) {
            p[i] = ev.bins[i].p_star;
            xi[i] = ev.bins[i].xi_star;
        }
        consider(std::move(p), std::move(xi));
        return std::make_pair(ev.value, std::array<double, 2>{ev.subgrad[0], ev.subgrad[1]});
    };
    auto stop = [&]() {
        return best_rate > 0.0 && best_dual - best_rate <= opts.gap_tol * best_rate;
    };

    const double mu0 = 1.0 / (2.0 * kLn2 * pbar);
    const double la0 = 1.0 / (2.0 * kLn2 * qbar);
    EllipsoidOutcome out = run_ellipsoid(mu0, la0, opts.radius_scale * std::max(mu0, la0),
                                         opts.max_iter, eval, stop);

    bool adjusted = false;
    if (!best_bins.empty()) {
        Allocation rec = recover_primal(best_duals, best_bins, channels, config, &adjusted);
        consider(rec.p, rec.xi_bar);
    }
    if (seed_candidates) {
        for (const Allocation& cand : *seed_candidates) {
            if (static_cast<int>(cand.p.size()) == n) consider(cand.p, cand.xi_bar);
        }
    }
    if (opts.polish && best_rate > 0.0) {
        {
            JointSolution xs = solve_xi_given_p(channels, config, best_p, opts, 96);
            consider(xs.allocation.p, xs.allocation.xi_bar);
        }
        {
            JointSolution ps = solve_p_given_xi(channels, config, best_xi, opts);
            consider(ps.allocation.p, ps.allocation.xi_bar);
        }
    }

    js.allocation = make_allocation(best_p, best_xi, channels, lb.alpha_hat);
    js.duals = best_duals;
    js.report = report_for(js.allocation, channels, config, best_dual, out.iterations,
                           adjusted, opts.gap_tol);
    return js;
}

}  // namespace ffrelay
