#include "ffrelay/subproblem.hpp"

#include <algorithm>
#include <cmath>

#include "ffrelay/errors.hpp"
#include "ffrelay/relay_model.hpp"

namespace ffrelay {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kDualFloor = 1e-15;
constexpr double kGoldenRatio = 0.6180339887498949;

double two_ln2_w(const BinCoefficients& k) { return 2.0 * kLn2 * k.w; }

double price(const BinCoefficients& k, double xi, double mu, double lambda) {
    return mu + lambda * k.g * xi * xi;
}

// Sign of d(beta)/d(xi) without forming the quotient: numerator of the
// derivative of n/d with n = (a + b xi)^2, d = (mu + lambda g xi^2)(c xi^2 + 1) n0.
double beta_derivative_sign(const BinCoefficients& k, double xi, double mu,
                            double lambda) {
    const double amp = k.a + k.b * xi;
    const double m = mu + lambda * k.g * xi * xi;
    const double q = k.c * xi * xi + 1.0;
    const double n = amp * amp;
    const double dn = 2.0 * k.b * amp;
    const double dd = 2.0 * lambda * k.g * xi * q + m * 2.0 * k.c * xi;
    return dn * (m * q) - n * dd;
}

struct Bracket {
    double lo;
    double hi;
};

// Golden-section maximization of f on [lo, hi]; returns the final bracket.
template <typename F>
Bracket golden_max(F&& f, double lo, double hi, int iters) {
    double x1 = hi - kGoldenRatio * (hi - lo);
    double x2 = lo + kGoldenRatio * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
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
    return {lo, hi};
}

double effective_mu(const BinCoefficients& k, double mu, double lambda) {
    if (mu > 0.0) return mu;
    if (mu < 0.0) throw DegenerateDualError("mu must be >= 0");
    // mu == 0: the bin water level is unbounded unless the relay price is
    // active everywhere; keep a strictly positive floor.
    if (lambda > 0.0 && k.g > 0.0) return kDualFloor;
    throw DegenerateDualError("beta unbounded: mu = 0 with no relay price");
}

}  // namespace

BinCoefficients bin_coefficients(cplx h_sd, cplx h_sr, cplx h_rd, double n0, double w) {
    BinCoefficients k;
    k.a = std::abs(h_sd);
    k.b = std::abs(h_rd * h_sr);
    k.c = std::norm(h_rd);
    k.g = std::norm(h_sr);
    k.n0 = n0;
    k.w = w;
    return k;
}

std::vector<BinCoefficients> bin_coefficients(const ChannelSet& channels, double n0,
                                              double w) {
    std::vector<BinCoefficients> out(channels.size());
    for (int i = 0; i < channels.size(); ++i) {
        out[i] = bin_coefficients(channels.h_sd[i], channels.h_sr[i], channels.h_rd[i],
                                  n0, w);
    }
    return out;
}

double beta(double xi_bar, const BinCoefficients& k, double mu, double lambda) {
    const double m = price(k, xi_bar, mu, lambda);
    if (m <= 0.0)
        throw DegenerateDualError("beta denominator vanished (mu = 0, lambda g xi^2 = 0)");
    const double amp = k.a + k.b * xi_bar;
    return amp * amp / (m * (k.c * xi_bar * xi_bar + 1.0) * k.n0);
}

double chi(double xi_bar, const BinCoefficients& k, double mu, double lambda) {
    const double m = price(k, xi_bar, mu, lambda);
    if (m <= 0.0)
        throw DegenerateDualError("chi denominator vanished (mu = 0, lambda g xi^2 = 0)");
    const double amp = k.a + k.b * xi_bar;
    if (amp <= 0.0) return 0.0;
    const double level = 1.0 / (two_ln2_w(k) * m);
    const double floor = (k.c * xi_bar * xi_bar + 1.0) * k.n0 / (amp * amp);
    return std::max(0.0, level - floor);
}

double v_value(double xi_bar, const BinCoefficients& k, double mu, double lambda) {
    const double bw = beta(xi_bar, k, mu, lambda);
    const double threshold = two_ln2_w(k);
    if (bw <= threshold) return 0.0;
    return 0.5 / k.w * std::log2(bw / threshold) - 1.0 / threshold + 1.0 / bw;
}

double maximize_beta(const BinCoefficients& k, double mu, double lambda,
                     double xi_hint) {
    if (k.b <= 0.0) return 0.0;  // beta nonincreasing; smallest maximizer
    const double mu_eff = effective_mu(k, mu, lambda);

    // With no relay price the Rayleigh-quotient form has a closed stationary
    // point at b/(a c); a = 0 pushes the maximizer to the cap.
    if (lambda * k.g <= 0.0) {
        if (k.a <= 0.0) return kXiBarMax;
        return std::min(k.b / (k.a * k.c), kXiBarMax);
    }

    auto f = [&](double xi) { return beta(xi, k, mu_eff, lambda); };

    double hi = std::max({k.b / (k.a * k.c + kDualFloor), std::sqrt(mu_eff / (lambda * k.g)),
                          xi_hint, 1.0});
    hi = std::min(hi, kXiBarMax);
    while (hi < kXiBarMax && beta_derivative_sign(k, hi, mu_eff, lambda) > 0.0) {
        hi = std::min(hi * 8.0, kXiBarMax);
    }

    Bracket br = golden_max(f, 0.0, hi, 48);

    // Derivative-sign bisection pins the stationary point inside the bracket.
    double lo = br.lo, up = br.hi;
    if (beta_derivative_sign(k, lo, mu_eff, lambda) >= 0.0 &&
        beta_derivative_sign(k, up, mu_eff, lambda) <= 0.0) {
        while (up - lo > 1e-10 * std::max(up, 1e-300)) {
            const double mid = 0.5 * (lo + up);
            if (beta_derivative_sign(k, mid, mu_eff, lambda) > 0.0)
                lo = mid;
            else
                up = mid;
        }
    }
    const double xi = 0.5 * (lo + up);
    // An endpoint can still win on plateaus; prefer the smallest amplitude.
    if (f(0.0) >= f(xi)) return 0.0;
    return xi;
}

BinSolution solve_bin(const BinCoefficients& k, double mu, double lambda,
                      double xi_hint) {
    const double mu_eff = effective_mu(k, mu, lambda);
    const double xi_beta = maximize_beta(k, mu_eff, lambda, xi_hint);
    BinSolution sol;
    if (beta(xi_beta, k, mu_eff, lambda) > two_ln2_w(k)) {
        sol.xi_star = xi_beta;
    } else {
        sol.xi_star = 0.0;
    }
    sol.p_star = chi(sol.xi_star, k, mu_eff, lambda);
    sol.value = v_value(sol.xi_star, k, mu_eff, lambda);
    return sol;
}

BinSolution solve_bin_exact(const BinCoefficients& k, double mu, double lambda,
                            double xi_hint) {
    const double mu_eff = effective_mu(k, mu, lambda);
    const double xi_beta = maximize_beta(k, mu_eff, lambda, xi_hint);
    BinSolution sol;
    if (beta(xi_beta, k, mu_eff, lambda) <= two_ln2_w(k)) {
        return sol;  // water level below the floor everywhere: all-zero bin
    }
    if (lambda * k.n0 <= 0.0 || xi_beta <= 0.0) {
        sol.xi_star = xi_beta;
        sol.p_star = chi(xi_beta, k, mu_eff, lambda);
        sol.value = v_value(xi_beta, k, mu_eff, lambda);
        return sol;
    }

    // The noise-forwarding charge only pulls the maximizer left of the beta
    // peak (beta, hence v_value, decreases to its right while the penalty
    // keeps growing). Coarse scan plus golden refinement over [0, xi_beta].
    auto f = [&](double xi) {
        return v_value(xi, k, mu_eff, lambda) - lambda * k.n0 * xi * xi;
    };
    constexpr int kScan = 56;
    double best_xi = 0.0;
    double best_f = f(0.0);
    double prev = 0.0;
    int best_idx = -1;
    dvec grid(kScan);
    const double lo_ratio = 1e-7;
    for (int i = 0; i < kScan; ++i) {
        grid[i] = xi_beta * lo_ratio * std::pow(1.0 / lo_ratio, double(i) / (kScan - 1));
        const double fi = f(grid[i]);
        if (fi > best_f) {
            best_f = fi;
            best_xi = grid[i];
            best_idx = i;
        }
        prev = fi;
    }
    (void)prev;
    double lo = best_idx <= 0 ? 0.0 : grid[best_idx - 1];
    double hi = (best_idx < 0 || best_idx == kScan - 1) ? xi_beta : grid[best_idx + 1];
    if (best_idx < 0) hi = grid[0];
    Bracket br = golden_max(f, lo, hi, 60);
    const double xi_ref = 0.5 * (br.lo + br.hi);
    if (f(xi_ref) > best_f) {
        best_f = f(xi_ref);
        best_xi = xi_ref;
    }
    sol.xi_star = best_xi;
    sol.p_star = chi(best_xi, k, mu_eff, lambda);
    sol.value = best_f;
    return sol;
}

}  // namespace ffrelay
