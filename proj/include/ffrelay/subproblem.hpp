#pragma once

#include "ffrelay/channel.hpp"

namespace ffrelay {

/// Per-bin channel constants entering the inner maximization.
struct BinCoefficients {
    double a = 0.0;   ///< |H_SD|
    double b = 0.0;   ///< |H_RD * H_SR|
    double c = 0.0;   ///< |H_RD|^2
    double g = 0.0;   ///< |H_SR|^2
    double n0 = 1.0;  ///< noise PSD [W/Hz]
    double w = 1.0;   ///< total bandwidth W [Hz] (carries the 1/(2W) rate weight)
};

BinCoefficients bin_coefficients(cplx h_sd, cplx h_sr, cplx h_rd, double n0, double w);
std::vector<BinCoefficients> bin_coefficients(const ChannelSet& channels, double n0,
                                              double w);

/// One bin's optimizer output. `value` is the per-bin Lagrangian density at
/// (p_star, xi_star): for solve_bin the price on relay power covers only the
/// forwarded-source term (the quantity v below), for solve_bin_exact it also
/// charges the forwarded receiver noise.
struct BinSolution {
    double p_star = 0.0;   ///< [W/Hz]
    double xi_star = 0.0;  ///< dimensionless, >= 0
    double value = 0.0;
};

/// beta(xi) = (a + b xi)^2 / ((mu + lambda g xi^2)(c xi^2 + 1) n0).
double beta(double xi_bar, const BinCoefficients& k, double mu, double lambda);

/// Water-filling level for the bin: chi(xi) =
/// max(0, 1/((2 ln2) W (mu + lambda g xi^2)) - (c xi^2 + 1) n0 / (a + b xi)^2).
double chi(double xi_bar, const BinCoefficients& k, double mu, double lambda);

/// Value of the bin objective at P = chi(xi): zero when beta(xi) <= (2 ln2) W,
/// otherwise (1/(2W)) log2(beta/((2 ln2) W)) - 1/((2 ln2) W) + 1/beta.
double v_value(double xi_bar, const BinCoefficients& k, double mu, double lambda);

/// Global maximizer of beta over [0, xi_cap]; 0 when b = 0 (beta nonincreasing).
/// Golden-section localization followed by derivative-sign bisection.
/// xi_hint, when > 0, widens the initial search bracket.
double maximize_beta(const BinCoefficients& k, double mu, double lambda,
                     double xi_hint = 0.0);

/// Two-case rule: xi* = argmax beta if max beta > (2 ln2) W, else 0; P* = chi(xi*);
/// value = v_value(xi*).
BinSolution solve_bin(const BinCoefficients& k, double mu, double lambda,
                      double xi_hint = 0.0);

/// Exact inner maximization of the full per-bin Lagrangian density
///   v_value(xi) - lambda n0 xi^2,
/// which additionally prices the relay power spent forwarding receiver noise.
/// solve_bin drops that term (its case split is only optimal without it);
/// the dual solver needs this variant so its value/subgradient pair is the
/// dual of the actual power-constrained problem.
BinSolution solve_bin_exact(const BinCoefficients& k, double mu, double lambda,
                            double xi_hint = 0.0);

}  // namespace ffrelay
