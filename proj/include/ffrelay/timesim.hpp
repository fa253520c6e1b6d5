#pragma once

#include "ffrelay/channel.hpp"

namespace ffrelay {

/// One feedback-loop simulation setup, critically sampled complex baseband
/// (sample_rate = occupied bandwidth). Channel taps must be sample-spaced
/// (tap_spacing = 1/sample_rate).
struct SimScenario {
    double sample_rate = 0.0;   ///< [Hz]
    long num_samples = 0;       ///< samples kept after warmup
    long warmup_samples = 0;    ///< discarded while the loop settles
    int delay_samples = 1;      ///< loop-back delay D = round(tau * sample_rate), >= 1
    cvec filter_taps;           ///< relay filter impulse response theta[n]
    TapVector h_sd;
    TapVector h_sr;
    TapVector h_rd;
    double alpha = 0.0;
    double noise_psd = 0.0;     ///< N0 at both receivers [W/Hz]
    dvec source_psd;            ///< size 1: flat; size M: shaped via an M-tap FIR
};

struct SignalRecords {
    cvec s;
    cvec x;
    cvec y;
    double sample_rate = 0.0;
};

/// Welch cross-/auto-spectral estimates on segment_len bins.
struct SpectralEstimate {
    dvec freqs;               ///< bin frequencies [Hz], negative half wrapped
    cvec transfer;            ///< cross-spectrum ratio S_ys / S_ss per bin
    dvec noise_psd_at_d;      ///< PSD of y [W/Hz] (noise PSD when s is silenced)
    dvec relay_tx_psd;        ///< PSD of x [W/Hz]
    int num_averages = 0;
};

/// Closed-form per-bin predictions for a scenario, evaluated at the same bin
/// frequencies the estimator reports.
struct LoopClosedForm {
    dvec freqs;
    cvec theta;
    cvec alpha_hat;
    cvec h_eff;          ///< effective source->destination response
    dvec noise_psd_d;    ///< effective noise PSD at the destination [W/Hz]
    dvec relay_tx_psd;   ///< PSD of the relay transmit signal [W/Hz]
};

/// In-place radix-2 FFT (size must be a power of two).
void fft_inplace(cvec& a, bool inverse);

/// Direct DFT/IDFT of arbitrary length (O(N^2)); forward uses exp(-j2pi kn/N).
cvec dft_direct(const cvec& a, bool inverse);

/// Circular impulse response whose DFT reproduces theta_on_grid.
cvec filter_taps_from_response(const cvec& theta_on_grid);

/// Runs the sample-by-sample feedback recursion
///   r[n] = (h_SR (*) s)[n] + alpha x[n-D] + n_R[n],  x[n] = (theta (*) r)[n],
///   y[n] = (h_SD (*) s)[n] + (h_RD (*) x)[n] + n_D[n],
/// discarding the warmup. Throws DivergenceError if |x| exceeds 1e12.
SignalRecords simulate(const SimScenario& scenario, RandomStream& rng);

/// Hann-windowed Welch estimation with 50% overlap. Throws
/// InsufficientDataError when the records cannot supply num_segments segments.
SpectralEstimate estimate_transfer(const SignalRecords& records, int segment_len,
                                   int num_segments);

/// Closed-form loop quantities on the estimator's bin grid. source_psd_flat is
/// the (flat) source PSD used in the relay transmit PSD.
LoopClosedForm closed_form_on_bins(const SimScenario& scenario, int nbins,
                                   double source_psd_flat);

/// max_k |alpha_hat(f_k) Theta(f_k)| on nbins bins; fixtures require < 0.95.
double loop_gain_max(const SimScenario& scenario, int nbins);

}  // namespace ffrelay
