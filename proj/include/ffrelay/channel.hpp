#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace ffrelay {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using dvec = std::vector<double>;

/// Physical and budget parameters of one relay-channel instance.
///
/// All internal computation is in linear units (W, W/Hz); the dB-scale
/// helpers below are only used at the config/report boundary.
struct SystemConfig {
    double bandwidth_w = 10.24e6;   ///< total bandwidth W [Hz]
    double center_freq = 0.0;       ///< band center f_c [Hz] (0 = baseband equivalent)
    int num_subchannels = 256;      ///< N frequency bins
    double noise_psd_n0 = 3.1622776601683792e-18;  ///< N0 [W/Hz] (-145 dBm/Hz)
    double source_budget_p = 1.0;   ///< source transmit power budget [W]
    double relay_budget_q = 1.0;    ///< relay transmit power budget [W]
    double loopback_alpha = 0.5;    ///< loop-back attenuation, in [0,1)
    double loopback_tau = 0.0;      ///< loop-back delay [s], >= 0
    std::uint64_t seed = 1;

    // Channel generation (tap counts / per-tap variances in dB).
    // The tap spacing is 1/bandwidth_w unless overridden.
    int taps_sd = 8;
    int taps_sr = 8;
    int taps_rd = 8;
    double tap_var_db_sd = -110.0;
    double tap_var_db_sr = -100.0;
    double tap_var_db_rd = -100.0;

    double delta_f() const { return bandwidth_w / num_subchannels; }

    /// Throws std::invalid_argument when a field is out of its domain.
    void validate() const;
};

/// Uniform partition of [f_c - W/2, f_c + W/2] into N bins (midpoint centers).
struct FrequencyGrid {
    dvec centers;     ///< bin center frequencies [Hz]
    double delta_f = 0.0;

    int size() const { return static_cast<int>(centers.size()); }
};

/// Tapped-delay-line impulse response, taps[m] at delay m * tap_spacing.
struct TapVector {
    cvec taps;
    double tap_spacing = 0.0;  ///< [s]
};

/// The three link responses sampled on a common frequency grid.
struct ChannelSet {
    cvec h_sd;
    cvec h_sr;
    cvec h_rd;

    int size() const { return static_cast<int>(h_sd.size()); }
};

/// Raw tap-domain channels (kept around so the time-domain simulator can
/// reuse exactly the draws the frequency-domain solver saw).
struct ChannelTaps {
    TapVector sd;
    TapVector sr;
    TapVector rd;
};

/// Deterministic random stream: mt19937_64 plus a hand-rolled Box-Muller,
/// so that a given (seed, stream) pair produces bit-identical draws on a
/// given build regardless of standard-library distribution internals.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64() { return gen_(); }
    /// Uniform in [0, 1).
    double uniform01();
    /// Standard normal draw.
    double gaussian();
    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    cplx complex_gaussian(double variance);

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// -- dB-scale unit boundary ------------------------------------------------

double db_to_linear(double db);
double linear_to_db(double x);
double dbm_to_w(double dbm);
double w_to_dbm(double w);
double dbm_per_hz_to_w_per_hz(double dbm_hz);

// -- grid / channel construction --------------------------------------------

/// N midpoint bin centers over [f_c - W/2, f_c + W/2]; sum of delta_f == W.
FrequencyGrid build_grid(const SystemConfig& config);

/// num_taps circularly-symmetric complex Gaussian taps, each with total
/// variance 10^(variance_db/10). variance_db = -inf yields zero taps.
TapVector sample_taps(int num_taps, double variance_db, double tap_spacing,
                      RandomStream& rng);

/// H(f) = sum_m taps[m] * exp(-j 2 pi f m tap_spacing) at each frequency.
cvec response_at(const TapVector& taps, const dvec& freqs_hz);
cvec response_on_grid(const TapVector& taps, const FrequencyGrid& grid);

/// Draws the three tapped channels from config.seed (streams 1..3).
ChannelTaps draw_channel_taps(const SystemConfig& config);
ChannelSet channels_on_grid(const ChannelTaps& taps, const FrequencyGrid& grid);
ChannelSet draw_channels(const SystemConfig& config, const FrequencyGrid& grid);

/// splitmix64 step; used to derive per-trial seeds from the base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace ffrelay
