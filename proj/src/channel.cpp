#include "ffrelay/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace ffrelay {

void SystemConfig::validate() const {
    if (!(bandwidth_w > 0.0)) throw std::invalid_argument("bandwidth_w must be > 0");
    if (num_subchannels < 1) throw std::invalid_argument("num_subchannels must be >= 1");
    if (!(noise_psd_n0 > 0.0)) throw std::invalid_argument("noise_psd_n0 must be > 0");
    if (source_budget_p < 0.0 || relay_budget_q < 0.0)
        throw std::invalid_argument("power budgets must be >= 0");
    if (loopback_alpha < 0.0 || loopback_alpha >= 1.0)
        throw std::invalid_argument("loopback_alpha must be in [0, 1)");
    if (loopback_tau < 0.0) throw std::invalid_argument("loopback_tau must be >= 0");
    if (taps_sd < 1 || taps_sr < 1 || taps_rd < 1)
        throw std::invalid_argument("tap counts must be >= 1");
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    gen_.seed(seq);
}

double RandomStream::uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RandomStream::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 in (0,1] so the log is finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
}

cplx RandomStream::complex_gaussian(double variance) {
    if (variance <= 0.0) return {0.0, 0.0};
    const double s = std::sqrt(variance * 0.5);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }
double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double w_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
double dbm_per_hz_to_w_per_hz(double dbm_hz) { return std::pow(10.0, (dbm_hz - 30.0) / 10.0); }

FrequencyGrid build_grid(const SystemConfig& config) {
    config.validate();
    const int n = config.num_subchannels;
    FrequencyGrid grid;
    grid.delta_f = config.bandwidth_w / n;
    grid.centers.resize(n);
    const double f_lo = config.center_freq - 0.5 * config.bandwidth_w;
    for (int k = 0; k < n; ++k) {
        grid.centers[k] = f_lo + (k + 0.5) * grid.delta_f;
    }
    return grid;
}

TapVector sample_taps(int num_taps, double variance_db, double tap_spacing,
                      RandomStream& rng) {
    if (num_taps < 1) throw std::invalid_argument("num_taps must be >= 1");
    const double variance = std::isinf(variance_db) && variance_db < 0.0
                                ? 0.0
                                : db_to_linear(variance_db);
    TapVector tv;
    tv.tap_spacing = tap_spacing;
    tv.taps.resize(num_taps);
    for (auto& tap : tv.taps) tap = rng.complex_gaussian(variance);
    return tv;
}

cvec response_at(const TapVector& taps, const dvec& freqs_hz) {
    cvec out(freqs_hz.size());
    const int m_count = static_cast<int>(taps.taps.size());
    for (std::size_t k = 0; k < freqs_hz.size(); ++k) {
        cplx acc{0.0, 0.0};
        const double w = -2.0 * M_PI * freqs_hz[k] * taps.tap_spacing;
        for (int m = 0; m < m_count; ++m) {
            acc += taps.taps[m] * std::polar(1.0, w * m);
        }
        out[k] = acc;
    }
    return out;
}

cvec response_on_grid(const TapVector& taps, const FrequencyGrid& grid) {
    if (grid.centers.empty()) throw std::invalid_argument("grid must be nonempty");
    return response_at(taps, grid.centers);
}

ChannelTaps draw_channel_taps(const SystemConfig& config) {
    config.validate();
    const double spacing = 1.0 / config.bandwidth_w;
    ChannelTaps ct;
    RandomStream rng_sd(config.seed, 1);
    RandomStream rng_sr(config.seed, 2);
    RandomStream rng_rd(config.seed, 3);
    ct.sd = sample_taps(config.taps_sd, config.tap_var_db_sd, spacing, rng_sd);
    ct.sr = sample_taps(config.taps_sr, config.tap_var_db_sr, spacing, rng_sr);
    ct.rd = sample_taps(config.taps_rd, config.tap_var_db_rd, spacing, rng_rd);
    return ct;
}

ChannelSet channels_on_grid(const ChannelTaps& taps, const FrequencyGrid& grid) {
    ChannelSet cs;
    cs.h_sd = response_on_grid(taps.sd, grid);
    cs.h_sr = response_on_grid(taps.sr, grid);
    cs.h_rd = response_on_grid(taps.rd, grid);
    return cs;
}

ChannelSet draw_channels(const SystemConfig& config, const FrequencyGrid& grid) {
    return channels_on_grid(draw_channel_taps(config), grid);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ffrelay
