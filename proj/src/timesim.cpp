#include "ffrelay/timesim.hpp"

#include <cmath>
#include <stdexcept>

#include "ffrelay/errors.hpp"
#include "ffrelay/relay_model.hpp"

namespace ffrelay {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_sample_spaced(const TapVector& tv, double fs, const char* name) {
    if (std::abs(tv.tap_spacing * fs - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(name) +
                                    ": taps must be sample-spaced (spacing 1/sample_rate)");
}

dvec bin_freqs(int nbins, double fs) {
    dvec f(nbins);
    for (int k = 0; k < nbins; ++k) {
        const int kk = k < (nbins + 1) / 2 ? k : k - nbins;
        f[k] = kk * fs / nbins;
    }
    return f;
}

}  // namespace

void fft_inplace(cvec& a, bool inverse) {
    const int n = static_cast<int>(a.size());
    if (!is_pow2(n)) throw std::invalid_argument("fft size must be a power of two");
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * M_PI / len * (inverse ? 1.0 : -1.0);
        const cplx wl = std::polar(1.0, ang);
        for (int i = 0; i < n; i += len) {
            cplx w{1.0, 0.0};
            for (int k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& v : a) v /= static_cast<double>(n);
    }
}

cvec dft_direct(const cvec& a, bool inverse) {
    const int n = static_cast<int>(a.size());
    cvec out(n, cplx{0.0, 0.0});
    const double sign = inverse ? 1.0 : -1.0;
    for (int k = 0; k < n; ++k) {
        cplx acc{0.0, 0.0};
        for (int m = 0; m < n; ++m) {
            acc += a[m] * std::polar(1.0, sign * 2.0 * M_PI * k * m / n);
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

cvec filter_taps_from_response(const cvec& theta_on_grid) {
    return dft_direct(theta_on_grid, true);
}

SignalRecords simulate(const SimScenario& sc, RandomStream& rng) {
    if (sc.sample_rate <= 0.0) throw std::invalid_argument("sample_rate must be > 0");
    if (sc.delay_samples < 1)
        throw std::invalid_argument("delay_samples must be >= 1 (strict loop delay)");
    if (sc.num_samples <= 0) throw std::invalid_argument("num_samples must be > 0");
    check_sample_spaced(sc.h_sd, sc.sample_rate, "h_sd");
    check_sample_spaced(sc.h_sr, sc.sample_rate, "h_sr");
    check_sample_spaced(sc.h_rd, sc.sample_rate, "h_rd");

    const long total = sc.num_samples + sc.warmup_samples;
    const int d = sc.delay_samples;
    const double fs = sc.sample_rate;
    const double noise_var = sc.noise_psd * fs;

    // Source: white CSCG, optionally shaped by the FIR whose DFT interpolates
    // sqrt(source_psd) on source_psd.size() bins.
    cvec shape_fir;
    double flat_var = 0.0;
    if (sc.source_psd.size() <= 1) {
        flat_var = (sc.source_psd.empty() ? 0.0 : sc.source_psd[0]) * fs;
    } else {
        cvec root(sc.source_psd.size());
        for (std::size_t k = 0; k < root.size(); ++k)
            root[k] = std::sqrt(std::max(0.0, sc.source_psd[k]));
        shape_fir = dft_direct(root, true);
    }

    cvec s(total), x(total), y(total), r(total), white;
    if (!shape_fir.empty()) white.resize(total);

    const auto& sd = sc.h_sd.taps;
    const auto& sr = sc.h_sr.taps;
    const auto& rd = sc.h_rd.taps;
    const auto& th = sc.filter_taps;

    auto conv_at = [](const cvec& taps, const cvec& sig, long n) {
        cplx acc{0.0, 0.0};
        const long m_max = std::min<long>(static_cast<long>(taps.size()) - 1, n);
        for (long m = 0; m <= m_max; ++m) acc += taps[m] * sig[n - m];
        return acc;
    };

    for (long n = 0; n < total; ++n) {
        if (shape_fir.empty()) {
            s[n] = rng.complex_gaussian(flat_var);
        } else {
            white[n] = rng.complex_gaussian(fs);
            s[n] = conv_at(shape_fir, white, n);
        }
        const cplx n_r = rng.complex_gaussian(noise_var);
        const cplx n_d = rng.complex_gaussian(noise_var);
        r[n] = conv_at(sr, s, n) + n_r;
        if (n >= d) r[n] += sc.alpha * x[n - d];
        x[n] = conv_at(th, r, n);
        y[n] = conv_at(sd, s, n) + conv_at(rd, x, n) + n_d;
        if (std::abs(x[n]) > 1e12)
            throw DivergenceError("relay output diverged at sample " + std::to_string(n));
    }

    SignalRecords rec;
    rec.sample_rate = fs;
    rec.s.assign(s.begin() + sc.warmup_samples, s.end());
    rec.x.assign(x.begin() + sc.warmup_samples, x.end());
    rec.y.assign(y.begin() + sc.warmup_samples, y.end());
    return rec;
}

SpectralEstimate estimate_transfer(const SignalRecords& rec, int segment_len,
                                   int num_segments) {
    if (!is_pow2(segment_len))
        throw std::invalid_argument("segment_len must be a power of two");
    if (num_segments < 1) throw std::invalid_argument("num_segments must be >= 1");
    const long hop = segment_len / 2;
    const long needed = hop * (num_segments - 1) + segment_len;
    if (static_cast<long>(rec.s.size()) < needed)
        throw InsufficientDataError("records shorter than the requested Welch plan");

    dvec window(segment_len);
    double wsum2 = 0.0;
    for (int n = 0; n < segment_len; ++n) {
        window[n] = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / segment_len));
        wsum2 += window[n] * window[n];
    }

    dvec pss(segment_len, 0.0), pxx(segment_len, 0.0), pyy(segment_len, 0.0);
    cvec pys(segment_len, cplx{0.0, 0.0});
    cvec bs(segment_len), bx(segment_len), by(segment_len);
    for (int j = 0; j < num_segments; ++j) {
        const long start = j * hop;
        for (int n = 0; n < segment_len; ++n) {
            bs[n] = rec.s[start + n] * window[n];
            bx[n] = rec.x[start + n] * window[n];
            by[n] = rec.y[start + n] * window[n];
        }
        fft_inplace(bs, false);
        fft_inplace(bx, false);
        fft_inplace(by, false);
        for (int k = 0; k < segment_len; ++k) {
            pss[k] += std::norm(bs[k]);
            pxx[k] += std::norm(bx[k]);
            pyy[k] += std::norm(by[k]);
            pys[k] += by[k] * std::conj(bs[k]);
        }
    }

    SpectralEstimate est;
    est.freqs = bin_freqs(segment_len, rec.sample_rate);
    est.num_averages = num_segments;
    est.transfer.resize(segment_len);
    est.noise_psd_at_d.resize(segment_len);
    est.relay_tx_psd.resize(segment_len);
    const double psd_norm = 1.0 / (num_segments * rec.sample_rate * wsum2);
    for (int k = 0; k < segment_len; ++k) {
        est.transfer[k] = pss[k] > 0.0 ? pys[k] / pss[k] : cplx{0.0, 0.0};
        est.noise_psd_at_d[k] = pyy[k] * psd_norm;
        est.relay_tx_psd[k] = pxx[k] * psd_norm;
    }
    return est;
}

LoopClosedForm closed_form_on_bins(const SimScenario& sc, int nbins,
                                   double source_psd_flat) {
    LoopClosedForm cf;
    cf.freqs = bin_freqs(nbins, sc.sample_rate);
    const cvec h_sd = response_at(sc.h_sd, cf.freqs);
    const cvec h_sr = response_at(sc.h_sr, cf.freqs);
    const cvec h_rd = response_at(sc.h_rd, cf.freqs);
    TapVector theta_taps{sc.filter_taps, 1.0 / sc.sample_rate};
    cf.theta = response_at(theta_taps, cf.freqs);
    cf.alpha_hat.resize(nbins);
    const double tau = sc.delay_samples / sc.sample_rate;
    for (int k = 0; k < nbins; ++k) {
        cf.alpha_hat[k] = std::polar(sc.alpha, -2.0 * M_PI * tau * cf.freqs[k]);
    }
    cf.h_eff = effective_response(h_sd, h_sr, h_rd, cf.theta, cf.alpha_hat);
    cf.noise_psd_d = effective_noise_psd(h_rd, cf.theta, cf.alpha_hat, sc.noise_psd);
    const dvec p(nbins, source_psd_flat);
    cf.relay_tx_psd = relay_tx_psd(cf.theta, cf.alpha_hat, h_sr, p, sc.noise_psd);
    return cf;
}

double loop_gain_max(const SimScenario& sc, int nbins) {
    const dvec freqs = bin_freqs(nbins, sc.sample_rate);
    TapVector theta_taps{sc.filter_taps, 1.0 / sc.sample_rate};
    const cvec theta = response_at(theta_taps, freqs);
    double g = 0.0;
    for (int k = 0; k < nbins; ++k) g = std::max(g, sc.alpha * std::abs(theta[k]));
    return g;
}

}  // namespace ffrelay
