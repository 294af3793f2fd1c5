#include "afc/readout.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "afc/errors.hpp"
#include "afc/numeric.hpp"

namespace afc::readout {

namespace {

using cvec = std::vector<std::complex<double>>;

cvec fft(const cvec& in, bool inverse) {
    cvec out(in.size());
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(in.size()), src, dst,
                                      inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    if (inverse) {
        const double norm = 1.0 / static_cast<double>(in.size());
        for (auto& v : out) v *= norm;
    }
    return out;
}

/// Signed frequency of FFT bin k for an N-point transform with sample step dt.
double bin_freq(std::size_t k, std::size_t n, double dt) {
    const double df = 1.0 / (static_cast<double>(n) * dt);
    const double ks = k < n / 2 ? static_cast<double>(k)
                                : static_cast<double>(k) - static_cast<double>(n);
    return ks * df;
}

/// Minimum-phase transfer function from the field log-attenuation a >= 0
/// (cepstral construction; the impulse response comes out causal).
cvec minimum_phase_filter(const std::vector<double>& a) {
    const std::size_t n = a.size();
    cvec log_mag(n);
    for (std::size_t k = 0; k < n; ++k) log_mag[k] = {-a[k], 0.0};
    cvec cep = fft(log_mag, true);
    for (std::size_t k = 1; k < n / 2; ++k) cep[k] *= 2.0;
    for (std::size_t k = n / 2 + 1; k < n; ++k) cep[k] = 0.0;
    cvec log_h = fft(cep, false);
    cvec h(n);
    for (std::size_t k = 0; k < n; ++k) h[k] = std::exp(log_h[k]);
    return h;
}

// The sweep buffer length is tied to the chirp rate and frequency step by
// r dt^2 = 1/N (dt = df / r), which makes the sampled chirp exp(i pi m^2 / N)
// exactly periodic: the probe spectrum is flat and the chirp-domain
// deconvolution is an exact discrete inverse.
struct SweepLayout {
    std::size_t n = 0;
    double dt = 0.0;
    double df = 0.0;  // = r * dt, the native frequency grid of the buffer
};

constexpr std::size_t kMaxSweepSamples = 1 << 24;

SweepLayout layout_for(double rate, double freq_step_hz) {
    SweepLayout lay;
    const double n_exact = rate / (freq_step_hz * freq_step_hz);
    auto n = static_cast<std::size_t>(std::llround(n_exact / 2.0) * 2);
    if (n < 64) n = 64;
    if (n > kMaxSweepSamples)
        throw ValidationError("readout: frequency grid too fine for the chirp rate");
    lay.n = n;
    lay.dt = 1.0 / std::sqrt(rate * static_cast<double>(n));
    lay.df = rate * lay.dt;
    return lay;
}

/// Periodic probe chirp in the rotating frame of the sweep start frequency.
cvec build_probe(double amplitude, const SweepLayout& lay) {
    cvec probe(lay.n);
    for (std::size_t m = 0; m < lay.n; ++m) {
        const double phase = std::numbers::pi * static_cast<double>(m) *
                             static_cast<double>(m) / static_cast<double>(lay.n);
        probe[m] = std::polar(amplitude, phase);
    }
    return probe;
}

/// Field log-attenuation at the sweep bins, addressed from the chirp start
/// frequency (linear interpolation; zero outside the profile grid).
std::vector<double> attenuation_on_bins(const AbsorptionProfile& profile, double chirp_start_hz,
                                        const SweepLayout& lay) {
    std::vector<double> a(lay.n, 0.0);
    const double prof_end = profile.freq_at(profile.size() - 1);
    for (std::size_t k = 0; k < lay.n; ++k) {
        const double nu = chirp_start_hz + lay.df * static_cast<double>(k);
        if (nu < profile.start_hz || nu > prof_end) continue;
        const double x = (nu - profile.start_hz) / profile.step_hz;
        const auto i0 = static_cast<std::size_t>(
            std::min(static_cast<double>(profile.size() - 2), std::floor(x)));
        const double frac = x - static_cast<double>(i0);
        a[k] = 0.5 * ((1.0 - frac) * profile.depth[i0] + frac * profile.depth[i0 + 1]);
    }
    return a;
}

cvec transmit(const cvec& probe, const std::vector<double>& attenuation) {
    const cvec h = minimum_phase_filter(attenuation);
    cvec spec = fft(probe, false);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= h[k];
    return fft(spec, true);
}

std::complex<double> detector_gain(const DetectorResponse& det, double freq_hz) {
    switch (det.model) {
        case DetectorResponse::Model::Disabled:
            return {1.0, 0.0};
        case DetectorResponse::Model::SinglePole:
            return 1.0 / std::complex<double>(1.0, freq_hz / det.bandwidth_hz);
        case DetectorResponse::Model::Tabulated: {
            const double f = std::abs(freq_hz);
            std::complex<double> g;
            if (det.table.empty()) return {1.0, 0.0};
            if (f <= det.table.front().first) {
                g = det.table.front().second;
            } else if (f >= det.table.back().first) {
                g = det.table.back().second;
            } else {
                auto hi = std::lower_bound(det.table.begin(), det.table.end(), f,
                                           [](const auto& row, double v) { return row.first < v; });
                auto lo = hi - 1;
                const double w = (f - lo->first) / (hi->first - lo->first);
                g = (1.0 - w) * lo->second + w * hi->second;
            }
            return freq_hz < 0.0 ? std::conj(g) : g;
        }
    }
    return {1.0, 0.0};
}

/// LTI-filter a real signal with a Hermitian frequency response.
std::vector<double> filter_real(const std::vector<double>& x, double dt,
                                const std::function<std::complex<double>(double)>& gain) {
    const std::size_t n = x.size();
    cvec buf(n);
    for (std::size_t k = 0; k < n; ++k) buf[k] = {x[k], 0.0};
    cvec spec = fft(buf, false);
    for (std::size_t k = 0; k < n; ++k) spec[k] *= gain(bin_freq(k, n, dt));
    cvec out = fft(spec, true);
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) y[k] = out[k].real();
    return y;
}

}  // namespace

void ChirpSpec::validate() const {
    if (!(rate_hz_per_s > 0.0)) throw ValidationError("ChirpSpec: rate must be positive");
    if (!(span_hz > 0.0)) throw ValidationError("ChirpSpec: span must be positive");
    if (!(amplitude > 0.0)) throw ValidationError("ChirpSpec: amplitude must be positive");
}

ChirpSpec ChirpSpec::covering(const AbsorptionProfile& profile, double rate_hz_per_s,
                              double amplitude) {
    profile.validate();
    ChirpSpec chirp;
    chirp.rate_hz_per_s = rate_hz_per_s;
    chirp.start_hz = profile.start_hz;
    chirp.span_hz = profile.span_hz();
    chirp.amplitude = amplitude;
    return chirp;
}

void DetectorResponse::validate() const {
    if (model == Model::SinglePole && !(bandwidth_hz > 0.0))
        throw ValidationError("DetectorResponse: bandwidth must be positive");
    if (model == Model::Tabulated) {
        if (table.size() < 2) throw ValidationError("DetectorResponse: table needs >= 2 rows");
        for (std::size_t i = 1; i < table.size(); ++i)
            if (!(table[i].first > table[i - 1].first))
                throw ValidationError("DetectorResponse: table frequencies must increase");
    }
}

std::complex<double> DetectorResponse::gain(double freq_hz) const {
    return detector_gain(*this, freq_hz);
}

DetectorResponse DetectorResponse::disabled() {
    DetectorResponse det;
    det.model = Model::Disabled;
    return det;
}

DetectorResponse DetectorResponse::single_pole(double bandwidth_hz) {
    DetectorResponse det;
    det.model = Model::SinglePole;
    det.bandwidth_hz = bandwidth_hz;
    return det;
}

void BeatTrace::validate() const {
    if (intensity.size() < 2) throw ValidationError("BeatTrace: need at least 2 samples");
    if (!(step_s > 0.0)) throw ValidationError("BeatTrace: grid step must be positive");
    if (chirp_span_hz > 0.0 && !(step_s < 1.0 / (2.0 * chirp_span_hz)))
        throw ValidationError("BeatTrace: grid step violates the sweep Nyquist bound");
    for (double v : intensity)
        if (!std::isfinite(v)) throw ValidationError("BeatTrace: intensities must be finite");
}

BeatTrace chirp_forward(const AbsorptionProfile& profile, const ChirpSpec& chirp) {
    profile.validate();
    chirp.validate();
    const double prof_end = profile.freq_at(profile.size() - 1);
    if (chirp.start_hz < profile.start_hz - 1e-9 ||
        chirp.start_hz + chirp.span_hz > prof_end + 1e-9)
        throw ValidationError("chirp_forward: profile grid does not cover the chirp span");
    const SweepLayout lay = layout_for(chirp.rate_hz_per_s, profile.step_hz);
    if (!(lay.dt < 1.0 / (2.0 * chirp.span_hz)))
        throw ValidationError("chirp_forward: time step violates the sweep Nyquist bound");
    if (chirp.span_hz > 0.5 * lay.df * static_cast<double>(lay.n))
        throw ValidationError("chirp_forward: span exceeds half the sweep band");

    const cvec probe = build_probe(chirp.amplitude, lay);
    const cvec field = transmit(probe, attenuation_on_bins(profile, chirp.start_hz, lay));

    BeatTrace trace;
    trace.start_s = 0.0;
    trace.step_s = lay.dt;
    trace.intensity.resize(lay.n);
    for (std::size_t k = 0; k < lay.n; ++k) trace.intensity[k] = std::norm(field[k]);
    trace.chirp_rate_hz_per_s = chirp.rate_hz_per_s;
    trace.chirp_start_hz = chirp.start_hz;
    trace.chirp_span_hz = chirp.span_hz;
    trace.amplitude = chirp.amplitude;
    return trace;
}

BeatTrace apply_detector(const BeatTrace& trace, const DetectorResponse& detector) {
    trace.validate();
    detector.validate();
    if (detector.model == DetectorResponse::Model::Disabled) return trace;
    BeatTrace out = trace;
    out.intensity = filter_real(trace.intensity, trace.step_s,
                                [&](double f) { return detector.gain(f); });
    return out;
}

AbsorptionProfile deconvolve_profile(const BeatTrace& trace, const ChirpSpec& chirp,
                                     const DetectorResponse* detector,
                                     const DeconvOptions& options) {
    trace.validate();
    chirp.validate();
    const std::size_t n = trace.size();
    const double alignment = chirp.rate_hz_per_s * trace.step_s * trace.step_s *
                             static_cast<double>(n);
    if (std::abs(alignment - 1.0) > 1e-6)
        throw ValidationError("deconvolve_profile: trace is not a full sweep buffer");

    std::vector<double> y = trace.intensity;
    if (detector && detector->model != DetectorResponse::Model::Disabled &&
        options.compensate_detector) {
        const double reg = options.regularization;
        y = filter_real(y, trace.step_s, [&](double f) {
            const std::complex<double> d = detector->gain(f);
            return std::conj(d) / (std::norm(d) + reg * reg);
        });
    }

    // Interference term m = |W|^2 - 1 with W = E_out / E_in.  The scattered
    // wave v = W - 1 is one-sided in the chirp-conjugate domain, so it is
    // recovered from m = 2 Re v + |v|^2 by alternating the analytic
    // projection with the |v|^2 correction.
    const double baseline = trace.amplitude * trace.amplitude;
    double band_mean = 0.0;
    for (double s : y) band_mean += std::max(0.0, s);
    band_mean /= static_cast<double>(n) * baseline;
    if (band_mean < options.regularization * options.regularization)
        throw NumericError("deconvolve_profile: signal below the regularization floor over the band");

    std::vector<double> m(n);
    for (std::size_t k = 0; k < n; ++k) m[k] = y[k] / baseline - 1.0;

    cvec v(n, {0.0, 0.0});
    double change = 1.0;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        cvec work(n);
        for (std::size_t k = 0; k < n; ++k) work[k] = {m[k] - std::norm(v[k]), 0.0};
        cvec spec = fft(work, false);
        // v lives in bins N-1 .. N/2 (its mirror occupies the lower half).
        spec[0] *= 0.5;
        for (std::size_t k = 1; k < n / 2; ++k) spec[k] = 0.0;
        spec[n / 2] *= 0.5;
        cvec next = fft(spec, true);
        change = 0.0;
        double norm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            change += std::norm(next[k] - v[k]);
            norm += std::norm(next[k]);
        }
        v.swap(next);
        change = std::sqrt(change / std::max(norm, 1e-300));
        if (change < options.tolerance) break;
    }
    if (!(change < 1e-6))
        throw NumericError("deconvolve_profile: interference inversion did not converge");

    // Chirp-domain deconvolution: with the periodic probe, the impulse
    // response of the medium is an exact spectral division away.
    cvec vspec = fft(v, false);
    cvec h(n, {0.0, 0.0});
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = (n - k) % n;
        const double fresnel = std::numbers::pi * static_cast<double>(k) *
                               static_cast<double>(k) / static_cast<double>(n);
        h[k] = vspec[src] * inv_n * std::polar(1.0, -fresnel);
    }
    h[0] += 1.0;
    cvec hspec = fft(h, false);

    AbsorptionProfile out;
    out.step_hz = chirp.rate_hz_per_s * trace.step_s;
    out.start_hz = chirp.start_hz;
    const auto n_out = std::min(
        n - 1, static_cast<std::size_t>(std::floor(chirp.span_hz / out.step_hz)) + 1);
    out.depth.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double mag = std::abs(hspec[i]);
        out.depth[i] = mag > 1e-12 ? std::max(0.0, -2.0 * std::log(mag)) : 0.0;
    }
    return out;
}

}  // namespace afc::readout
