#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "afc/types.hpp"

namespace afc::readout {

/// Linear frequency sweep of the probe.
struct ChirpSpec {
    double rate_hz_per_s = 1e12;  // 1 MHz / us
    double span_hz = 0.0;
    double start_hz = 0.0;  // first swept frequency, on the profile axis
    double amplitude = 1.0;

    void validate() const;
    double sweep_time_s() const { return span_hz / rate_hz_per_s; }
    /// Chirp covering the profile grid end to end.
    static ChirpSpec covering(const AbsorptionProfile& profile, double rate_hz_per_s = 1e12,
                              double amplitude = 1.0);
};

/// Analog response of the detection chain, applied to the detected intensity.
struct DetectorResponse {
    enum class Model { Disabled, SinglePole, Tabulated };
    Model model = Model::SinglePole;
    double bandwidth_hz = 3.5e6;
    /// Tabulated complex response (freq >= 0); Hermitian-extended internally.
    std::vector<std::pair<double, std::complex<double>>> table;

    void validate() const;
    std::complex<double> gain(double freq_hz) const;

    static DetectorResponse disabled();
    static DetectorResponse single_pole(double bandwidth_hz);
};

/// Detected intensity of the swept probe versus time.
struct BeatTrace {
    double start_s = 0.0;
    double step_s = 0.0;
    std::vector<double> intensity;
    // Sweep bookkeeping carried from chirp_forward for the inverse transform.
    double chirp_rate_hz_per_s = 0.0;
    double chirp_start_hz = 0.0;
    double chirp_span_hz = 0.0;
    double amplitude = 1.0;

    std::size_t size() const { return intensity.size(); }
    double time_at(std::size_t i) const { return start_s + step_s * static_cast<double>(i); }
    void validate() const;
};

/// Transmission of the chirped probe through the absorber.  The complex field
/// filter combines the amplitude attenuation exp(-alphaL/2) with the
/// minimum-phase dispersion derived from the absorption profile (discrete
/// Hilbert transform on a >= 4x zero-padded grid); the detected intensity is
/// |filtered field|^2.
BeatTrace chirp_forward(const AbsorptionProfile& profile, const ChirpSpec& chirp);

/// LTI filtering of the detected intensity with the detector response.
BeatTrace apply_detector(const BeatTrace& trace, const DetectorResponse& detector);

struct DeconvOptions {
    /// Divide out the detector response before inversion.
    bool compensate_detector = true;
    /// Tikhonov floor, as a fraction of the max spectral amplitude.
    double regularization = 1e-3;
    int max_iterations = 200;
    double tolerance = 1e-10;
};

/// Inverse of chirp_forward: reconstructs the complex transmission from the
/// beat pattern (analytic-signal projection of the interference term, then
/// regularized spectral division against the probe), and returns the
/// absorption on the chirp's frequency grid.  Throws NumericError when the
/// signal sits below the regularization floor over most of the band or the
/// interference iteration fails to converge.
AbsorptionProfile deconvolve_profile(const BeatTrace& trace, const ChirpSpec& chirp,
                                     const DetectorResponse* detector,
                                     const DeconvOptions& options = {});

struct PeakFit {
    double center_hz = 0.0;
    double fwhm_hz = 0.0;
    double amplitude = 0.0;  // peak optical depth
    double center_err_hz = 0.0;
    double fwhm_err_hz = 0.0;
    double amplitude_err = 0.0;
};

struct PeakFitResult {
    std::vector<PeakFit> peaks;  // sorted by center frequency
    double residual_norm = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;  // chi^2 per accepted iteration
};

/// Nonlinear least squares of a sum of Gaussians, initialized from the
/// n_peaks largest local maxima.  Overlapping peaks (separation < FWHM/2) and
/// unresolvable maxima raise NumericError; non-convergence is flagged.
PeakFitResult fit_peaks(const AbsorptionProfile& profile, int n_peaks);

}  // namespace afc::readout
