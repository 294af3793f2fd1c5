#include "afc/counting.hpp"

#include <cmath>
#include <random>

#include "afc/errors.hpp"
#include "afc/rng.hpp"

namespace afc::counting {

void DetectorSpec::validate() const {
    if (!(quantum_efficiency >= 0.0) || !(quantum_efficiency <= 1.0))
        throw ValidationError("DetectorSpec: quantum efficiency must be in [0, 1]");
    if (!(dark_rate_hz >= 0.0)) throw ValidationError("DetectorSpec: dark rate must be >= 0");
    if (!(bin_width_s > 0.0)) throw ValidationError("DetectorSpec: bin width must be positive");
}

void ShotPlan::validate() const {
    if (!(mean_photons >= 0.0)) throw ValidationError("ShotPlan: mean photons must be >= 0");
    if (shots_per_cycle < 1 || cycles < 1)
        throw ValidationError("ShotPlan: shot totals must be positive");
    if (!(path_transmission >= 0.0) || !(path_transmission <= 1.0))
        throw ValidationError("ShotPlan: path transmission must be in [0, 1]");
}

double expected_signal(const ShotPlan& plan, double memory_efficiency, const DetectorSpec& det) {
    plan.validate();
    det.validate();
    if (!(memory_efficiency >= 0.0) || !(memory_efficiency <= 1.0))
        throw ValidationError("expected_signal: efficiency must be in [0, 1]");
    return plan.mean_photons * memory_efficiency * plan.path_transmission *
           det.quantum_efficiency * static_cast<double>(plan.total_shots());
}

double expected_dark(const DetectorSpec& det, std::int64_t shots) {
    det.validate();
    if (shots < 1) throw ValidationError("expected_dark: shots must be positive");
    return det.dark_rate_hz * det.bin_width_s * static_cast<double>(shots);
}

double snr(double signal_counts, double dark_counts) {
    if (!(dark_counts > 0.0)) throw ValidationError("snr: noise floor must be positive");
    return signal_counts / dark_counts;
}

double fit_path_transmission(double target_snr, const ShotPlan& plan, double memory_efficiency,
                             const DetectorSpec& det) {
    ShotPlan unit = plan;
    unit.path_transmission = 1.0;
    const double signal_at_unity = expected_signal(unit, memory_efficiency, det);
    const double dark = expected_dark(det, plan.total_shots());
    if (!(signal_at_unity > 0.0))
        throw ValidationError("fit_path_transmission: pipeline produces no signal");
    const double path = target_snr * dark / signal_at_unity;
    if (path > 1.0)
        throw NumericError("fit_path_transmission: target SNR exceeds the lossless pipeline");
    return path;
}

CountHistogram simulate_detection(const ShotPlan& plan, const dynamics::EmissionTrace& trace,
                                  const DetectorSpec& det, std::uint64_t seed) {
    plan.validate();
    det.validate();
    trace.validate();
    if (!(trace.ref_equivalent_width_s > 0.0))
        throw ValidationError("simulate_detection: trace lacks a normalization reference");

    const double duration = trace.step_s * static_cast<double>(trace.size() - 1);
    const auto n_bins = static_cast<std::size_t>(std::ceil(duration / det.bin_width_s));
    if (n_bins == 0) throw ValidationError("simulate_detection: trace shorter than one bin");

    CountHistogram hist;
    hist.start_s = trace.start_s;
    hist.bin_width_s = det.bin_width_s;
    hist.counts.resize(n_bins);
    hist.expected.resize(n_bins);

    const double shots = static_cast<double>(plan.total_shots());
    const double dark_mean = det.dark_rate_hz * det.bin_width_s * shots;
    const double photon_scale =
        plan.mean_photons * plan.path_transmission * det.quantum_efficiency * shots;

    for (std::size_t b = 0; b < n_bins; ++b) {
        const double t0 = hist.bin_start_s(b);
        const double t1 = t0 + det.bin_width_s;
        double integral = 0.0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const double t = trace.time_at(i);
            if (t >= t0 && t < t1) integral += trace.intensity[i] * trace.step_s;
        }
        // Trace integral over the bin, in units of the first-echo equivalent
        // width, is the recalled fraction landing in this bin.
        const double mean = photon_scale * integral / trace.ref_equivalent_width_s + dark_mean;
        hist.expected[b] = mean;
        auto rng = make_rng(derive_seed(seed, b));
        std::poisson_distribution<std::int64_t> poisson(mean > 0.0 ? mean : 0.0);
        hist.counts[b] = mean > 0.0 ? poisson(rng) : 0;
    }
    return hist;
}

}  // namespace afc::counting
