#pragma once

#include <cstdint>
#include <vector>

#include "afc/dynamics.hpp"

namespace afc::counting {

struct DetectorSpec {
    double quantum_efficiency = 0.69;
    double dark_rate_hz = 26.0;
    double bin_width_s = 350e-9;
    void validate() const;
};

struct ShotPlan {
    double mean_photons = 0.097;  // per storage pulse
    int shots_per_cycle = 2000;
    int cycles = 15;
    double path_transmission = 1.0;  // free parameter for uncalibrated losses
    void validate() const;
    std::int64_t total_shots() const {
        return static_cast<std::int64_t>(shots_per_cycle) * cycles;
    }
};

/// Mean signal counts accumulated over all shots:
/// n_bar * eta * path * QE * shots.
double expected_signal(const ShotPlan& plan, double memory_efficiency, const DetectorSpec& det);

/// Mean dark counts in one bin accumulated over all shots.
double expected_dark(const DetectorSpec& det, std::int64_t shots);

/// Ratio of mean signal to the dark-count noise floor.
double snr(double signal_counts, double dark_counts);

/// Path transmission that reproduces a target SNR (single-parameter inverse
/// of the pipeline above).
double fit_path_transmission(double target_snr, const ShotPlan& plan, double memory_efficiency,
                             const DetectorSpec& det);

struct CountHistogram {
    double start_s = 0.0;
    double bin_width_s = 0.0;
    std::vector<std::int64_t> counts;
    std::vector<double> expected;  // analytic bin means (signal + dark)
    double bin_start_s(std::size_t i) const {
        return start_s + bin_width_s * static_cast<double>(i);
    }
};

/// Poisson-sampled counts per time bin.  The signal mean per bin converts the
/// trace integral through its first-echo equivalent width, so an isolated
/// echo contributes n_bar * eta_echo * path * QE * shots.  Bins draw from
/// independent counter-seeded streams: reproducible for a fixed seed and
/// stable under any parallel partition.
CountHistogram simulate_detection(const ShotPlan& plan, const dynamics::EmissionTrace& trace,
                                  const DetectorSpec& det, std::uint64_t seed);

}  // namespace afc::counting
