#pragma once

#include <cstddef>
#include <vector>

namespace afc {

/// Periodic absorption structure: M Gaussian peaks of FWHM gamma and depth
/// alpha*L, spaced by delta around a center frequency.
struct CombSpec {
    int peak_count = 4;
    double spacing_hz = 2.3e6;
    double peak_fwhm_hz = 140e3;
    double peak_optical_depth = 45.0;
    double center_frequency_hz = 0.0;
    /// Per-peak height multipliers; empty means all 1.
    std::vector<double> height_multipliers;

    void validate() const;
    double multiplier(int peak) const;
    /// Peak centers are symmetric about center_frequency_hz.
    double peak_center_hz(int peak) const;
};

/// Optical depth versus detuning on a uniform frequency grid.
struct AbsorptionProfile {
    double start_hz = 0.0;
    double step_hz = 0.0;
    std::vector<double> depth;

    void validate() const;
    std::size_t size() const { return depth.size(); }
    double freq_at(std::size_t i) const { return start_hz + step_hz * static_cast<double>(i); }
    double span_hz() const { return depth.empty() ? 0.0 : step_hz * static_cast<double>(depth.size() - 1); }
};

struct CavitySpec {
    double r1 = 0.96;   // input mirror reflectivity
    double r2 = 0.999;  // back mirror reflectivity
    void validate() const;
};

struct EfficiencyPoint {
    double t_s = 0.0;
    double eta = 0.0;
    double std_error = 0.0;
};

struct EfficiencyCurve {
    std::vector<EfficiencyPoint> points;
    void validate() const;
};

}  // namespace afc
