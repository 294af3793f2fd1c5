// Test-only reference implementations, independent of the library's
// computational paths.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "afc/dynamics.hpp"
#include "afc/spectra.hpp"

namespace oracles {

/// Composite Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / (2 * panels);
    double sum = f(a) + f(b);
    for (int i = 1; i < 2 * panels; ++i) sum += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Term-by-term collective emission, written directly from the wavefunction
/// sum: ion-major loops, explicit spatial-phase in/out cancellation, pulse
/// phases from numeric quadrature of the field shape, attrition and
/// normalization re-derived from the documented contracts.
class BruteForceTrace {
public:
    BruteForceTrace(const afc::dynamics::IonEnsemble& ens,
                    const afc::dynamics::StarkTimeline& timeline,
                    const afc::dynamics::MaterialSpec& material,
                    const afc::dynamics::TraceOptions& options)
        : ens_(ens), material_(material), options_(options) {
        for (const auto& p : timeline.pulses) {
            pulses_.push_back(p);
            const double omega = afc::dynamics::stark_shift_hz(p.field_v_per_m, material_);
            kick_phase_.push_back(afc::kTwoPi * omega * shape_area(p));
        }
    }

    double class_phase(double t, int cls) const {
        double phi = 0.0;
        for (std::size_t k = 0; k < pulses_.size(); ++k) {
            const auto& p = pulses_[k];
            const double kick_threshold = options_.instantaneous_fraction / ens_.comb.spacing_hz;
            if (p.duration_s <= kick_threshold) {
                if (t > p.center_s()) phi += kick_phase_[k];
            } else {
                const double omega = afc::dynamics::stark_shift_hz(p.field_v_per_m, material_);
                phi += afc::kTwoPi * omega * shape_area_until(p, t);
            }
        }
        return cls * phi;
    }

    /// Raw |sum|^2, one ion at a time.
    double raw_intensity(double t) const {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t j = 0; j < ens_.size(); ++j) {
            const double stored = -ens_.spatial_phase_rad[j];  // -k z at absorption
            const double emitted = +ens_.spatial_phase_rad[j];  // +k z in forward emission
            const double theta = afc::kTwoPi * ens_.detuning_hz[j] * t +
                                 class_phase(t, ens_.stark_class[j]) + stored + emitted;
            acc += ens_.weight[j] * std::complex<double>(std::cos(theta), std::sin(theta));
        }
        return std::norm(acc);
    }

    /// Anchor-echo measurement per the documented contract: the window
    /// [1/D - w, 1/D + w], w = 1/(M D), kReferenceSamples points, parabolic
    /// refinement of the largest sample.
    double reference_peak() const {
        const double period = 1.0 / ens_.comb.spacing_hz;
        const double w = period / ens_.comb.peak_count;
        const std::size_t n = afc::dynamics::kReferenceSamples;
        const double step = 2.0 * w / static_cast<double>(n - 1);
        std::vector<double> vals(n);
        BruteForceTrace free_trace(ens_, afc::dynamics::StarkTimeline{}, material_, options_);
        for (std::size_t i = 0; i < n; ++i)
            vals[i] = free_trace.raw_intensity(period - w + step * static_cast<double>(i));
        std::size_t best = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (vals[i] > vals[best]) best = i;
        double peak = vals[best];
        if (best > 0 && best + 1 < n) {
            const double ym = vals[best - 1], y0 = vals[best], yp = vals[best + 1];
            const double denom = ym - 2.0 * y0 + yp;
            if (denom < 0.0) {
                const double shift = 0.5 * (ym - yp) / denom;
                if (std::abs(shift) <= 1.0) peak = y0 - 0.25 * (ym - yp) * shift;
            }
        }
        return peak;
    }

    /// Attrition amplitude-squared factor at time t per the documented
    /// contract: steps midway between echoes.
    double attrition_sq(double t) const {
        if (!options_.attrition) return 1.0;
        const double period = 1.0 / ens_.comb.spacing_hz;
        double factor = 1.0;
        for (int m = 1; (m + 0.5) * period <= t; ++m) {
            const double t_echo = m * period;
            const double c = std::cos(class_phase(t_echo, 1));
            factor *= 1.0 - afc::spectra::efficiency_forward(ens_.comb, t_echo) * c * c;
        }
        return factor;
    }

    std::vector<double> normalized(const std::vector<double>& times) const {
        const double anchor =
            afc::spectra::efficiency_forward(ens_.comb, 1.0 / ens_.comb.spacing_hz);
        const double scale = anchor / reference_peak();
        std::vector<double> out;
        out.reserve(times.size());
        for (double t : times) {
            double v = raw_intensity(t) * scale * attrition_sq(t);
            if (options_.homogeneous_decay)
                v *= std::exp(-2.0 * t / material_.optical_coherence_s);
            out.push_back(v);
        }
        return out;
    }

private:
    static double shape_area(const afc::dynamics::StarkPulse& p) {
        return shape_area_until(p, p.support_end_s() + p.duration_s);
    }

    static double shape_area_until(const afc::dynamics::StarkPulse& p, double t) {
        using afc::dynamics::PulseShape;
        if (p.shape == PulseShape::Square) {
            const double upto = std::min(t, p.start_s + p.duration_s);
            return upto > p.start_s ? upto - p.start_s : 0.0;
        }
        // Gaussian of FWHM duration centered at start + 3 duration,
        // integrated numerically over the full (effectively infinite) tail.
        const double center = p.start_s + 3.0 * p.duration_s;
        const double w = p.duration_s;
        const double lo = center - 9.0 * w;
        const double upto = std::min(t, center + 9.0 * w);
        if (upto <= lo) return 0.0;
        return simpson(
            [&](double tau) {
                const double u = (tau - center) / w;
                return std::exp(-4.0 * std::numbers::ln2 * u * u);
            },
            lo, upto, 20000);
    }

    const afc::dynamics::IonEnsemble& ens_;
    afc::dynamics::MaterialSpec material_;
    afc::dynamics::TraceOptions options_;
    std::vector<afc::dynamics::StarkPulse> pulses_;
    std::vector<double> kick_phase_;
};

/// Independent 3-level optical-pumping map: one pulse at fixed transfer
/// probability p on (g_src -> e), iterated reps times.
inline std::array<double, 3> pump_map(std::array<double, 3> occ, int g_src,
                                      const std::array<double, 3>& branch, double p, int reps) {
    for (int r = 0; r < reps; ++r) {
        const double moved = p * occ[static_cast<std::size_t>(g_src)];
        occ[static_cast<std::size_t>(g_src)] -= moved;
        for (int g = 0; g < 3; ++g) occ[static_cast<std::size_t>(g)] += moved * branch[static_cast<std::size_t>(g)];
    }
    return occ;
}

}  // namespace oracles
