#include "afc/stark.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afc/errors.hpp"
#include "afc/numeric.hpp"

namespace afc::dynamics {

void MaterialSpec::validate() const {
    if (!(dipole_rate_hz_per_v_per_m > 0.0))
        throw ValidationError("MaterialSpec: dipole rate must be positive");
    if (!(dipole_angle_deg >= 0.0) || !(dipole_angle_deg <= 90.0))
        throw ValidationError("MaterialSpec: dipole angle must be in [0, 90] degrees");
    if (!(electrode_gap_m > 0.0)) throw ValidationError("MaterialSpec: electrode gap must be positive");
    if (!(excited_lifetime_s > 0.0) || !(optical_coherence_s > 0.0))
        throw ValidationError("MaterialSpec: lifetimes must be positive");
}

double stark_shift_hz(double field_v_per_m, const MaterialSpec& material) {
    material.validate();
    const double angle = material.dipole_angle_deg * std::numbers::pi / 180.0;
    return material.dipole_rate_hz_per_v_per_m * field_v_per_m * std::cos(angle);
}

double StarkPulse::center_s() const {
    return shape == PulseShape::Square ? start_s + 0.5 * duration_s : start_s + 3.0 * duration_s;
}

double StarkPulse::support_end_s() const {
    return shape == PulseShape::Square ? start_s + duration_s : start_s + 6.0 * duration_s;
}

void StarkPulse::validate() const {
    if (!(start_s >= 0.0)) throw ValidationError("StarkPulse: start time must be >= 0");
    if (!(duration_s > 0.0)) throw ValidationError("StarkPulse: duration must be positive");
    if (!std::isfinite(field_v_per_m)) throw ValidationError("StarkPulse: field must be finite");
}

double stark_phase_rad(const StarkPulse& pulse, const MaterialSpec& material) {
    pulse.validate();
    const double omega = stark_shift_hz(pulse.field_v_per_m, material);
    const double area_s = pulse.shape == PulseShape::Square
                              ? pulse.duration_s
                              : pulse.duration_s * kGaussAreaPerFwhm;
    return kTwoPi * omega * area_s;
}

StarkPulse pi_half_pulse(const MaterialSpec& material, double start_s, PulseShape shape,
                         double duration_s) {
    StarkPulse pulse;
    pulse.start_s = start_s;
    pulse.shape = shape;
    pulse.duration_s = duration_s;
    pulse.field_v_per_m = 1.0;
    const double phase_per_field = stark_phase_rad(pulse, material);
    pulse.field_v_per_m = (std::numbers::pi / 2.0) / phase_per_field;
    return pulse;
}

void StarkTimeline::validate() const {
    for (const auto& p : pulses) p.validate();
    for (std::size_t i = 0; i < pulses.size(); ++i)
        for (std::size_t j = i + 1; j < pulses.size(); ++j) {
            const auto& a = pulses[i];
            const auto& b = pulses[j];
            if (a.start_s < b.support_end_s() && b.start_s < a.support_end_s())
                throw ValidationError("StarkTimeline: pulses overlap");
        }
}

PhaseSchedule::PhaseSchedule(const StarkTimeline& timeline, const MaterialSpec& material,
                             double comb_spacing_hz, double instantaneous_fraction) {
    timeline.validate();
    build(timeline.pulses, material, comb_spacing_hz, instantaneous_fraction);
}

PhaseSchedule PhaseSchedule::from_pulses(const std::vector<StarkPulse>& pulses,
                                         const MaterialSpec& material, double comb_spacing_hz,
                                         double instantaneous_fraction) {
    PhaseSchedule schedule;
    for (const auto& p : pulses) p.validate();
    schedule.build(pulses, material, comb_spacing_hz, instantaneous_fraction);
    return schedule;
}

void PhaseSchedule::build(const std::vector<StarkPulse>& pulses, const MaterialSpec& material,
                          double comb_spacing_hz, double instantaneous_fraction) {
    material.validate();
    if (!(comb_spacing_hz > 0.0))
        throw ValidationError("PhaseSchedule: comb spacing must be positive");
    const double kick_threshold_s = instantaneous_fraction / comb_spacing_hz;
    segments_.reserve(pulses.size());
    for (const auto& p : pulses) {
        Segment seg;
        seg.pulse = p;
        seg.start_s = p.start_s;
        seg.end_s = p.support_end_s();
        seg.center_s = p.center_s();
        seg.total_phase_rad = stark_phase_rad(p, material);
        seg.instantaneous = p.duration_s <= kick_threshold_s;
        seg.omega_hz = stark_shift_hz(p.field_v_per_m, material);
        segments_.push_back(seg);
    }
    std::sort(segments_.begin(), segments_.end(),
              [](const Segment& a, const Segment& b) { return a.start_s < b.start_s; });
}

double PhaseSchedule::phase_plus(double t_s) const {
    double phi = 0.0;
    for (const auto& seg : segments_) {
        if (t_s <= seg.start_s) break;
        if (seg.instantaneous) {
            if (t_s > seg.center_s) phi += seg.total_phase_rad;
            continue;
        }
        if (seg.pulse.shape == PulseShape::Square) {
            const double elapsed =
                std::clamp(t_s - seg.start_s, 0.0, seg.pulse.duration_s);
            phi += kTwoPi * seg.omega_hz * elapsed;
        } else {
            phi += kTwoPi * seg.omega_hz *
                   gaussian_cumulative(std::min(t_s, seg.end_s), seg.center_s, seg.pulse.duration_s);
        }
    }
    return phi;
}

}  // namespace afc::dynamics
