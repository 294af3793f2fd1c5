#pragma once

#include <vector>

namespace afc::dynamics {

/// Host-material constants for the Stark phase control.
struct MaterialSpec {
    /// |dipole moment difference| / h, in Hz per (V/m).  Not a literature
    /// constant shipped by default: the default reproduces a +-pi/2 phase for
    /// a 23 ns FWHM Gaussian pulse at 54 V across the 6 mm electrode gap.
    double dipole_rate_hz_per_v_per_m = 1161.68;
    double dipole_angle_deg = 12.4;  // dipole angle to the field (b) axis
    double electrode_gap_m = 6e-3;
    double excited_lifetime_s = 164e-6;
    double optical_coherence_s = 152e-6;

    void validate() const;
    double field_for_voltage(double volts) const { return volts / electrode_gap_m; }
};

/// Stark shift magnitude for a field along b: Omega = rate * E * cos(angle).
/// Classes +1/-1 shift by +Omega/-Omega.
double stark_shift_hz(double field_v_per_m, const MaterialSpec& material);

enum class PulseShape { Square, Gaussian };

/// One electric-field pulse.  Square pulses occupy [start, start+duration];
/// Gaussian pulses have FWHM = duration and are centered at start + 3*duration
/// (the nominal support is [start, start + 6*duration]).
struct StarkPulse {
    double start_s = 0.0;
    PulseShape shape = PulseShape::Gaussian;
    double duration_s = 23e-9;
    double field_v_per_m = 0.0;  // signed amplitude

    double support_end_s() const;
    double center_s() const;
    void validate() const;
};

/// Phase accumulated by the +1 class over the whole pulse:
/// phi = 2 pi * integral of Omega(t) dt.  The -1 class gets -phi.
double stark_phase_rad(const StarkPulse& pulse, const MaterialSpec& material);

/// Pulse achieving a +-pi/2 class phase (field solved from the material).
StarkPulse pi_half_pulse(const MaterialSpec& material, double start_s,
                         PulseShape shape = PulseShape::Gaussian, double duration_s = 23e-9);

struct StarkTimeline {
    std::vector<StarkPulse> pulses;
    void validate() const;  // non-overlapping supports, times >= 0
};

/// Timeline compiled against a material: evaluates the accumulated +1-class
/// phase at arbitrary times.  Pulses shorter than instantaneous_fraction / Delta
/// are treated as phase kicks at their center; longer pulses accumulate phase
/// continuously through their shape integral.
class PhaseSchedule {
public:
    PhaseSchedule(const StarkTimeline& timeline, const MaterialSpec& material,
                  double comb_spacing_hz, double instantaneous_fraction = 0.10);

    /// Build from a raw pulse list without the timeline overlap check:
    /// overlapping fields superpose, so their phase contributions add.
    static PhaseSchedule from_pulses(const std::vector<StarkPulse>& pulses,
                                     const MaterialSpec& material, double comb_spacing_hz,
                                     double instantaneous_fraction = 0.10);

    /// Accumulated phase of the +1 class at time t (radians).
    double phase_plus(double t_s) const;

private:
    PhaseSchedule() = default;
    void build(const std::vector<StarkPulse>& pulses, const MaterialSpec& material,
               double comb_spacing_hz, double instantaneous_fraction);

    struct Segment {
        double start_s, end_s, center_s;
        double total_phase_rad;
        bool instantaneous;
        StarkPulse pulse;
        double omega_hz;
    };
    std::vector<Segment> segments_;
};

}  // namespace afc::dynamics
