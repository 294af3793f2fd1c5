#pragma once

#include <array>
#include <string>
#include <vector>

#include "afc/types.hpp"

namespace afc::prep {

/// Ground / excited hyperfine indices: 0 = 1/2, 1 = 3/2, 2 = 5/2.
enum HyperfineLevel { kHalf = 0, kThreeHalf = 1, kFiveHalf = 2 };

/// Three-level hyperfine structure on each side of the optical transition.
/// A class whose 1/2g -> 1/2e transition sits at nu0 absorbs on (g, e) at
/// nu0 + ground_offset(g) + excited_offset(e): deeper ground levels raise the
/// optical frequency, higher excited levels raise it further.
struct LevelScheme {
    double dg1_hz = 10.19e6;  // 1/2g - 3/2g
    double dg2_hz = 17.3e6;   // 3/2g - 5/2g
    double de1_hz = 4.6e6;    // 1/2e - 3/2e
    double de2_hz = 4.8e6;    // 3/2e - 5/2e
    /// Relative oscillator strengths s[g][e], in (0, 1].
    std::array<std::array<double, 3>, 3> strength;
    /// Branching ratios b[e][g]; each row sums to 1.
    std::array<std::array<double, 3>, 3> branching;

    void validate() const;
    double ground_offset_hz(int g) const;
    double excited_offset_hz(int e) const;
    double transition_offset_hz(int g, int e) const {
        return ground_offset_hz(g) + excited_offset_hz(e);
    }

    /// Literature oscillator strengths with uniform 1/3 branching.
    static LevelScheme defaults();
};

/// Ground-level occupations for ion classes on a uniform grid of the
/// 1/2g -> 1/2e transition detuning.  "parked" holds population removed from
/// the model window (classes with no escape level); per-class conservation is
/// occ[0] + occ[1] + occ[2] + parked = initial total.
struct PopulationState {
    double class_start_hz = 0.0;
    double class_step_hz = 0.0;
    std::array<std::vector<double>, 3> occupation;
    std::vector<double> parked;

    std::size_t size() const { return parked.size(); }
    double class_freq(std::size_t i) const {
        return class_start_hz + class_step_hz * static_cast<double>(i);
    }
    double class_total(std::size_t i) const {
        return occupation[0][i] + occupation[1][i] + occupation[2][i] + parked[i];
    }
    void validate() const;

    /// Thermal start: 1/3 in each ground level for every class.
    static PopulationState uniform(double start_hz, double step_hz, std::size_t n_classes);
};

enum class PulseKind { Sechyp, HybridChirp };

struct BurnPulseSpec {
    std::string name;
    double center_hz = 0.0;   // relative to the 1/2g -> 1/2e zero of Table convention
    double width_hz = 0.1e6;  // sechyp frequency width
    double t_fwhm_s = 11.2e-6;
    double t_cutoff_s = 40e-6;  // recorded but inert in the collapsed model
    int target_g = 0;
    int target_e = 0;
    int repetitions = 1;
    PulseKind kind = PulseKind::Sechyp;
    double scan_width_hz = 0.0;  // linear chirp extent for hybrid pulses

    void validate() const;
    /// Full plateau width: sechyp width, extended by the scan for hybrids.
    double plateau_width_hz() const;
    /// tanh edge scale 1/(2 pi t_FWHM), set by the pulse duration.
    double edge_scale_hz() const;
};

struct BurnSequence {
    std::vector<BurnPulseSpec> pulses;
    double window_hz = 18e6;
    double transfer_efficiency = 0.05;  // on-resonance transfer per shot, before s[g][e]
    double residual = 1e-3;             // population cap left inside the window
    double window_edge_softness_hz = 0.0;  // see burn_window

    void validate() const;
    /// The published burn-back / cleaning sequence.
    static BurnSequence table_defaults();
};

/// Transfer probability of one shot at the given transition detuning from the
/// pulse center: plateau transfer_efficiency * s[g][e] with tanh edges.
double transfer_probability(const BurnPulseSpec& pulse, const LevelScheme& scheme,
                            double transfer_efficiency, double detuning_hz);

/// Vectorized transfer_probability over a detuning grid.
std::vector<double> transfer_profile(const BurnPulseSpec& pulse, const LevelScheme& scheme,
                                     double transfer_efficiency,
                                     const std::vector<double>& detunings_hz);

/// Empty every ground level with a transition inside [0, width] down to
/// residual times the thermal per-level share (class total / 3),
/// redistributing equally over the escape levels
/// (levels with all transitions outside the window).  Classes with no escape
/// level are parked outside the model window.  A nonzero edge softness keeps
/// levels whose in-window transitions all fall within that distance of a
/// window edge (finite pump resolution there; the cleaning pulses exist to
/// finish the low edge).
PopulationState burn_window(const PopulationState& state, const LevelScheme& scheme,
                            double width_hz, double residual = 1e-3,
                            double edge_softness_hz = 0.0);

/// One burn pulse: move population out of the target ground level with the
/// per-class transfer probability, redistributing through the target excited
/// level by the branching ratios; applied `repetitions` times sequentially.
PopulationState apply_pulse(const PopulationState& state, const BurnPulseSpec& pulse,
                            const LevelScheme& scheme, double transfer_efficiency = 0.05);

struct AbsorptionGrid {
    double start_hz = -5e6;
    double step_hz = 10e3;
    std::size_t size = 2801;
    double line_fwhm_hz = 10e3;      // per-transition lineshape width
    double background_depth = 47.0;  // optical depth of the unburned profile
};

/// Absorption profile of a population state: sum over classes, ground levels
/// and excited levels of occupation * strength * Gaussian line, scaled so the
/// pristine state reproduces the background optical depth.
AbsorptionProfile absorption_from_state(const PopulationState& state, const LevelScheme& scheme,
                                        const AbsorptionGrid& grid);

struct PrepResult {
    PopulationState state;
    AbsorptionProfile profile;
};

/// burn_window followed by the pulse list in order, then the profile.
PrepResult run_sequence(const BurnSequence& sequence, const LevelScheme& scheme,
                        const PopulationState& initial, const AbsorptionGrid& grid);

}  // namespace afc::prep
