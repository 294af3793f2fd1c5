#include "afc/prep.hpp"

#include <algorithm>
#include <cmath>

#include "afc/errors.hpp"
#include "afc/numeric.hpp"

namespace afc::prep {

namespace {
constexpr double kConservationTol = 1e-12;
}  // namespace

void LevelScheme::validate() const {
    if (!(dg1_hz > 0.0) || !(dg2_hz > 0.0) || !(de1_hz > 0.0) || !(de2_hz > 0.0))
        throw ValidationError("LevelScheme: splittings must be positive");
    for (int g = 0; g < 3; ++g)
        for (int e = 0; e < 3; ++e)
            if (!(strength[g][e] > 0.0) || !(strength[g][e] <= 1.0))
                throw ValidationError("LevelScheme: strengths must be in (0, 1]");
    for (int e = 0; e < 3; ++e) {
        const double row = branching[e][0] + branching[e][1] + branching[e][2];
        if (std::abs(row - 1.0) > kConservationTol)
            throw ValidationError("LevelScheme: branching rows must sum to 1");
        for (int g = 0; g < 3; ++g)
            if (!(branching[e][g] >= 0.0))
                throw ValidationError("LevelScheme: branching ratios must be >= 0");
    }
}

double LevelScheme::ground_offset_hz(int g) const {
    switch (g) {
        case kHalf: return 0.0;
        case kThreeHalf: return dg1_hz;
        case kFiveHalf: return dg1_hz + dg2_hz;
        default: throw ValidationError("LevelScheme: ground level out of range");
    }
}

double LevelScheme::excited_offset_hz(int e) const {
    switch (e) {
        case kHalf: return 0.0;
        case kThreeHalf: return de1_hz;
        case kFiveHalf: return de1_hz + de2_hz;
        default: throw ValidationError("LevelScheme: excited level out of range");
    }
}

LevelScheme LevelScheme::defaults() {
    LevelScheme scheme;
    // Relative oscillator strengths of the 3H4(1) -> 1D2(1) hyperfine
    // transitions (external literature constants).
    scheme.strength = {{{0.55, 0.38, 0.07},
                        {0.40, 0.60, 0.01},
                        {0.05, 0.02, 0.93}}};
    const double third = 1.0 / 3.0;
    scheme.branching = {{{third, third, third},
                         {third, third, third},
                         {third, third, third}}};
    return scheme;
}

void PopulationState::validate() const {
    const std::size_t n = parked.size();
    if (n == 0) throw ValidationError("PopulationState: empty");
    if (!(class_step_hz > 0.0)) throw ValidationError("PopulationState: class step must be positive");
    for (int g = 0; g < 3; ++g)
        if (occupation[g].size() != n)
            throw ValidationError("PopulationState: inconsistent level lengths");
    for (std::size_t i = 0; i < n; ++i) {
        double sum = parked[i];
        for (int g = 0; g < 3; ++g) {
            if (!(occupation[g][i] >= 0.0))
                throw ValidationError("PopulationState: occupations must be >= 0");
            sum += occupation[g][i];
        }
        if (sum > 1.0 + kConservationTol)
            throw ValidationError("PopulationState: per-class population exceeds 1");
    }
}

PopulationState PopulationState::uniform(double start_hz, double step_hz, std::size_t n_classes) {
    if (!(step_hz > 0.0) || n_classes < 2)
        throw ValidationError("PopulationState: invalid class grid");
    PopulationState state;
    state.class_start_hz = start_hz;
    state.class_step_hz = step_hz;
    for (int g = 0; g < 3; ++g) state.occupation[g].assign(n_classes, 1.0 / 3.0);
    state.parked.assign(n_classes, 0.0);
    return state;
}

void BurnPulseSpec::validate() const {
    if (repetitions < 1) throw ValidationError("BurnPulseSpec: repetitions must be >= 1");
    if (!(width_hz > 0.0)) throw ValidationError("BurnPulseSpec: width must be positive");
    if (!(t_fwhm_s > 0.0)) throw ValidationError("BurnPulseSpec: t_FWHM must be positive");
    if (target_g < 0 || target_g > 2 || target_e < 0 || target_e > 2)
        throw ValidationError("BurnPulseSpec: target levels out of range");
    if (kind == PulseKind::HybridChirp && !(scan_width_hz > 0.0))
        throw ValidationError("BurnPulseSpec: hybrid pulses need a scan width");
}

double BurnPulseSpec::plateau_width_hz() const {
    return width_hz + (kind == PulseKind::HybridChirp ? scan_width_hz : 0.0);
}

double BurnPulseSpec::edge_scale_hz() const { return 1.0 / (kTwoPi * t_fwhm_s); }

void BurnSequence::validate() const {
    if (pulses.empty()) throw ValidationError("BurnSequence: empty pulse list");
    for (const auto& p : pulses) p.validate();
    if (!(window_hz >= 0.0)) throw ValidationError("BurnSequence: window must be >= 0");
    if (!(transfer_efficiency > 0.0) || !(transfer_efficiency <= 1.0))
        throw ValidationError("BurnSequence: transfer efficiency must be in (0, 1]");
    if (!(residual >= 0.0) || !(residual < 1.0))
        throw ValidationError("BurnSequence: residual must be in [0, 1)");
}

BurnSequence BurnSequence::table_defaults() {
    auto sechyp = [](const char* name, double nu_mhz, int g, int e, int reps) {
        BurnPulseSpec p;
        p.name = name;
        p.center_hz = nu_mhz * 1e6;
        p.width_hz = 0.1e6;
        p.t_fwhm_s = 11.2e-6;
        p.t_cutoff_s = 40e-6;
        p.target_g = g;
        p.target_e = e;
        p.repetitions = reps;
        p.kind = PulseKind::Sechyp;
        return p;
    };
    auto cleaner = [](const char* name, double nu_mhz, int reps) {
        BurnPulseSpec p;
        p.name = name;
        p.center_hz = nu_mhz * 1e6;
        p.width_hz = 0.5e6;
        p.t_fwhm_s = 3.0e-6;
        p.t_cutoff_s = 86e-6;
        p.target_g = kHalf;
        p.target_e = kFiveHalf;
        p.repetitions = reps;
        p.kind = PulseKind::HybridChirp;
        p.scan_width_hz = 0.8e6;
        return p;
    };
    BurnSequence seq;
    seq.window_edge_softness_hz = 1.5e6;
    seq.pulses = {
        sechyp("BurnbackAFC1", 21.34, kFiveHalf, kHalf, 20),
        sechyp("BurnbackAFC2", 23.64, kFiveHalf, kHalf, 20),
        cleaner("CleanAFC1", -1.6, 60),
        cleaner("CleanAFC2", -0.4, 20),
        cleaner("CleanAFC3", 0.8, 60),
        cleaner("CleanAFC4", 1.9, 60),
        sechyp("BurnbackAFC3", -16.55, kHalf, kFiveHalf, 20),
        sechyp("BurnbackAFC4", -18.85, kHalf, kFiveHalf, 20),
        sechyp("BurnbackAFC5", -21.15, kHalf, kFiveHalf, 20),
        sechyp("BurnbackAFC6", -23.45, kHalf, kFiveHalf, 20),
    };
    return seq;
}

double transfer_probability(const BurnPulseSpec& pulse, const LevelScheme& scheme,
                            double transfer_efficiency, double detuning_hz) {
    const double plateau = transfer_efficiency * scheme.strength[pulse.target_g][pulse.target_e];
    const double half = 0.5 * pulse.plateau_width_hz();
    const double edge = pulse.edge_scale_hz();
    const double rise = 0.5 * (1.0 + std::tanh((detuning_hz + half) / edge));
    const double fall = 0.5 * (1.0 - std::tanh((detuning_hz - half) / edge));
    // normalized so the on-resonance value equals the plateau height exactly
    const double center = 0.5 * (1.0 + std::tanh(half / edge));
    return plateau * rise * fall / (center * center);
}

std::vector<double> transfer_profile(const BurnPulseSpec& pulse, const LevelScheme& scheme,
                                     double transfer_efficiency,
                                     const std::vector<double>& detunings_hz) {
    pulse.validate();
    scheme.validate();
    std::vector<double> out;
    out.reserve(detunings_hz.size());
    for (double d : detunings_hz)
        out.push_back(transfer_probability(pulse, scheme, transfer_efficiency, d));
    return out;
}

PopulationState burn_window(const PopulationState& state, const LevelScheme& scheme,
                            double width_hz, double residual, double edge_softness_hz) {
    state.validate();
    scheme.validate();
    if (width_hz <= 0.0) return state;  // zero-width window burns nothing
    const double grid_span = state.class_step_hz * static_cast<double>(state.size() - 1);
    if (width_hz > grid_span)
        throw ValidationError("burn_window: window wider than the class grid");

    PopulationState out = state;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double nu0 = state.class_freq(i);
        const double lo = std::min(edge_softness_hz, 0.5 * width_hz);
        const double hi = width_hz - lo;
        bool in_window[3];
        for (int g = 0; g < 3; ++g) {
            in_window[g] = false;
            for (int e = 0; e < 3; ++e) {
                const double nu = nu0 + scheme.transition_offset_hz(g, e);
                if (nu >= lo && nu <= hi) in_window[g] = true;
            }
        }
        int n_escape = 0;
        for (int g = 0; g < 3; ++g)
            if (!in_window[g]) ++n_escape;

        const double cap = residual * state.class_total(i) / 3.0;
        double moved = 0.0;
        for (int g = 0; g < 3; ++g) {
            if (!in_window[g]) continue;
            const double excess = out.occupation[g][i] - cap;
            if (excess > 0.0) {
                out.occupation[g][i] = cap;
                moved += excess;
            }
        }
        if (moved <= 0.0) continue;
        if (n_escape == 0) {
            out.parked[i] += moved;  // no escape level: park outside the model window
        } else {
            for (int g = 0; g < 3; ++g)
                if (!in_window[g]) out.occupation[g][i] += moved / n_escape;
        }
    }
    return out;
}

PopulationState apply_pulse(const PopulationState& state, const BurnPulseSpec& pulse,
                            const LevelScheme& scheme, double transfer_efficiency) {
    state.validate();
    pulse.validate();
    scheme.validate();

    PopulationState out = state;
    const int g_src = pulse.target_g;
    const int e = pulse.target_e;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double nu = state.class_freq(i) + scheme.transition_offset_hz(g_src, e);
        const double p = transfer_probability(pulse, scheme, transfer_efficiency,
                                              nu - pulse.center_hz);
        if (p <= 0.0) continue;
        for (int rep = 0; rep < pulse.repetitions; ++rep) {
            const double transferred = p * out.occupation[g_src][i];
            out.occupation[g_src][i] -= transferred;
            for (int g = 0; g < 3; ++g)
                out.occupation[g][i] += transferred * scheme.branching[e][g];
        }
    }
    return out;
}

AbsorptionProfile absorption_from_state(const PopulationState& state, const LevelScheme& scheme,
                                        const AbsorptionGrid& grid) {
    state.validate();
    scheme.validate();
    if (!(grid.step_hz > 0.0) || grid.size < 2 || !(grid.line_fwhm_hz > 0.0))
        throw ValidationError("absorption_from_state: invalid output grid");

    AbsorptionProfile profile;
    profile.start_hz = grid.start_hz;
    profile.step_hz = grid.step_hz;
    profile.depth.assign(grid.size, 0.0);

    // Unit-area lines keep the profile a class-density integral, so values are
    // stable under class-grid refinement.  Pristine state: (1/3) sum(s) per
    // unit density == background depth.
    double strength_sum = 0.0;
    for (int g = 0; g < 3; ++g)
        for (int e = 0; e < 3; ++e) strength_sum += scheme.strength[g][e];
    const double scale = grid.background_depth / (strength_sum / 3.0);

    const double sigma = grid.line_fwhm_hz * kFwhmToSigma;
    const double area = grid.line_fwhm_hz * kGaussAreaPerFwhm;
    const double reach = 6.0 * sigma;
    const double stop_hz = grid.start_hz + grid.step_hz * static_cast<double>(grid.size - 1);

    for (std::size_t i = 0; i < state.size(); ++i) {
        const double nu0 = state.class_freq(i);
        for (int g = 0; g < 3; ++g) {
            const double occ = state.occupation[g][i];
            if (occ <= 0.0) continue;
            for (int e = 0; e < 3; ++e) {
                const double center = nu0 + scheme.transition_offset_hz(g, e);
                if (center + reach < grid.start_hz || center - reach > stop_hz) continue;
                const double amp =
                    scale * occ * scheme.strength[g][e] * state.class_step_hz / area;
                const auto first = static_cast<std::size_t>(std::max(
                    0.0, std::ceil((center - reach - grid.start_hz) / grid.step_hz)));
                const auto last = static_cast<std::size_t>(std::min(
                    static_cast<double>(grid.size - 1),
                    std::floor((center + reach - grid.start_hz) / grid.step_hz)));
                for (std::size_t k = first; k <= last; ++k)
                    profile.depth[k] +=
                        amp * gaussian_peak(profile.freq_at(k), center, grid.line_fwhm_hz);
            }
        }
    }
    for (double& d : profile.depth) d = std::max(0.0, d);
    return profile;
}

PrepResult run_sequence(const BurnSequence& sequence, const LevelScheme& scheme,
                        const PopulationState& initial, const AbsorptionGrid& grid) {
    sequence.validate();
    scheme.validate();

    PrepResult result;
    result.state = burn_window(initial, scheme, sequence.window_hz, sequence.residual,
                               sequence.window_edge_softness_hz);
    for (const auto& pulse : sequence.pulses)
        result.state = apply_pulse(result.state, pulse, scheme, sequence.transfer_efficiency);
    result.profile = absorption_from_state(result.state, scheme, grid);
    return result;
}

}  // namespace afc::prep
