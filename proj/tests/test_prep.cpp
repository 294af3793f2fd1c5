#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "afc/errors.hpp"
#include "afc/numeric.hpp"
#include "afc/prep.hpp"
#include "oracles.hpp"

using namespace afc;
using namespace afc::prep;

namespace {

PopulationState small_state() { return PopulationState::uniform(-45e6, 5e3, 14001); }

AbsorptionGrid default_grid() {
    AbsorptionGrid grid;
    grid.start_hz = -5e6;
    grid.step_hz = 10e3;
    grid.size = 2801;
    return grid;
}

double conservation_drift(const PopulationState& state) {
    double worst = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i)
        worst = std::max(worst, std::abs(state.class_total(i) - 1.0));
    return worst;
}

/// Largest profile value within +-120 kHz of a position.
double peak_at(const AbsorptionProfile& profile, double freq_hz) {
    double best = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (std::abs(profile.freq_at(i) - freq_hz) < 120e3)
            best = std::max(best, profile.depth[i]);
    return best;
}

}  // namespace

TEST_CASE("level scheme validation and transition layout") {
    LevelScheme scheme = LevelScheme::defaults();
    scheme.validate();

    // branching rows must sum to one
    scheme.branching[0][0] += 1e-6;
    CHECK_THROWS_AS(scheme.validate(), ValidationError);

    scheme = LevelScheme::defaults();
    CHECK(scheme.transition_offset_hz(kHalf, kHalf) == 0.0);
    CHECK(scheme.transition_offset_hz(kFiveHalf, kHalf) == doctest::Approx(27.49e6));
    CHECK(scheme.transition_offset_hz(kHalf, kFiveHalf) == doctest::Approx(9.4e6));
    // the 3/2g -> 1/2e and 3/2g -> 3/2e pair is split by de1 = 4.6 MHz
    CHECK(scheme.transition_offset_hz(kThreeHalf, kThreeHalf) -
              scheme.transition_offset_hz(kThreeHalf, kHalf) ==
          doctest::Approx(4.6e6));
}

TEST_CASE("transfer profile") {
    const LevelScheme scheme = LevelScheme::defaults();
    BurnPulseSpec pulse;
    pulse.name = "probe";
    pulse.width_hz = 0.1e6;
    pulse.t_fwhm_s = 11.2e-6;
    pulse.target_g = kFiveHalf;
    pulse.target_e = kFiveHalf;  // s = 0.93
    pulse.repetitions = 1;

    SUBCASE("on-resonance plateau is the efficiency times the strength") {
        CHECK(transfer_probability(pulse, scheme, 0.05, 0.0) ==
              doctest::Approx(0.05 * 0.93).epsilon(1e-9));
        LevelScheme unit = scheme;
        unit.strength[kFiveHalf][kFiveHalf] = 1.0;
        CHECK(transfer_probability(pulse, unit, 0.05, 0.0) ==
              doctest::Approx(0.05).epsilon(1e-9));
    }

    SUBCASE("halving the strength halves the plateau") {
        LevelScheme half = scheme;
        half.strength[kFiveHalf][kFiveHalf] *= 0.5;
        CHECK(transfer_probability(pulse, half, 0.05, 0.0) ==
              doctest::Approx(0.5 * transfer_probability(pulse, scheme, 0.05, 0.0)));
    }

    SUBCASE("five widths away the probability vanishes") {
        const auto probs =
            transfer_profile(pulse, scheme, 0.05, {5.0 * pulse.width_hz, -5.0 * pulse.width_hz});
        CHECK(probs[0] < 1e-4);
        CHECK(probs[1] < 1e-4);
    }

    SUBCASE("hybrid pulses widen the plateau by the scan width") {
        BurnPulseSpec hybrid = pulse;
        hybrid.kind = PulseKind::HybridChirp;
        hybrid.scan_width_hz = 0.8e6;
        hybrid.t_fwhm_s = 3e-6;
        const double inside =
            0.5 * (pulse.width_hz + hybrid.scan_width_hz) - 3.0 * hybrid.edge_scale_hz();
        CHECK(transfer_probability(hybrid, scheme, 0.05, inside) ==
              doctest::Approx(0.05 * 0.93).epsilon(1e-3));
        // the sechyp alone has fallen off out there
        CHECK(transfer_probability(pulse, scheme, 0.05, inside) < 1e-6);
    }
}

TEST_CASE("apply_pulse matches the three-level pump oracle") {
    const LevelScheme scheme = LevelScheme::defaults();
    // single class grid; pulse on resonance with 5/2g -> 1/2e
    PopulationState state = PopulationState::uniform(0.0, 1e3, 3);
    BurnPulseSpec pulse;
    pulse.center_hz = scheme.transition_offset_hz(kFiveHalf, kHalf) + 1e3;
    pulse.width_hz = 0.1e6;
    pulse.t_fwhm_s = 11.2e-6;
    pulse.target_g = kFiveHalf;
    pulse.target_e = kHalf;
    pulse.repetitions = 20;

    const auto out = apply_pulse(state, pulse, scheme, 0.05);
    const double p = transfer_probability(pulse, scheme, 0.05, 0.0);
    const std::array<double, 3> branch = {scheme.branching[kHalf][0], scheme.branching[kHalf][1],
                                          scheme.branching[kHalf][2]};
    const auto expected = oracles::pump_map({1.0 / 3, 1.0 / 3, 1.0 / 3}, kFiveHalf, branch, p, 20);
    for (int g = 0; g < 3; ++g)
        CHECK(out.occupation[g][1] == doctest::Approx(expected[g]).epsilon(1e-12));
    CHECK(conservation_drift(out) < 1e-12);
}

TEST_CASE("repeated pumping with no return leaves (1-p)^reps in the source") {
    LevelScheme scheme = LevelScheme::defaults();
    // all decay routed away from the source level
    scheme.branching[kHalf] = {0.5, 0.5, 0.0};
    PopulationState state = PopulationState::uniform(0.0, 1e3, 3);
    BurnPulseSpec pulse;
    pulse.center_hz = scheme.transition_offset_hz(kFiveHalf, kHalf);
    pulse.width_hz = 0.1e6;
    pulse.t_fwhm_s = 11.2e-6;
    pulse.target_g = kFiveHalf;
    pulse.target_e = kHalf;
    pulse.repetitions = 20;
    LevelScheme unit = scheme;
    unit.strength[kFiveHalf][kHalf] = 1.0;  // plateau = transfer efficiency

    const auto out = apply_pulse(state, pulse, unit, 0.05);
    CHECK(out.occupation[kFiveHalf][0] * 3.0 ==
          doctest::Approx(std::pow(0.95, 20)).epsilon(1e-12));
    CHECK(conservation_drift(out) < 1e-12);
}

TEST_CASE("near-zero strength leaves the state unchanged") {
    LevelScheme scheme = LevelScheme::defaults();
    scheme.strength[kFiveHalf][kHalf] = 1e-9;
    PopulationState state = small_state();
    BurnPulseSpec pulse;
    pulse.center_hz = 21.34e6;
    pulse.width_hz = 0.1e6;
    pulse.t_fwhm_s = 11.2e-6;
    pulse.target_g = kFiveHalf;
    pulse.target_e = kHalf;
    pulse.repetitions = 20;
    const auto out = apply_pulse(state, pulse, scheme, 0.05);
    for (std::size_t i = 0; i < state.size(); ++i)
        for (int g = 0; g < 3; ++g)
            CHECK(std::abs(out.occupation[g][i] - state.occupation[g][i]) < 1e-8);
}

TEST_CASE("burn_window") {
    const LevelScheme scheme = LevelScheme::defaults();

    SUBCASE("zero width is a no-op") {
        const auto state = small_state();
        const auto out = burn_window(state, scheme, 0.0);
        for (int g = 0; g < 3; ++g) CHECK(out.occupation[g] == state.occupation[g]);
    }

    SUBCASE("the window is transparent down to the residual") {
        const auto burned = burn_window(small_state(), scheme, 18e6, 1e-3);
        const auto profile = absorption_from_state(burned, scheme, default_grid());
        // the ideal (unburned) wall depth; the walls just outside the window
        // carry side holes from the redistribution, so compare against the
        // configured background
        const double edge = default_grid().background_depth;
        double worst = 0.0;
        for (std::size_t i = 0; i < profile.size(); ++i) {
            const double nu = profile.freq_at(i);
            if (nu > 0.2e6 && nu < 17.8e6) worst = std::max(worst, profile.depth[i]);
        }
        CHECK(worst <= 1e-3 * edge * 1.05);
        // the virgin background itself is reproduced far from the window
        const auto virgin = absorption_from_state(small_state(), scheme, default_grid());
        CHECK(peak_at(virgin, 9e6) == doctest::Approx(edge).epsilon(0.01));
    }

    SUBCASE("idempotent") {
        const auto once = burn_window(small_state(), scheme, 18e6, 1e-3);
        const auto twice = burn_window(once, scheme, 18e6, 1e-3);
        for (int g = 0; g < 3; ++g)
            for (std::size_t i = 0; i < once.size(); ++i)
                CHECK(twice.occupation[g][i] == doctest::Approx(once.occupation[g][i]));
    }

    SUBCASE("population is conserved, including parked classes") {
        const auto burned = burn_window(small_state(), scheme, 40e6, 1e-3);
        CHECK(conservation_drift(burned) < 1e-12);
        // a 40 MHz window traps some classes with no escape level
        double parked = 0.0;
        for (std::size_t i = 0; i < burned.size(); ++i) parked = std::max(parked, burned.parked[i]);
        CHECK(parked > 0.9);
    }

    SUBCASE("window wider than the class grid rejected") {
        CHECK_THROWS_AS(burn_window(small_state(), scheme, 200e6, 1e-3), ValidationError);
    }
}

TEST_CASE("table sequence produces the comb") {
    const LevelScheme scheme = LevelScheme::defaults();
    const BurnSequence seq = BurnSequence::table_defaults();
    const auto result = run_sequence(seq, scheme, small_state(), default_grid());
    CHECK(conservation_drift(result.state) < 1e-12);

    SUBCASE("four peaks at 2.3 MHz spacing inside the window") {
        const double expected[] = {4.04e6, 6.34e6, 8.64e6, 10.94e6};
        for (double nu : expected) {
            CHECK(peak_at(result.profile, nu) > 0.5);
            // the position is a genuine local maximum near nu
            double best = 0.0, arg = 0.0;
            for (std::size_t i = 0; i < result.profile.size(); ++i) {
                if (std::abs(result.profile.freq_at(i) - nu) < 120e3 &&
                    result.profile.depth[i] > best) {
                    best = result.profile.depth[i];
                    arg = result.profile.freq_at(i);
                }
            }
            CHECK(std::abs(arg - nu) <= 2.0 * result.profile.step_hz);
        }
    }

    SUBCASE("the two low-frequency peaks are strictly higher") {
        const double p1 = peak_at(result.profile, 4.04e6);
        const double p2 = peak_at(result.profile, 6.34e6);
        const double p3 = peak_at(result.profile, 8.64e6);
        const double p4 = peak_at(result.profile, 10.94e6);
        CHECK(std::min(p1, p2) > std::max(p3, p4));
    }

    SUBCASE("absorption is non-negative everywhere") {
        for (double d : result.profile.depth) CHECK(d >= 0.0);
    }
}

TEST_CASE("BurnbackAFC1 alone adds two peaks split by 4.6 MHz") {
    const LevelScheme scheme = LevelScheme::defaults();
    BurnSequence seq = BurnSequence::table_defaults();
    seq.pulses.resize(1);  // keep only BurnbackAFC1
    const auto windowed = burn_window(small_state(), scheme, seq.window_hz, seq.residual,
                                      seq.window_edge_softness_hz);
    const auto before = absorption_from_state(windowed, scheme, default_grid());
    const auto result = run_sequence(seq, scheme, small_state(), default_grid());

    // top two local maxima of the gain profile inside the comb region
    std::vector<double> gain(result.profile.size());
    for (std::size_t i = 0; i < gain.size(); ++i)
        gain[i] = result.profile.depth[i] - before.depth[i];
    std::vector<std::pair<double, double>> peaks;  // (value, freq)
    for (std::size_t i = 1; i + 1 < gain.size(); ++i) {
        const double nu = result.profile.freq_at(i);
        if (nu < 2e6 || nu > 10.5e6) continue;
        if (gain[i] > gain[i - 1] && gain[i] >= gain[i + 1] && gain[i] > 0.1)
            peaks.emplace_back(gain[i], nu);
    }
    std::sort(peaks.rbegin(), peaks.rend());
    REQUIRE(peaks.size() >= 2);
    CHECK(std::abs(std::abs(peaks[0].second - peaks[1].second) - 4.6e6) <=
          2.0 * result.profile.step_hz);
}

TEST_CASE("peak positions converge under class-grid refinement") {
    const LevelScheme scheme = LevelScheme::defaults();
    const BurnSequence seq = BurnSequence::table_defaults();
    const auto coarse = run_sequence(seq, scheme, small_state(), default_grid());
    const auto fine = run_sequence(
        seq, scheme, PopulationState::uniform(-45e6, 2.5e3, 28001), default_grid());
    for (double nu : {4.04e6, 6.34e6, 8.64e6, 10.94e6}) {
        auto locate = [&](const AbsorptionProfile& profile) {
            double best = 0.0, arg = 0.0;
            for (std::size_t i = 0; i < profile.size(); ++i)
                if (std::abs(profile.freq_at(i) - nu) < 150e3 && profile.depth[i] > best) {
                    best = profile.depth[i];
                    arg = profile.freq_at(i);
                }
            return arg;
        };
        CHECK(std::abs(locate(coarse.profile) - locate(fine.profile)) <=
              default_grid().step_hz);
    }
}

TEST_CASE("wider sechyp pulses make broader comb peaks") {
    const LevelScheme scheme = LevelScheme::defaults();
    auto tooth_width = [&](double nu_width) {
        BurnSequence seq = BurnSequence::table_defaults();
        for (auto& p : seq.pulses) p.width_hz = nu_width;
        const auto result = run_sequence(seq, scheme, small_state(), default_grid());
        // peak 3 sits on a clean background, so the half-prominence width is
        // the tooth width
        const double center = 8.64e6;
        double peak = 0.0, base = 1e9;
        for (std::size_t i = 0; i < result.profile.size(); ++i) {
            if (std::abs(result.profile.freq_at(i) - center) > 1e6) continue;
            peak = std::max(peak, result.profile.depth[i]);
            base = std::min(base, result.profile.depth[i]);
        }
        const double half = 0.5 * (peak + base);
        double lo = center, hi = center;
        for (std::size_t i = 0; i < result.profile.size(); ++i) {
            const double nu = result.profile.freq_at(i);
            if (std::abs(nu - center) > 1e6 || result.profile.depth[i] < half) continue;
            lo = std::min(lo, nu);
            hi = std::max(hi, nu);
        }
        return hi - lo;
    };
    const double narrow = tooth_width(0.1e6);
    const double wide = tooth_width(0.5e6);
    CHECK(narrow < 200e3);
    CHECK(wide > 2.0 * narrow);
}

TEST_CASE("empty pulse list is rejected but the bare window is flat") {
    BurnSequence empty;
    empty.pulses.clear();
    CHECK_THROWS_AS(empty.validate(), ValidationError);
}
