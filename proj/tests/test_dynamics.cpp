#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afc/dynamics.hpp"
#include "afc/errors.hpp"
#include "afc/numeric.hpp"
#include "afc/spectra.hpp"
#include "oracles.hpp"

using namespace afc;
using namespace afc::dynamics;

namespace {

CombSpec paper_comb() {
    CombSpec comb;
    comb.peak_count = 4;
    comb.spacing_hz = 2.3e6;
    comb.peak_fwhm_hz = 140e3;
    comb.peak_optical_depth = 45.0;
    return comb;
}

TraceOptions bare_options() {
    TraceOptions opts;
    opts.attrition = false;
    return opts;
}

double peak_in_window(const EmissionTrace& trace, double t_lo, double t_hi) {
    double best = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (trace.time_at(i) >= t_lo && trace.time_at(i) <= t_hi)
            best = std::max(best, trace.intensity[i]);
    return best;
}

}  // namespace

TEST_CASE("stark shift") {
    MaterialSpec mat;
    CHECK(stark_shift_hz(0.0, mat) == 0.0);

    MaterialSpec orthogonal = mat;
    orthogonal.dipole_angle_deg = 90.0;
    CHECK(std::abs(stark_shift_hz(9000.0, orthogonal)) < 1e-6);

    // 54 V across the 6 mm gap; linear in the dipole-rate constant
    const double field = mat.field_for_voltage(54.0);
    CHECK(field == doctest::Approx(9000.0));
    const double omega = stark_shift_hz(field, mat);
    MaterialSpec doubled = mat;
    doubled.dipole_rate_hz_per_v_per_m *= 2.0;
    CHECK(stark_shift_hz(field, doubled) == doctest::Approx(2.0 * omega).epsilon(1e-12));
}

TEST_CASE("stark pulse phase") {
    MaterialSpec mat;

    SUBCASE("zero amplitude gives zero phase") {
        StarkPulse pulse;
        pulse.field_v_per_m = 0.0;
        CHECK(stark_phase_rad(pulse, mat) == 0.0);
    }

    SUBCASE("square pulse with Omega T = 1/4 gives pi/2") {
        StarkPulse pulse;
        pulse.shape = PulseShape::Square;
        pulse.field_v_per_m = 100.0;
        const double omega = stark_shift_hz(pulse.field_v_per_m, mat);
        pulse.duration_s = 1.0 / (4.0 * omega);
        CHECK(stark_phase_rad(pulse, mat) ==
              doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));
    }

    SUBCASE("gaussian pulse area matches the quadrature oracle") {
        StarkPulse pulse;
        pulse.shape = PulseShape::Gaussian;
        pulse.duration_s = 23e-9;
        pulse.field_v_per_m = 9000.0;
        const double omega = stark_shift_hz(pulse.field_v_per_m, mat);
        const double area = oracles::simpson(
            [&](double t) {
                return gaussian_peak(t, pulse.center_s(), pulse.duration_s);
            },
            pulse.start_s - 6.0 * pulse.duration_s, pulse.start_s + 12.0 * pulse.duration_s,
            20000);
        CHECK(stark_phase_rad(pulse, mat) ==
              doctest::Approx(kTwoPi * omega * area).epsilon(1e-10));
        // closed form: 2 pi Omega FWHM sqrt(pi / 4 ln 2)
        CHECK(stark_phase_rad(pulse, mat) ==
              doctest::Approx(kTwoPi * omega * pulse.duration_s * kGaussAreaPerFwhm)
                  .epsilon(1e-12));
    }

    SUBCASE("pi_half_pulse solves the field") {
        const auto pulse = pi_half_pulse(mat, 50e-9);
        CHECK(stark_phase_rad(pulse, mat) ==
              doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));
        // paper calibration: 54 V across the 6 mm gap for the default material
        CHECK(pulse.field_v_per_m == doctest::Approx(9000.0).epsilon(1e-4));
    }
}

TEST_CASE("phase schedule") {
    MaterialSpec mat;
    const double delta = 2.3e6;

    SUBCASE("short pulses kick at their center") {
        StarkTimeline timeline;
        timeline.pulses = {pi_half_pulse(mat, 100e-9)};
        const PhaseSchedule schedule(timeline, mat, delta, 0.10);
        const double center = timeline.pulses[0].center_s();
        CHECK(schedule.phase_plus(center - 1e-9) == 0.0);
        CHECK(schedule.phase_plus(center + 1e-9) ==
              doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));
    }

    SUBCASE("long square pulses accumulate linearly") {
        StarkPulse pulse;
        pulse.shape = PulseShape::Square;
        pulse.start_s = 0.0;
        pulse.duration_s = 0.3 / delta;  // longer than the 10% kick threshold
        pulse.field_v_per_m = 5000.0;
        StarkTimeline timeline;
        timeline.pulses = {pulse};
        const PhaseSchedule schedule(timeline, mat, delta, 0.10);
        const double omega = stark_shift_hz(pulse.field_v_per_m, mat);
        const double t = 0.5 * pulse.duration_s;
        CHECK(schedule.phase_plus(t) == doctest::Approx(kTwoPi * omega * t).epsilon(1e-12));
        CHECK(schedule.phase_plus(1.0 / delta) ==
              doctest::Approx(kTwoPi * omega * pulse.duration_s).epsilon(1e-12));
    }

    SUBCASE("timelines reject overlapping pulses") {
        StarkTimeline timeline;
        timeline.pulses = {pi_half_pulse(mat, 100e-9), pi_half_pulse(mat, 150e-9)};
        CHECK_THROWS_AS(timeline.validate(), ValidationError);
    }
}

TEST_CASE("ensemble sampling") {
    const CombSpec comb = paper_comb();

    SUBCASE("same seed gives bit-identical ensembles") {
        const auto a = sample_ensemble(comb, 5000, 99);
        const auto b = sample_ensemble(comb, 5000, 99);
        CHECK(a.detuning_hz == b.detuning_hz);
        CHECK(a.stark_class == b.stark_class);
        CHECK(a.peak_index == b.peak_index);
        CHECK(a.spatial_phase_rad == b.spatial_phase_rad);
    }

    SUBCASE("per-peak width within 1% at one million ions") {
        const auto ens = sample_ensemble(comb, 1000000, 7);
        const double sigma_expected = comb.peak_fwhm_hz * kFwhmToSigma;
        for (int p = 0; p < comb.peak_count; ++p) {
            double sum = 0.0, sum2 = 0.0;
            std::size_t n = 0;
            const double center = comb.peak_center_hz(p) - comb.center_frequency_hz;
            for (std::size_t i = 0; i < ens.size(); ++i) {
                if (ens.peak_index[i] != p) continue;
                const double d = ens.detuning_hz[i] - center;
                sum += d;
                sum2 += d * d;
                ++n;
            }
            const double mean = sum / static_cast<double>(n);
            const double sigma = std::sqrt(sum2 / static_cast<double>(n) - mean * mean);
            CHECK(sigma == doctest::Approx(sigma_expected).epsilon(0.01));
            // sample mean within 5 sigma / sqrt(N) of the peak center
            CHECK(std::abs(mean) < 5.0 * sigma_expected / std::sqrt(static_cast<double>(n)));
        }
    }

    SUBCASE("class imbalance stays within 5 sqrt(n) across seeds") {
        const std::int64_t n = 10000;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto ens = sample_ensemble(comb, n, seed);
            std::int64_t sum = 0;
            for (auto c : ens.stark_class) sum += c;
            CHECK(std::abs(sum) <= static_cast<std::int64_t>(5.0 * std::sqrt(n)));
        }
    }

    SUBCASE("height multipliers weight the peak occupation") {
        CombSpec weighted = comb;
        weighted.height_multipliers = {3.0, 1.0, 1.0, 1.0};
        const auto ens = sample_ensemble(weighted, 60000, 3);
        std::size_t first = 0;
        for (auto p : ens.peak_index)
            if (p == 0) ++first;
        CHECK(static_cast<double>(first) / ens.size() == doctest::Approx(0.5).epsilon(0.05));
    }

    SUBCASE("too few ions rejected") {
        CHECK_THROWS_AS(sample_ensemble(comb, 7, 1), ValidationError);
    }
}

TEST_CASE("emission trace against the brute-force oracle") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    const auto ens = sample_ensemble(comb, 500, 11);
    const double period = 1.0 / comb.spacing_hz;

    auto compare = [&](const StarkTimeline& timeline, const TraceOptions& opts) {
        const double step = 4e-9;
        const std::size_t n = 500;
        const auto trace = emission_trace(ens, timeline, mat, 0.0, step, n, opts);
        std::vector<double> times;
        for (std::size_t i = 0; i < n; ++i) times.push_back(trace.time_at(i));
        const oracles::BruteForceTrace oracle(ens, timeline, mat, opts);
        const auto expected = oracle.normalized(times);
        double max_val = 0.0;
        for (double v : expected) max_val = std::max(max_val, v);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(trace.intensity[i] - expected[i]) <= 1e-12 * max_val);
    };

    SUBCASE("free running") { compare({}, bare_options()); }
    SUBCASE("two pulses with attrition") {
        StarkTimeline timeline;
        timeline.pulses = {pi_half_pulse(mat, 0.2 * period),
                           pi_half_pulse(mat, 1.3 * period)};
        TraceOptions opts;
        opts.attrition = true;
        compare(timeline, opts);
    }
    SUBCASE("decay envelope enabled") {
        TraceOptions opts = bare_options();
        opts.homogeneous_decay = true;
        compare({}, opts);
    }
}

TEST_CASE("free-running echoes rephase at multiples of 1/Delta") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    const double period = 1.0 / comb.spacing_hz;
    const auto ens = sample_ensemble(comb, 100000, 21);
    const double step = 5e-9;
    const auto trace =
        emission_trace(ens, {}, mat, 0.0, step, 1 + std::size_t(3.4 * period / step),
                       bare_options());

    for (int m = 1; m <= 3; ++m) {
        double best = 0.0;
        double arg = 0.0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const double t = trace.time_at(i);
            if (std::abs(t - m * period) < 0.3 * period && trace.intensity[i] > best) {
                best = trace.intensity[i];
                arg = t;
            }
        }
        CHECK(std::abs(arg - m * period) <= step);
        // envelope agreement within 5%
        const double expected = spectra::efficiency_forward(comb, m * period);
        CHECK(best == doctest::Approx(expected).epsilon(0.05));
    }
    // anchor: first echo equals the forward efficiency at 1/Delta
    CHECK(trace.ref_efficiency ==
          doctest::Approx(spectra::efficiency_forward(comb, period)).epsilon(1e-12));
}

TEST_CASE("grid coarser than the echo width is rejected") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    const auto ens = sample_ensemble(comb, 100, 1);
    const double too_coarse = 1.1 / (4.0 * comb.peak_count * comb.spacing_hz);
    CHECK_THROWS_AS(emission_trace(ens, {}, mat, 0.0, too_coarse, 64, bare_options()),
                    ValidationError);
}

TEST_CASE("phase-only control: adding 2 pi to every pulse phase changes nothing") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    const auto ens = sample_ensemble(comb, 20000, 5);
    const double period = 1.0 / comb.spacing_hz;

    StarkTimeline base;
    base.pulses = {pi_half_pulse(mat, 0.2 * period)};
    StarkTimeline shifted = base;
    shifted.pulses[0].field_v_per_m *= 5.0;  // pi/2 -> pi/2 + 2 pi

    const auto a = emission_trace(ens, base, mat, 0.0, 5e-9, 300, bare_options());
    const auto b = emission_trace(ens, shifted, mat, 0.0, 5e-9, 300, bare_options());
    double peak = 0.0;
    for (double v : a.intensity) peak = std::max(peak, v);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a.intensity[i] - b.intensity[i]) < 1e-9 * peak);
}

TEST_CASE("class exchange symmetry: swapping labels and negating the field") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    auto ens = sample_ensemble(comb, 20000, 17);
    const double period = 1.0 / comb.spacing_hz;

    StarkTimeline timeline;
    timeline.pulses = {pi_half_pulse(mat, 0.3 * period)};
    const auto a = emission_trace(ens, timeline, mat, 0.0, 5e-9, 300, bare_options());

    for (auto& c : ens.stark_class) c = static_cast<std::int8_t>(-c);
    timeline.pulses[0].field_v_per_m = -timeline.pulses[0].field_v_per_m;
    const auto b = emission_trace(ens, timeline, mat, 0.0, 5e-9, 300, bare_options());

    double peak = 0.0;
    for (double v : a.intensity) peak = std::max(peak, v);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a.intensity[i] - b.intensity[i]) < 1e-12 * peak);
}

TEST_CASE("spatial phases are common mode in forward emission") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    auto ens = sample_ensemble(comb, 5000, 23);
    const auto a = emission_trace(ens, {}, mat, 0.0, 5e-9, 200, bare_options());
    for (auto& kz : ens.spatial_phase_rad) kz = 0.0;
    const auto b = emission_trace(ens, {}, mat, 0.0, 5e-9, 200, bare_options());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.intensity[i] == b.intensity[i]);
}

TEST_CASE("echo discreteness away from the rephasing times") {
    // Dirichlet sidelobes of a flat comb sit near the echoes; over the central
    // half of each gap the envelope 1/(M sin(pi d))^2 stays below 1% for a
    // 32-tooth comb.
    CombSpec comb;
    comb.peak_count = 32;
    comb.spacing_hz = 2.3e6;
    comb.peak_fwhm_hz = comb.spacing_hz / 16.0;  // F = 16 >= 10
    comb.peak_optical_depth = 10.0;
    const MaterialSpec mat;
    const auto ens = sample_ensemble(comb, 50000, 31);
    const double period = 1.0 / comb.spacing_hz;
    const double step = 1.0 / (8.0 * comb.peak_count * comb.spacing_hz);
    const auto trace = emission_trace(ens, {}, mat, 0.0, step,
                                      1 + std::size_t(3.2 * period / step), bare_options());

    for (int m = 1; m <= 3; ++m) {
        const double echo_peak = peak_in_window(trace, (m - 0.1) * period, (m + 0.1) * period);
        const double gap = peak_in_window(trace, (m - 1 + 0.75) * period, (m - 0.75) * period);
        CHECK(gap < 0.01 * echo_peak);
    }
}

TEST_CASE("suppression ratio") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    const double period = 1.0 / comb.spacing_hz;

    SUBCASE("mirrored balanced ensemble cancels exactly") {
        const auto ens = mirrored_balanced_ensemble(comb, 20000, 3);
        StarkTimeline pulse;
        pulse.pulses = {pi_half_pulse(mat, 0.3 * period)};
        CHECK(suppression_ratio(ens, pulse, mat, bare_options()) < 1e-20);
    }

    SUBCASE("random ensembles reach the binomial floor") {
        StarkTimeline pulse;
        pulse.pulses = {pi_half_pulse(mat, 0.3 * period)};
        for (std::uint64_t seed = 50; seed < 55; ++seed) {
            const auto ens = sample_ensemble(comb, 100000, seed);
            CHECK(suppression_ratio(ens, pulse, mat, bare_options()) < 1e-3);
        }
    }

    SUBCASE("preconditions enforced") {
        const auto ens = sample_ensemble(comb, 1000, 1);
        StarkTimeline late;
        late.pulses = {pi_half_pulse(mat, 1.2 * period)};
        CHECK_THROWS_AS(suppression_ratio(ens, late, mat, bare_options()), ValidationError);

        StarkTimeline weak;
        weak.pulses = {pi_half_pulse(mat, 0.3 * period)};
        weak.pulses[0].field_v_per_m *= 0.5;  // pi/4, not pi/2
        CHECK_THROWS_AS(suppression_ratio(ens, weak, mat, bare_options()), ValidationError);
    }
}

TEST_CASE("on-demand recall") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    const double period = 1.0 / comb.spacing_hz;
    const auto ens = sample_ensemble(comb, 100000, 77);
    const auto pulse = pi_half_pulse(mat, 0.0);

    SUBCASE("n=2 restores the echo at 869.6 ns") {
        const auto recall = on_demand_recall(ens, 2, pulse, mat, bare_options());
        CHECK(recall.echo_time_s == doctest::Approx(2.0 * period).epsilon(2e-3));
        CHECK(recall.efficiency ==
              doctest::Approx(spectra::efficiency_forward(comb, recall.echo_time_s))
                  .epsilon(0.05));
    }

    SUBCASE("n=1 with the second pulse right after the first matches the free echo") {
        const auto recall = on_demand_recall(ens, 1, pulse, mat, bare_options());
        CHECK(recall.echo_time_s == doctest::Approx(period).epsilon(2e-3));
        CHECK(recall.efficiency ==
              doctest::Approx(spectra::efficiency_forward(comb, period)).epsilon(0.05));
    }

    SUBCASE("with attrition the 10th recall beats the free-running 10th echo by > 10x") {
        TraceOptions opts;
        opts.attrition = true;
        const auto recall = on_demand_recall(ens, 10, pulse, mat, opts);
        const double step = 5e-9;
        const auto free_trace = emission_trace(
            ens, {}, mat, 0.0, step, 1 + std::size_t(10.4 * period / step), opts);
        const double free_tenth =
            peak_in_window(free_trace, 9.7 * period, 10.3 * period);
        CHECK(recall.efficiency > 10.0 * free_tenth);
    }
}

TEST_CASE("echo map") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    const double period = 1.0 / comb.spacing_hz;
    const auto ens = sample_ensemble(comb, 50000, 13);
    const auto pulse = pi_half_pulse(mat, 0.0);
    const double first_start = 0.25 * period - (pulse.center_s() - pulse.start_s);
    const double step = 5e-9;
    const std::size_t n = 1 + std::size_t(4.4 * period / step);

    SUBCASE("restored echo appears at the first rephasing after the second pulse") {
        const std::vector<double> delays = {0.8 * period, 1.8 * period, 2.8 * period};
        const auto traces =
            echo_map(ens, mat, pulse, first_start, delays, 0.0, step, n, bare_options());
        REQUIRE(traces.size() == delays.size());
        for (std::size_t d = 0; d < delays.size(); ++d) {
            const double second_center = 0.25 * period + delays[d];
            const int expected_order = static_cast<int>(std::ceil(second_center / period));
            double best = 0.0;
            int best_order = 0;
            for (int m = 1; m <= 4; ++m) {
                const double peak =
                    peak_in_window(traces[d], (m - 0.2) * period, (m + 0.2) * period);
                if (peak > best) {
                    best = peak;
                    best_order = m;
                }
            }
            CHECK(best_order == expected_order);
        }
    }

    SUBCASE("coincident pulses add to a pi phase and leave echo intensities unchanged") {
        const auto traces =
            echo_map(ens, mat, pulse, first_start, {0.0}, 0.0, step, n, bare_options());
        const auto free_trace = emission_trace(ens, {}, mat, 0.0, step, n, bare_options());
        for (int m = 1; m <= 3; ++m) {
            const double with_pulses =
                peak_in_window(traces[0], (m - 0.2) * period, (m + 0.2) * period);
            const double free_peak =
                peak_in_window(free_trace, (m - 0.2) * period, (m + 0.2) * period);
            CHECK(with_pulses == doctest::Approx(free_peak).epsilon(1e-9));
        }
    }

    SUBCASE("with attrition, delayed recall never exceeds the free-running energy") {
        TraceOptions opts;
        opts.attrition = true;
        const auto free_trace = emission_trace(ens, {}, mat, 0.0, step, n, opts);
        auto total = [](const EmissionTrace& t) {
            double sum = 0.0;
            for (double v : t.intensity) sum += v;
            return sum;
        };
        const double free_total = total(free_trace);
        const auto traces = echo_map(ens, mat, pulse, first_start,
                                     {0.6 * period, 1.7 * period, 3.1 * period}, 0.0, step, n,
                                     opts);
        for (const auto& t : traces) CHECK(total(t) <= free_total * (1.0 + 1e-9));
    }

    SUBCASE("unsorted or negative delays rejected") {
        CHECK_THROWS_AS(
            echo_map(ens, mat, pulse, first_start, {2e-6, 1e-6}, 0.0, step, n, bare_options()),
            ValidationError);
        CHECK_THROWS_AS(
            echo_map(ens, mat, pulse, first_start, {-1e-9}, 0.0, step, n, bare_options()),
            ValidationError);
    }
}

TEST_CASE("homogeneous decay envelope") {
    const CombSpec comb = paper_comb();
    const MaterialSpec mat;
    const double period = 1.0 / comb.spacing_hz;
    const auto ens = sample_ensemble(comb, 20000, 9);
    TraceOptions decay = bare_options();
    decay.homogeneous_decay = true;
    const auto plain = emission_trace(ens, {}, mat, 0.0, 5e-9, 300, bare_options());
    const auto damped = emission_trace(ens, {}, mat, 0.0, 5e-9, 300, decay);
    for (std::size_t i = 0; i < plain.size(); ++i) {
        const double factor = std::exp(-2.0 * plain.time_at(i) / mat.optical_coherence_s);
        CHECK(damped.intensity[i] == doctest::Approx(plain.intensity[i] * factor).epsilon(1e-12));
    }
    (void)period;
}
