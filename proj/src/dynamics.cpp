#include "afc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afc/errors.hpp"
#include "afc/numeric.hpp"
#include "afc/spectra.hpp"

namespace afc::dynamics {

namespace {

/// Unnormalized |sum_j w_j exp(i(2 pi delta_j t + phi_class_j(t)))|^2 at the
/// given times.  Ions are accumulated in storage order (fixed-order
/// reduction), split into a total and a class-signed sum so that the class
/// phase factors multiply outside the ion loop.
std::vector<double> raw_intensity(const IonEnsemble& ens, const PhaseSchedule& schedule,
                                  const std::vector<double>& times) {
    const std::size_t n = ens.size();
    std::vector<double> omega(n), cls(n), w_re(n), w_im(n);
    for (std::size_t i = 0; i < n; ++i) {
        omega[i] = kTwoPi * ens.detuning_hz[i];
        cls[i] = static_cast<double>(ens.stark_class[i]);
        w_re[i] = ens.weight[i].real();
        w_im[i] = ens.weight[i].imag();
    }

    std::vector<double> out(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) {
        const double t = times[m];
        double sum_re = 0.0, sum_im = 0.0;      // sum of w e^{i theta}
        double sgn_re = 0.0, sgn_im = 0.0;      // class-signed sum
        for (std::size_t i = 0; i < n; ++i) {
            const double theta = omega[i] * t;
            const double c = std::cos(theta);
            const double s = std::sin(theta);
            const double re = w_re[i] * c - w_im[i] * s;
            const double im = w_re[i] * s + w_im[i] * c;
            sum_re += re;
            sum_im += im;
            sgn_re += cls[i] * re;
            sgn_im += cls[i] * im;
        }
        // e^{i phi cls} = cos(phi) + i cls sin(phi), so
        // A = cos(phi) * sum + i sin(phi) * signed-sum.
        const double phi = schedule.phase_plus(t);
        const double cp = std::cos(phi);
        const double sp = std::sin(phi);
        const double a_re = cp * sum_re - sp * sgn_im;
        const double a_im = cp * sum_im + sp * sgn_re;
        out[m] = a_re * a_re + a_im * a_im;
    }
    return out;
}

std::vector<double> uniform_times(double start, double step, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = start + step * static_cast<double>(i);
    return t;
}

/// Attrition amplitude-squared factor: product over echoes emitted before t
/// (steps placed midway between echoes) of (1 - eta_fwd(m/Delta) cos^2 phi(m/Delta)).
class AttritionFactor {
public:
    AttritionFactor(const CombSpec& comb, const PhaseSchedule& schedule, bool enabled,
                    double t_max) {
        if (!enabled) return;
        const double period = 1.0 / comb.spacing_hz;
        for (int m = 1; (static_cast<double>(m) + 0.5) * period <= t_max; ++m) {
            const double t_echo = static_cast<double>(m) * period;
            const double c = std::cos(schedule.phase_plus(t_echo));
            const double eta = spectra::efficiency_forward(comb, t_echo) * c * c;
            step_times_.push_back(t_echo + 0.5 * period);
            const double prev = factors_.empty() ? 1.0 : factors_.back();
            factors_.push_back(prev * (1.0 - eta));
        }
    }

    double at(double t) const {
        const auto it = std::upper_bound(step_times_.begin(), step_times_.end(), t);
        const auto idx = static_cast<std::size_t>(it - step_times_.begin());
        return idx == 0 ? 1.0 : factors_[idx - 1];
    }

private:
    std::vector<double> step_times_;
    std::vector<double> factors_;
};

TraceReference measure_reference(const IonEnsemble& ens, const MaterialSpec& material,
                                 const TraceOptions& options) {
    const double period = 1.0 / ens.comb.spacing_hz;
    const double half_width = period / static_cast<double>(ens.comb.peak_count);
    const double lo = period - half_width;
    const double hi = period + half_width;
    const double step = (hi - lo) / static_cast<double>(kReferenceSamples - 1);

    StarkTimeline empty;
    const PhaseSchedule schedule(empty, material, ens.comb.spacing_hz,
                                 options.instantaneous_fraction);
    const auto values = raw_intensity(ens, schedule, uniform_times(lo, step, kReferenceSamples));

    TraceReference ref;
    const PeakSample peak = refine_peak(values, lo, step);
    ref.raw_peak = peak.value;
    ref.peak_time_s = peak.x;
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        integral += 0.5 * (values[i] + values[i + 1]) * step;
    ref.equivalent_width_s = peak.value > 0.0 ? integral / peak.value : 0.0;
    return ref;
}

struct NormalizedWindow {
    std::vector<double> times;
    std::vector<double> values;  // normalized intensity
};

NormalizedWindow evaluate_window(const IonEnsemble& ens, const PhaseSchedule& schedule,
                                 const MaterialSpec& material, const TraceOptions& options,
                                 const TraceReference& ref, std::vector<double> times) {
    NormalizedWindow win;
    win.values = raw_intensity(ens, schedule, times);
    win.times = std::move(times);
    const double eta_ref = spectra::efficiency_forward(ens.comb, 1.0 / ens.comb.spacing_hz);
    const double scale = ref.raw_peak > 0.0 ? eta_ref / ref.raw_peak : 0.0;
    const double t_max = win.times.empty() ? 0.0 : win.times.back();
    const AttritionFactor attrition(ens.comb, schedule, options.attrition, t_max);
    for (std::size_t i = 0; i < win.values.size(); ++i) {
        double v = win.values[i] * scale * attrition.at(win.times[i]);
        if (options.homogeneous_decay)
            v *= std::exp(-2.0 * win.times[i] / material.optical_coherence_s);
        win.values[i] = v;
    }
    return win;
}

}  // namespace

void EmissionTrace::validate() const {
    if (intensity.size() < 2) throw ValidationError("EmissionTrace: need at least 2 samples");
    if (!(step_s > 0.0)) throw ValidationError("EmissionTrace: grid step must be positive");
    for (double v : intensity)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("EmissionTrace: intensities must be finite and >= 0");
}

TraceReference make_reference(const IonEnsemble& ensemble, const MaterialSpec& material,
                              const TraceOptions& options) {
    ensemble.validate();
    material.validate();
    return measure_reference(ensemble, material, options);
}

EmissionTrace emission_trace(const IonEnsemble& ensemble, const StarkTimeline& timeline,
                             const MaterialSpec& material, double start_s, double step_s,
                             std::size_t n_samples, const TraceOptions& options,
                             const TraceReference* reference) {
    ensemble.validate();
    material.validate();
    timeline.validate();
    if (!(start_s >= 0.0)) throw ValidationError("emission_trace: start time must be >= 0");
    if (n_samples < 2) throw ValidationError("emission_trace: need at least 2 samples");
    const double max_step =
        1.0 / (4.0 * static_cast<double>(ensemble.comb.peak_count) * ensemble.comb.spacing_hz);
    if (!(step_s > 0.0) || step_s > max_step)
        throw ValidationError("emission_trace: grid coarser than 1/(4 M Delta)");

    const TraceReference ref =
        reference ? *reference : measure_reference(ensemble, material, options);
    const PhaseSchedule schedule(timeline, material, ensemble.comb.spacing_hz,
                                 options.instantaneous_fraction);
    auto win = evaluate_window(ensemble, schedule, material, options, ref,
                               uniform_times(start_s, step_s, n_samples));

    EmissionTrace trace;
    trace.start_s = start_s;
    trace.step_s = step_s;
    trace.intensity = std::move(win.values);
    trace.ref_time_s = ref.peak_time_s;
    trace.ref_equivalent_width_s = ref.equivalent_width_s;
    trace.ref_efficiency = spectra::efficiency_forward(ensemble.comb, 1.0 / ensemble.comb.spacing_hz);
    return trace;
}

std::vector<EmissionTrace> echo_map(const IonEnsemble& ensemble, const MaterialSpec& material,
                                    const StarkPulse& pulse_template, double first_pulse_start_s,
                                    const std::vector<double>& delays_s, double start_s,
                                    double step_s, std::size_t n_samples,
                                    const TraceOptions& options) {
    ensemble.validate();
    material.validate();
    if (!std::is_sorted(delays_s.begin(), delays_s.end()))
        throw ValidationError("echo_map: delays must be sorted");
    if (!delays_s.empty() && delays_s.front() < 0.0)
        throw ValidationError("echo_map: delays must be non-negative");

    const TraceReference ref = measure_reference(ensemble, material, options);
    std::vector<EmissionTrace> traces;
    traces.reserve(delays_s.size());
    for (double delay : delays_s) {
        StarkPulse first = pulse_template;
        first.start_s = first_pulse_start_s;
        StarkPulse second = first;
        second.start_s = first_pulse_start_s + delay;

        // Overlapping pulses superpose; bypass the timeline overlap check.
        StarkTimeline timeline;
        timeline.pulses = {first, second};
        const PhaseSchedule schedule = PhaseSchedule::from_pulses(
            timeline.pulses, material, ensemble.comb.spacing_hz, options.instantaneous_fraction);
        auto win = evaluate_window(ensemble, schedule, material, options, ref,
                                   uniform_times(start_s, step_s, n_samples));
        EmissionTrace trace;
        trace.start_s = start_s;
        trace.step_s = step_s;
        trace.intensity = std::move(win.values);
        trace.ref_time_s = ref.peak_time_s;
        trace.ref_equivalent_width_s = ref.equivalent_width_s;
        trace.ref_efficiency =
            spectra::efficiency_forward(ensemble.comb, 1.0 / ensemble.comb.spacing_hz);
        traces.push_back(std::move(trace));
    }
    return traces;
}

double suppression_ratio(const IonEnsemble& ensemble, const StarkTimeline& single_pulse,
                         const MaterialSpec& material, const TraceOptions& options) {
    ensemble.validate();
    material.validate();
    single_pulse.validate();
    const double period = 1.0 / ensemble.comb.spacing_hz;
    if (single_pulse.pulses.size() != 1)
        throw ValidationError("suppression_ratio: timeline must contain exactly one pulse");
    const StarkPulse& pulse = single_pulse.pulses.front();
    if (pulse.support_end_s() >= period)
        throw ValidationError("suppression_ratio: the pulse must end before 1/Delta");
    const double phi = stark_phase_rad(pulse, material);
    if (std::abs(std::abs(phi) - std::numbers::pi / 2.0) > 1e-6)
        throw ValidationError("suppression_ratio: the pulse must impart a +-pi/2 phase");

    const TraceReference free_ref = measure_reference(ensemble, material, options);
    const double half_width = period / static_cast<double>(ensemble.comb.peak_count);
    const double lo = period - half_width;
    const double step = 2.0 * half_width / static_cast<double>(kReferenceSamples - 1);
    const PhaseSchedule schedule(single_pulse, material, ensemble.comb.spacing_hz,
                                 options.instantaneous_fraction);
    const auto values =
        raw_intensity(ensemble, schedule, uniform_times(lo, step, kReferenceSamples));
    const PeakSample suppressed = refine_peak(values, lo, step);
    return free_ref.raw_peak > 0.0 ? suppressed.value / free_ref.raw_peak : 0.0;
}

RecallResult on_demand_recall(const IonEnsemble& ensemble, int n,
                              const StarkPulse& pulse_template, const MaterialSpec& material,
                              const TraceOptions& options) {
    ensemble.validate();
    material.validate();
    if (n < 1) throw ValidationError("on_demand_recall: n must be >= 1");

    const double period = 1.0 / ensemble.comb.spacing_hz;
    StarkPulse first = pulse_template;
    first.start_s = std::max(0.0, 0.5 * period - (first.center_s() - first.start_s));
    StarkPulse second = pulse_template;
    const double nominal_center = (static_cast<double>(n) - 0.5) * period;
    second.start_s = nominal_center - (second.center_s() - second.start_s);
    if (second.start_s < first.support_end_s()) second.start_s = first.support_end_s();

    StarkTimeline timeline;
    timeline.pulses = {first, second};
    timeline.validate();

    const TraceReference ref = measure_reference(ensemble, material, options);
    const PhaseSchedule schedule(timeline, material, ensemble.comb.spacing_hz,
                                 options.instantaneous_fraction);
    const double t_echo = static_cast<double>(n) * period;
    const double half_width = period / static_cast<double>(ensemble.comb.peak_count);
    const double lo = t_echo - half_width;
    const double step = 2.0 * half_width / static_cast<double>(kReferenceSamples - 1);
    const auto win = evaluate_window(ensemble, schedule, material, options, ref,
                                     uniform_times(lo, step, kReferenceSamples));
    const PeakSample peak = refine_peak(win.values, lo, step);
    return RecallResult{peak.x, peak.value};
}

}  // namespace afc::dynamics
