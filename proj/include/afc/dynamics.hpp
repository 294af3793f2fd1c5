#pragma once

#include <cstdint>
#include <vector>

#include "afc/ensemble.hpp"
#include "afc/stark.hpp"
#include "afc/types.hpp"

namespace afc::dynamics {

struct TraceOptions {
    /// Deplete remaining excitation by sqrt(1 - eta_echo) after every
    /// unsuppressed rephasing (model extension; disable for the bare
    /// collective-excitation dynamics).
    bool attrition = true;
    /// Multiply intensities by exp(-2 t / T2) using the material coherence
    /// time.  Off by default: spontaneous decay and homogeneous dephasing are
    /// neglected in the bare model.
    bool homogeneous_decay = false;
    /// Pulses shorter than this fraction of 1/Delta act as phase kicks.
    double instantaneous_fraction = 0.10;
};

/// Normalized forward-emission intensity on a uniform time grid.
/// Normalization anchor: the peak of the first free-running echo (empty
/// timeline, no decay envelope) equals the analytic forward efficiency at
/// t = 1/Delta.
struct EmissionTrace {
    double start_s = 0.0;
    double step_s = 0.0;
    std::vector<double> intensity;

    // Normalization reference (first free echo).
    double ref_time_s = 0.0;              // location of the anchor echo peak
    double ref_equivalent_width_s = 0.0;  // integral / peak over the anchor window
    double ref_efficiency = 0.0;          // analytic efficiency at the anchor

    std::size_t size() const { return intensity.size(); }
    double time_at(std::size_t i) const { return start_s + step_s * static_cast<double>(i); }
    void validate() const;
};

// Anchor-echo window contract: the first free echo is measured on
// [1/Delta - w, 1/Delta + w] with w = 1/(M Delta), sampled with
// kReferenceSamples points and refined by a three-point parabola.
inline constexpr std::size_t kReferenceSamples = 129;

struct TraceReference {
    double raw_peak = 0.0;            // unnormalized first-echo peak intensity
    double peak_time_s = 0.0;
    double equivalent_width_s = 0.0;  // integral / peak over the anchor window
};

/// Measure the free first echo used to anchor absolute efficiencies.
TraceReference make_reference(const IonEnsemble& ensemble, const MaterialSpec& material,
                              const TraceOptions& options = {});

/// Collective-emission intensity under a Stark timeline.  The grid step must
/// resolve the echo width: step <= 1/(4 M Delta).  Pass a precomputed
/// reference to avoid re-measuring the anchor echo.
EmissionTrace emission_trace(const IonEnsemble& ensemble, const StarkTimeline& timeline,
                             const MaterialSpec& material, double start_s, double step_s,
                             std::size_t n_samples, const TraceOptions& options = {},
                             const TraceReference* reference = nullptr);

/// One trace per pulse delay; the two pulses may overlap at short delays, in
/// which case their field contributions superpose.
std::vector<EmissionTrace> echo_map(const IonEnsemble& ensemble, const MaterialSpec& material,
                                    const StarkPulse& pulse_template, double first_pulse_start_s,
                                    const std::vector<double>& delays_s, double start_s,
                                    double step_s, std::size_t n_samples,
                                    const TraceOptions& options = {});

/// Peak intensity at 1/Delta with a single +-pi/2 pulse divided by the free
/// echo peak.  Expected scale: ((N+ - N-) / (N+ + N-))^2.
double suppression_ratio(const IonEnsemble& ensemble, const StarkTimeline& single_pulse,
                         const MaterialSpec& material, const TraceOptions& options = {});

struct RecallResult {
    double echo_time_s = 0.0;
    double efficiency = 0.0;
};

/// Two-pulse on-demand recall of the echo at n/Delta: the first +-pi/2 pulse
/// is centered at 0.5/Delta, the second at (n - 0.5)/Delta (or immediately
/// after the first for n = 1).
RecallResult on_demand_recall(const IonEnsemble& ensemble, int n,
                              const StarkPulse& pulse_template, const MaterialSpec& material,
                              const TraceOptions& options = {});

}  // namespace afc::dynamics
