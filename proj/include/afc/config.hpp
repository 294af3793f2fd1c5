#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "afc/counting.hpp"
#include "afc/dynamics.hpp"
#include "afc/prep.hpp"
#include "afc/readout.hpp"
#include "afc/types.hpp"

namespace afc::config {

struct EfficiencyCurvePlan {
    double t_start_s = 0.0;
    double t_stop_s = 5e-6;
    double t_step_s = 5e-8;
    bool cross_validate = false;          // also run the ensemble engine
    std::vector<int> cross_validate_orders = {1, 2};
};

struct EchoMapPlan {
    double delay_start_s = 0.0;
    double delay_stop_s = 4.5e-6;
    double delay_step_s = 50e-9;
    double first_pulse_center_s = 217e-9;  // ~0.5/Delta for the paper comb
    double trace_stop_s = 5.2e-6;
    std::int64_t n_ions = 20000;
    bool weak_coherent = false;  // also produce photon-count histograms
};

struct PrepPlan {
    double class_start_hz = -40e6;
    double class_step_hz = 5e3;
    std::size_t class_count = 12001;
    prep::AbsorptionGrid grid;
    prep::BurnSequence sequence = prep::BurnSequence::table_defaults();
};

struct ReadoutPlan {
    std::string source = "comb";  // "comb" or a path to an absorption CSV
    double alpha_l = 0.8;         // peak depth of the synthetic comb (D1 probe scale)
    double margin_hz = 2e6;       // grid margin around the comb when source == "comb"
    double profile_step_hz = 10e3;
    double chirp_rate_hz_per_s = 1e12;
    double amplitude = 1.0;
    bool detector_enabled = true;
    std::string detector_table;  // optional CSV (freq_hz,re,im); empty = single pole
    bool compensate = true;
    double regularization = 1e-3;
    int fit_n_peaks = 0;  // 0: use the comb peak count
};

struct CavityDesignPlan {
    double gamma_hz = 1e3;
    double alpha_l = 1.0;
    double t_s = 100e-6;
    double finesse_min = 2.0;
    double finesse_max = 400.0;
    int finesse_steps = 4000;
};

/// Single declarative run document; defaults reproduce the Pr3+ experiment.
struct RunConfig {
    dynamics::MaterialSpec material;
    CombSpec comb;
    CavitySpec cavity;
    prep::LevelScheme level_scheme;
    counting::DetectorSpec detector;
    counting::ShotPlan plan;

    // Stark pulse template (field = voltage / electrode gap).
    dynamics::PulseShape stark_shape = dynamics::PulseShape::Gaussian;
    double stark_fwhm_s = 23e-9;
    double stark_voltage_v = 54.0;

    std::int64_t n_ions = 1000000;
    bool attrition = true;
    bool homogeneous_decay = false;
    double instantaneous_fraction = 0.10;
    double trace_step_s = 5e-9;
    double readout_detector_bandwidth_hz = 3.5e6;

    std::uint64_t seed_ensemble = 1;
    std::uint64_t seed_detection = 1;

    EfficiencyCurvePlan efficiency_curve;
    EchoMapPlan echo_map;
    PrepPlan prep_plan;
    ReadoutPlan readout_plan;
    CavityDesignPlan cavity_design;

    void validate() const;
    dynamics::StarkPulse stark_pulse(double start_s = 0.0) const;
    dynamics::TraceOptions trace_options() const;
};

/// Paper parameter set.
RunConfig default_config();

/// Parse a JSON document; unknown keys are rejected, missing keys keep their
/// defaults.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& file);

/// Canonical full-document serialization (every key present, sorted).
std::string canonical_json(const RunConfig& cfg);

/// FNV-1a 64 hash of the canonical document, as fixed-width hex.
std::string config_hash(const RunConfig& cfg);

void write_config(const RunConfig& cfg, const std::filesystem::path& file);

}  // namespace afc::config
