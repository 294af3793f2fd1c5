// Python bindings for the main simulator operations.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "afc/counting.hpp"
#include "afc/dynamics.hpp"
#include "afc/errors.hpp"
#include "afc/prep.hpp"
#include "afc/readout.hpp"
#include "afc/spectra.hpp"
#include "afc/version.hpp"

namespace py = pybind11;
using namespace afc;

namespace {

std::vector<double> profile_frequencies(const AbsorptionProfile& p) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p.freq_at(i);
    return out;
}

std::vector<double> trace_times(const dynamics::EmissionTrace& t) {
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t.time_at(i);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stark-controlled atomic-frequency-comb memory simulator";
    m.attr("__version__") = kVersion;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

    py::class_<CombSpec>(m, "CombSpec")
        .def(py::init<>())
        .def_readwrite("peak_count", &CombSpec::peak_count)
        .def_readwrite("spacing_hz", &CombSpec::spacing_hz)
        .def_readwrite("peak_fwhm_hz", &CombSpec::peak_fwhm_hz)
        .def_readwrite("peak_optical_depth", &CombSpec::peak_optical_depth)
        .def_readwrite("center_frequency_hz", &CombSpec::center_frequency_hz)
        .def_readwrite("height_multipliers", &CombSpec::height_multipliers)
        .def("peak_center_hz", &CombSpec::peak_center_hz);

    py::class_<CavitySpec>(m, "CavitySpec")
        .def(py::init<>())
        .def(py::init([](double r1, double r2) {
                 CavitySpec c{r1, r2};
                 c.validate();
                 return c;
             }),
             py::arg("r1"), py::arg("r2"))
        .def_readwrite("r1", &CavitySpec::r1)
        .def_readwrite("r2", &CavitySpec::r2);

    py::class_<AbsorptionProfile>(m, "AbsorptionProfile")
        .def(py::init<>())
        .def_readwrite("start_hz", &AbsorptionProfile::start_hz)
        .def_readwrite("step_hz", &AbsorptionProfile::step_hz)
        .def_readwrite("depth", &AbsorptionProfile::depth)
        .def_property_readonly("frequencies", &profile_frequencies);

    py::class_<EfficiencyPoint>(m, "EfficiencyPoint")
        .def(py::init<>())
        .def_readwrite("t_s", &EfficiencyPoint::t_s)
        .def_readwrite("eta", &EfficiencyPoint::eta)
        .def_readwrite("std_error", &EfficiencyPoint::std_error);

    py::class_<EfficiencyCurve>(m, "EfficiencyCurve")
        .def(py::init<>())
        .def_readwrite("points", &EfficiencyCurve::points)
        .def("append", [](EfficiencyCurve& c, double t, double eta, double err) {
            c.points.push_back({t, eta, err});
        });

    // spectra
    m.def("comb_finesse", &spectra::comb_finesse);
    m.def("effective_absorption", &spectra::effective_absorption);
    m.def("gamma_tilde", &spectra::gamma_tilde);
    m.def("efficiency_forward", &spectra::efficiency_forward);
    m.def("efficiency_cavity", &spectra::efficiency_cavity);
    m.def("build_comb_profile", &spectra::build_comb_profile, py::arg("spec"),
          py::arg("start_hz"), py::arg("step_hz"), py::arg("n_samples"));

    py::class_<spectra::AlphaFit>(m, "AlphaFit")
        .def_readonly("alpha_l", &spectra::AlphaFit::alpha_l)
        .def_readonly("std_error", &spectra::AlphaFit::std_error)
        .def_readonly("ci_low", &spectra::AlphaFit::ci_low)
        .def_readonly("ci_high", &spectra::AlphaFit::ci_high)
        .def_readonly("converged", &spectra::AlphaFit::converged);
    m.def("fit_alpha", &spectra::fit_alpha, py::arg("curve"), py::arg("peak_fwhm_hz"),
          py::arg("spacing_hz"));

    // dynamics
    py::class_<dynamics::MaterialSpec>(m, "MaterialSpec")
        .def(py::init<>())
        .def_readwrite("dipole_rate_hz_per_v_per_m",
                       &dynamics::MaterialSpec::dipole_rate_hz_per_v_per_m)
        .def_readwrite("dipole_angle_deg", &dynamics::MaterialSpec::dipole_angle_deg)
        .def_readwrite("electrode_gap_m", &dynamics::MaterialSpec::electrode_gap_m)
        .def_readwrite("excited_lifetime_s", &dynamics::MaterialSpec::excited_lifetime_s)
        .def_readwrite("optical_coherence_s", &dynamics::MaterialSpec::optical_coherence_s);

    py::enum_<dynamics::PulseShape>(m, "PulseShape")
        .value("Square", dynamics::PulseShape::Square)
        .value("Gaussian", dynamics::PulseShape::Gaussian);

    py::class_<dynamics::StarkPulse>(m, "StarkPulse")
        .def(py::init<>())
        .def_readwrite("start_s", &dynamics::StarkPulse::start_s)
        .def_readwrite("shape", &dynamics::StarkPulse::shape)
        .def_readwrite("duration_s", &dynamics::StarkPulse::duration_s)
        .def_readwrite("field_v_per_m", &dynamics::StarkPulse::field_v_per_m);

    py::class_<dynamics::StarkTimeline>(m, "StarkTimeline")
        .def(py::init<>())
        .def_readwrite("pulses", &dynamics::StarkTimeline::pulses);

    py::class_<dynamics::TraceOptions>(m, "TraceOptions")
        .def(py::init<>())
        .def_readwrite("attrition", &dynamics::TraceOptions::attrition)
        .def_readwrite("homogeneous_decay", &dynamics::TraceOptions::homogeneous_decay)
        .def_readwrite("instantaneous_fraction",
                       &dynamics::TraceOptions::instantaneous_fraction);

    py::class_<dynamics::IonEnsemble>(m, "IonEnsemble")
        .def_readonly("comb", &dynamics::IonEnsemble::comb)
        .def_readonly("seed", &dynamics::IonEnsemble::seed)
        .def("__len__", &dynamics::IonEnsemble::size);

    py::class_<dynamics::EmissionTrace>(m, "EmissionTrace")
        .def_readonly("start_s", &dynamics::EmissionTrace::start_s)
        .def_readonly("step_s", &dynamics::EmissionTrace::step_s)
        .def_readonly("intensity", &dynamics::EmissionTrace::intensity)
        .def_readonly("ref_efficiency", &dynamics::EmissionTrace::ref_efficiency)
        .def_property_readonly("times", &trace_times);

    py::class_<dynamics::RecallResult>(m, "RecallResult")
        .def_readonly("echo_time_s", &dynamics::RecallResult::echo_time_s)
        .def_readonly("efficiency", &dynamics::RecallResult::efficiency);

    m.def("stark_shift_hz", &dynamics::stark_shift_hz);
    m.def("stark_phase_rad", &dynamics::stark_phase_rad);
    m.def("pi_half_pulse", &dynamics::pi_half_pulse, py::arg("material"), py::arg("start_s"),
          py::arg("shape") = dynamics::PulseShape::Gaussian, py::arg("duration_s") = 23e-9);
    m.def("sample_ensemble", &dynamics::sample_ensemble, py::arg("spec"), py::arg("n_ions"),
          py::arg("seed"));
    m.def("mirrored_balanced_ensemble", &dynamics::mirrored_balanced_ensemble, py::arg("spec"),
          py::arg("n_pairs"), py::arg("seed"));
    m.def(
        "emission_trace",
        [](const dynamics::IonEnsemble& e, const dynamics::StarkTimeline& tl,
           const dynamics::MaterialSpec& mat, double start, double step, std::size_t n,
           const dynamics::TraceOptions& opts) {
            return dynamics::emission_trace(e, tl, mat, start, step, n, opts);
        },
        py::arg("ensemble"), py::arg("timeline"), py::arg("material"), py::arg("start_s"),
        py::arg("step_s"), py::arg("n_samples"),
        py::arg("options") = dynamics::TraceOptions{});
    m.def("suppression_ratio", &dynamics::suppression_ratio, py::arg("ensemble"),
          py::arg("single_pulse"), py::arg("material"),
          py::arg("options") = dynamics::TraceOptions{});
    m.def("on_demand_recall", &dynamics::on_demand_recall, py::arg("ensemble"), py::arg("n"),
          py::arg("pulse_template"), py::arg("material"),
          py::arg("options") = dynamics::TraceOptions{});

    // prep
    py::class_<prep::LevelScheme>(m, "LevelScheme")
        .def(py::init<>())
        .def_static("defaults", &prep::LevelScheme::defaults)
        .def_readwrite("dg1_hz", &prep::LevelScheme::dg1_hz)
        .def_readwrite("dg2_hz", &prep::LevelScheme::dg2_hz)
        .def_readwrite("de1_hz", &prep::LevelScheme::de1_hz)
        .def_readwrite("de2_hz", &prep::LevelScheme::de2_hz)
        .def("transition_offset_hz", &prep::LevelScheme::transition_offset_hz);

    py::class_<prep::PopulationState>(m, "PopulationState")
        .def_static("uniform", &prep::PopulationState::uniform, py::arg("start_hz"),
                    py::arg("step_hz"), py::arg("n_classes"))
        .def_readonly("class_start_hz", &prep::PopulationState::class_start_hz)
        .def_readonly("class_step_hz", &prep::PopulationState::class_step_hz)
        .def("__len__", &prep::PopulationState::size);

    py::class_<prep::BurnSequence>(m, "BurnSequence")
        .def_static("table_defaults", &prep::BurnSequence::table_defaults)
        .def_readwrite("window_hz", &prep::BurnSequence::window_hz)
        .def_readwrite("transfer_efficiency", &prep::BurnSequence::transfer_efficiency)
        .def_readwrite("residual", &prep::BurnSequence::residual)
        .def_readwrite("window_edge_softness_hz", &prep::BurnSequence::window_edge_softness_hz);

    py::class_<prep::AbsorptionGrid>(m, "AbsorptionGrid")
        .def(py::init<>())
        .def_readwrite("start_hz", &prep::AbsorptionGrid::start_hz)
        .def_readwrite("step_hz", &prep::AbsorptionGrid::step_hz)
        .def_readwrite("size", &prep::AbsorptionGrid::size)
        .def_readwrite("line_fwhm_hz", &prep::AbsorptionGrid::line_fwhm_hz)
        .def_readwrite("background_depth", &prep::AbsorptionGrid::background_depth);

    m.def("burn_window", &prep::burn_window, py::arg("state"), py::arg("scheme"),
          py::arg("width_hz"), py::arg("residual") = 1e-3, py::arg("edge_softness_hz") = 0.0);
    m.def(
        "run_sequence",
        [](const prep::BurnSequence& seq, const prep::LevelScheme& scheme,
           const prep::PopulationState& initial, const prep::AbsorptionGrid& grid) {
            return prep::run_sequence(seq, scheme, initial, grid).profile;
        },
        py::arg("sequence"), py::arg("scheme"), py::arg("initial"), py::arg("grid"),
        "Run the burn sequence and return the absorption profile");

    // readout
    py::class_<readout::ChirpSpec>(m, "ChirpSpec")
        .def(py::init<>())
        .def_static("covering", &readout::ChirpSpec::covering, py::arg("profile"),
                    py::arg("rate_hz_per_s") = 1e12, py::arg("amplitude") = 1.0)
        .def_readwrite("rate_hz_per_s", &readout::ChirpSpec::rate_hz_per_s)
        .def_readwrite("span_hz", &readout::ChirpSpec::span_hz)
        .def_readwrite("start_hz", &readout::ChirpSpec::start_hz)
        .def_readwrite("amplitude", &readout::ChirpSpec::amplitude);

    py::class_<readout::DetectorResponse>(m, "DetectorResponse")
        .def_static("disabled", &readout::DetectorResponse::disabled)
        .def_static("single_pole", &readout::DetectorResponse::single_pole,
                    py::arg("bandwidth_hz"))
        .def("gain", &readout::DetectorResponse::gain);

    py::class_<readout::BeatTrace>(m, "BeatTrace")
        .def_readonly("start_s", &readout::BeatTrace::start_s)
        .def_readonly("step_s", &readout::BeatTrace::step_s)
        .def_readonly("intensity", &readout::BeatTrace::intensity);

    py::class_<readout::DeconvOptions>(m, "DeconvOptions")
        .def(py::init<>())
        .def_readwrite("compensate_detector", &readout::DeconvOptions::compensate_detector)
        .def_readwrite("regularization", &readout::DeconvOptions::regularization);

    py::class_<readout::PeakFit>(m, "PeakFit")
        .def_readonly("center_hz", &readout::PeakFit::center_hz)
        .def_readonly("fwhm_hz", &readout::PeakFit::fwhm_hz)
        .def_readonly("amplitude", &readout::PeakFit::amplitude)
        .def_readonly("center_err_hz", &readout::PeakFit::center_err_hz)
        .def_readonly("fwhm_err_hz", &readout::PeakFit::fwhm_err_hz)
        .def_readonly("amplitude_err", &readout::PeakFit::amplitude_err);

    py::class_<readout::PeakFitResult>(m, "PeakFitResult")
        .def_readonly("peaks", &readout::PeakFitResult::peaks)
        .def_readonly("residual_norm", &readout::PeakFitResult::residual_norm)
        .def_readonly("iterations", &readout::PeakFitResult::iterations);

    m.def("chirp_forward", &readout::chirp_forward, py::arg("profile"), py::arg("chirp"));
    m.def("apply_detector", &readout::apply_detector, py::arg("trace"), py::arg("detector"));
    m.def(
        "deconvolve_profile",
        [](const readout::BeatTrace& trace, const readout::ChirpSpec& chirp,
           const readout::DetectorResponse* det, const readout::DeconvOptions& opts) {
            return readout::deconvolve_profile(trace, chirp, det, opts);
        },
        py::arg("trace"), py::arg("chirp"), py::arg("detector") = nullptr,
        py::arg("options") = readout::DeconvOptions{});
    m.def("fit_peaks", &readout::fit_peaks, py::arg("profile"), py::arg("n_peaks"));

    // counting
    py::class_<counting::DetectorSpec>(m, "DetectorSpec")
        .def(py::init<>())
        .def_readwrite("quantum_efficiency", &counting::DetectorSpec::quantum_efficiency)
        .def_readwrite("dark_rate_hz", &counting::DetectorSpec::dark_rate_hz)
        .def_readwrite("bin_width_s", &counting::DetectorSpec::bin_width_s);

    py::class_<counting::ShotPlan>(m, "ShotPlan")
        .def(py::init<>())
        .def_readwrite("mean_photons", &counting::ShotPlan::mean_photons)
        .def_readwrite("shots_per_cycle", &counting::ShotPlan::shots_per_cycle)
        .def_readwrite("cycles", &counting::ShotPlan::cycles)
        .def_readwrite("path_transmission", &counting::ShotPlan::path_transmission)
        .def("total_shots", &counting::ShotPlan::total_shots);

    py::class_<counting::CountHistogram>(m, "CountHistogram")
        .def_readonly("start_s", &counting::CountHistogram::start_s)
        .def_readonly("bin_width_s", &counting::CountHistogram::bin_width_s)
        .def_readonly("counts", &counting::CountHistogram::counts)
        .def_readonly("expected", &counting::CountHistogram::expected);

    m.def("expected_signal", &counting::expected_signal, py::arg("plan"),
          py::arg("memory_efficiency"), py::arg("detector"));
    m.def("expected_dark", &counting::expected_dark, py::arg("detector"), py::arg("shots"));
    m.def("snr", &counting::snr, py::arg("signal_counts"), py::arg("dark_counts"));
    m.def("fit_path_transmission", &counting::fit_path_transmission, py::arg("target_snr"),
          py::arg("plan"), py::arg("memory_efficiency"), py::arg("detector"));
    m.def("simulate_detection", &counting::simulate_detection, py::arg("plan"), py::arg("trace"),
          py::arg("detector"), py::arg("seed"));
}
