#include "afc/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

#include "afc/errors.hpp"

namespace afc::config {

using nlohmann::json;

namespace {

/// Strict object reader: every key must be consumed.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object())
            throw ValidationError("config: " + path_ + " must be an object");
    }

    template <typename T>
    void get(const char* key, T& target) {
        seen_.insert(key);
        if (!node_.contains(key)) return;
        try {
            target = node_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ValidationError("config: bad value for " + path_ + "." + key);
        }
    }

    bool has(const char* key) const { return node_.contains(key); }

    const json* child(const char* key) {
        seen_.insert(key);
        return node_.contains(key) ? &node_.at(key) : nullptr;
    }

    /// Must be called after all keys were consumed; rejects unknown keys.
    void done() const {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ValidationError("config: unknown key " + path_ + "." + it.key());
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

int parse_ground(const std::string& s) {
    if (s == "1/2g") return prep::kHalf;
    if (s == "3/2g") return prep::kThreeHalf;
    if (s == "5/2g") return prep::kFiveHalf;
    throw ValidationError("config: unknown ground level " + s);
}

int parse_excited(const std::string& s) {
    if (s == "1/2e") return prep::kHalf;
    if (s == "3/2e") return prep::kThreeHalf;
    if (s == "5/2e") return prep::kFiveHalf;
    throw ValidationError("config: unknown excited level " + s);
}

std::string ground_name(int g) {
    const char* names[] = {"1/2g", "3/2g", "5/2g"};
    return names[g];
}

std::string excited_name(int e) {
    const char* names[] = {"1/2e", "3/2e", "5/2e"};
    return names[e];
}

void parse_transition(const std::string& s, int& g, int& e) {
    const auto arrow = s.find("->");
    if (arrow == std::string::npos)
        throw ValidationError("config: transition must look like 5/2g->1/2e");
    g = parse_ground(s.substr(0, arrow));
    e = parse_excited(s.substr(arrow + 2));
}

std::array<std::array<double, 3>, 3> parse_table(const json& node, const std::string& path) {
    if (!node.is_array() || node.size() != 3)
        throw ValidationError("config: " + path + " must be a 3x3 array");
    std::array<std::array<double, 3>, 3> out{};
    for (int i = 0; i < 3; ++i) {
        const auto& row = node.at(static_cast<std::size_t>(i));
        if (!row.is_array() || row.size() != 3)
            throw ValidationError("config: " + path + " must be a 3x3 array");
        for (int j = 0; j < 3; ++j) out[i][j] = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return out;
}

json table_json(const std::array<std::array<double, 3>, 3>& table) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({table[i][0], table[i][1], table[i][2]});
    return rows;
}

void parse_material(const json& node, dynamics::MaterialSpec& m) {
    Reader r(node, "material");
    r.get("dipole_rate_hz_per_v_per_m", m.dipole_rate_hz_per_v_per_m);
    r.get("dipole_angle_deg", m.dipole_angle_deg);
    r.get("electrode_gap_m", m.electrode_gap_m);
    r.get("excited_lifetime_s", m.excited_lifetime_s);
    r.get("optical_coherence_time_s", m.optical_coherence_s);
    r.done();
}

void parse_comb(const json& node, CombSpec& c) {
    Reader r(node, "comb");
    r.get("peak_count", c.peak_count);
    r.get("spacing_hz", c.spacing_hz);
    r.get("peak_fwhm_hz", c.peak_fwhm_hz);
    r.get("peak_optical_depth", c.peak_optical_depth);
    r.get("center_frequency_hz", c.center_frequency_hz);
    r.get("height_multipliers", c.height_multipliers);
    r.done();
}

void parse_level_scheme(const json& node, prep::LevelScheme& s) {
    Reader r(node, "level_scheme");
    r.get("dg1_hz", s.dg1_hz);
    r.get("dg2_hz", s.dg2_hz);
    r.get("de1_hz", s.de1_hz);
    r.get("de2_hz", s.de2_hz);
    if (const json* t = r.child("strength")) s.strength = parse_table(*t, "level_scheme.strength");
    if (const json* t = r.child("branching")) s.branching = parse_table(*t, "level_scheme.branching");
    r.done();
}

void parse_sequence(const json& node, prep::BurnSequence& seq) {
    Reader r(node, "prep.sequence");
    r.get("window_hz", seq.window_hz);
    r.get("transfer_efficiency", seq.transfer_efficiency);
    r.get("residual", seq.residual);
    r.get("window_edge_softness_hz", seq.window_edge_softness_hz);
    if (const json* rows = r.child("pulses")) {
        if (!rows->is_array()) throw ValidationError("config: prep.sequence.pulses must be an array");
        seq.pulses.clear();
        std::size_t idx = 0;
        for (const auto& row : *rows) {
            Reader pr(row, "prep.sequence.pulses[" + std::to_string(idx++) + "]");
            prep::BurnPulseSpec p;
            pr.get("name", p.name);
            pr.get("nu_hz", p.center_hz);
            pr.get("nu_width_hz", p.width_hz);
            pr.get("t_fwhm_s", p.t_fwhm_s);
            pr.get("t_cutoff_s", p.t_cutoff_s);
            std::string target;
            pr.get("target", target);
            if (!target.empty()) parse_transition(target, p.target_g, p.target_e);
            pr.get("repetitions", p.repetitions);
            std::string kind = "sechyp";
            pr.get("kind", kind);
            if (kind == "sechyp") {
                p.kind = prep::PulseKind::Sechyp;
            } else if (kind == "hybrid") {
                p.kind = prep::PulseKind::HybridChirp;
            } else {
                throw ValidationError("config: pulse kind must be sechyp or hybrid");
            }
            pr.get("scan_width_hz", p.scan_width_hz);
            pr.done();
            seq.pulses.push_back(std::move(p));
        }
    }
    r.done();
}

void parse_prep(const json& node, PrepPlan& p) {
    Reader r(node, "prep");
    r.get("class_start_hz", p.class_start_hz);
    r.get("class_step_hz", p.class_step_hz);
    r.get("class_count", p.class_count);
    r.get("profile_start_hz", p.grid.start_hz);
    r.get("profile_step_hz", p.grid.step_hz);
    r.get("profile_count", p.grid.size);
    r.get("line_fwhm_hz", p.grid.line_fwhm_hz);
    r.get("background_depth", p.grid.background_depth);
    if (const json* s = r.child("sequence")) parse_sequence(*s, p.sequence);
    r.done();
}

void parse_readout(const json& node, RunConfig& cfg) {
    Reader r(node, "readout");
    r.get("source", cfg.readout_plan.source);
    r.get("alpha_l", cfg.readout_plan.alpha_l);
    r.get("margin_hz", cfg.readout_plan.margin_hz);
    r.get("profile_step_hz", cfg.readout_plan.profile_step_hz);
    r.get("chirp_rate_hz_per_s", cfg.readout_plan.chirp_rate_hz_per_s);
    r.get("amplitude", cfg.readout_plan.amplitude);
    r.get("detector_enabled", cfg.readout_plan.detector_enabled);
    r.get("detector_table", cfg.readout_plan.detector_table);
    r.get("detector_bandwidth_hz", cfg.readout_detector_bandwidth_hz);
    r.get("compensate", cfg.readout_plan.compensate);
    r.get("regularization", cfg.readout_plan.regularization);
    r.get("fit_n_peaks", cfg.readout_plan.fit_n_peaks);
    r.done();
}

}  // namespace

void RunConfig::validate() const {
    material.validate();
    comb.validate();
    cavity.validate();
    level_scheme.validate();
    detector.validate();
    plan.validate();
    if (!(stark_fwhm_s > 0.0)) throw ValidationError("config: stark.fwhm_s must be positive");
    if (n_ions < 2 * comb.peak_count) throw ValidationError("config: ensemble.n_ions too small");
    if (!(trace_step_s > 0.0)) throw ValidationError("config: grids.trace_step_s must be positive");
    if (!(instantaneous_fraction > 0.0))
        throw ValidationError("config: ensemble.instantaneous_fraction must be positive");
    if (!(efficiency_curve.t_step_s > 0.0) ||
        efficiency_curve.t_stop_s < efficiency_curve.t_start_s)
        throw ValidationError("config: efficiency_curve time grid is invalid");
    if (!(echo_map.delay_step_s > 0.0) || echo_map.delay_stop_s < echo_map.delay_start_s)
        throw ValidationError("config: echo_map delay grid is invalid");
    if (echo_map.n_ions < 2 * comb.peak_count)
        throw ValidationError("config: echo_map.n_ions too small");
    if (!(prep_plan.class_step_hz > 0.0) || prep_plan.class_count < 2)
        throw ValidationError("config: prep class grid is invalid");
    if (!(readout_plan.profile_step_hz > 0.0) || !(readout_plan.chirp_rate_hz_per_s > 0.0))
        throw ValidationError("config: readout grids are invalid");
    if (!(readout_detector_bandwidth_hz > 0.0))
        throw ValidationError("config: readout.detector_bandwidth_hz must be positive");
    if (cavity_design.finesse_steps < 2 ||
        !(cavity_design.finesse_min > 0.0) ||
        !(cavity_design.finesse_max > cavity_design.finesse_min))
        throw ValidationError("config: cavity_design finesse grid is invalid");
    if (!(cavity_design.gamma_hz > 0.0) || !(cavity_design.alpha_l >= 0.0) ||
        !(cavity_design.t_s >= 0.0))
        throw ValidationError("config: cavity_design parameters are invalid");
}

dynamics::StarkPulse RunConfig::stark_pulse(double start_s) const {
    dynamics::StarkPulse pulse;
    pulse.start_s = start_s;
    pulse.shape = stark_shape;
    pulse.duration_s = stark_fwhm_s;
    pulse.field_v_per_m = material.field_for_voltage(stark_voltage_v);
    return pulse;
}

dynamics::TraceOptions RunConfig::trace_options() const {
    dynamics::TraceOptions opts;
    opts.attrition = attrition;
    opts.homogeneous_decay = homogeneous_decay;
    opts.instantaneous_fraction = instantaneous_fraction;
    return opts;
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.level_scheme = prep::LevelScheme::defaults();
    cfg.plan.path_transmission = 0.204;  // reproduces the measured SNR, declared in outputs
    return cfg;
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: JSON parse error: ") + e.what());
    }
    RunConfig cfg = default_config();
    {
        Reader r(doc, "$");
        if (const json* n = r.child("material")) parse_material(*n, cfg.material);
        if (const json* n = r.child("comb")) parse_comb(*n, cfg.comb);
        if (const json* n = r.child("cavity")) {
            Reader cr(*n, "cavity");
            cr.get("r1", cfg.cavity.r1);
            cr.get("r2", cfg.cavity.r2);
            cr.done();
        }
        if (const json* n = r.child("level_scheme")) parse_level_scheme(*n, cfg.level_scheme);
        if (const json* n = r.child("detector")) {
            Reader dr(*n, "detector");
            dr.get("quantum_efficiency", cfg.detector.quantum_efficiency);
            dr.get("dark_rate_hz", cfg.detector.dark_rate_hz);
            dr.get("bin_width_s", cfg.detector.bin_width_s);
            dr.done();
        }
        if (const json* n = r.child("plan")) {
            Reader pr(*n, "plan");
            pr.get("mean_photons", cfg.plan.mean_photons);
            pr.get("shots_per_cycle", cfg.plan.shots_per_cycle);
            pr.get("cycles", cfg.plan.cycles);
            pr.get("path_transmission", cfg.plan.path_transmission);
            pr.done();
        }
        if (const json* n = r.child("stark")) {
            Reader sr(*n, "stark");
            std::string shape = cfg.stark_shape == dynamics::PulseShape::Square ? "square" : "gaussian";
            sr.get("shape", shape);
            if (shape == "square") {
                cfg.stark_shape = dynamics::PulseShape::Square;
            } else if (shape == "gaussian") {
                cfg.stark_shape = dynamics::PulseShape::Gaussian;
            } else {
                throw ValidationError("config: stark.shape must be square or gaussian");
            }
            sr.get("fwhm_s", cfg.stark_fwhm_s);
            sr.get("voltage_v", cfg.stark_voltage_v);
            sr.done();
        }
        if (const json* n = r.child("ensemble")) {
            Reader er(*n, "ensemble");
            er.get("n_ions", cfg.n_ions);
            er.get("attrition", cfg.attrition);
            er.get("homogeneous_decay", cfg.homogeneous_decay);
            er.get("instantaneous_fraction", cfg.instantaneous_fraction);
            er.done();
        }
        if (const json* n = r.child("grids")) {
            Reader gr(*n, "grids");
            gr.get("trace_step_s", cfg.trace_step_s);
            gr.done();
        }
        if (const json* n = r.child("seeds")) {
            Reader sr(*n, "seeds");
            sr.get("ensemble", cfg.seed_ensemble);
            sr.get("detection", cfg.seed_detection);
            sr.done();
        }
        if (const json* n = r.child("efficiency_curve")) {
            Reader er(*n, "efficiency_curve");
            er.get("t_start_s", cfg.efficiency_curve.t_start_s);
            er.get("t_stop_s", cfg.efficiency_curve.t_stop_s);
            er.get("t_step_s", cfg.efficiency_curve.t_step_s);
            er.get("cross_validate", cfg.efficiency_curve.cross_validate);
            er.get("cross_validate_orders", cfg.efficiency_curve.cross_validate_orders);
            er.done();
        }
        if (const json* n = r.child("echo_map")) {
            Reader er(*n, "echo_map");
            er.get("delay_start_s", cfg.echo_map.delay_start_s);
            er.get("delay_stop_s", cfg.echo_map.delay_stop_s);
            er.get("delay_step_s", cfg.echo_map.delay_step_s);
            er.get("first_pulse_center_s", cfg.echo_map.first_pulse_center_s);
            er.get("trace_stop_s", cfg.echo_map.trace_stop_s);
            er.get("n_ions", cfg.echo_map.n_ions);
            er.get("weak_coherent", cfg.echo_map.weak_coherent);
            er.done();
        }
        if (const json* n = r.child("prep")) parse_prep(*n, cfg.prep_plan);
        if (const json* n = r.child("readout")) parse_readout(*n, cfg);
        if (const json* n = r.child("cavity_design")) {
            Reader cr(*n, "cavity_design");
            cr.get("gamma_hz", cfg.cavity_design.gamma_hz);
            cr.get("alpha_l", cfg.cavity_design.alpha_l);
            cr.get("t_s", cfg.cavity_design.t_s);
            cr.get("finesse_min", cfg.cavity_design.finesse_min);
            cr.get("finesse_max", cfg.cavity_design.finesse_max);
            cr.get("finesse_steps", cfg.cavity_design.finesse_steps);
            cr.done();
        }
        r.done();
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("config: cannot open " + file.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string canonical_json(const RunConfig& cfg) {
    json doc;
    doc["material"] = {{"dipole_rate_hz_per_v_per_m", cfg.material.dipole_rate_hz_per_v_per_m},
                       {"dipole_angle_deg", cfg.material.dipole_angle_deg},
                       {"electrode_gap_m", cfg.material.electrode_gap_m},
                       {"excited_lifetime_s", cfg.material.excited_lifetime_s},
                       {"optical_coherence_time_s", cfg.material.optical_coherence_s}};
    doc["comb"] = {{"peak_count", cfg.comb.peak_count},
                   {"spacing_hz", cfg.comb.spacing_hz},
                   {"peak_fwhm_hz", cfg.comb.peak_fwhm_hz},
                   {"peak_optical_depth", cfg.comb.peak_optical_depth},
                   {"center_frequency_hz", cfg.comb.center_frequency_hz},
                   {"height_multipliers", cfg.comb.height_multipliers}};
    doc["cavity"] = {{"r1", cfg.cavity.r1}, {"r2", cfg.cavity.r2}};
    doc["level_scheme"] = {{"dg1_hz", cfg.level_scheme.dg1_hz},
                           {"dg2_hz", cfg.level_scheme.dg2_hz},
                           {"de1_hz", cfg.level_scheme.de1_hz},
                           {"de2_hz", cfg.level_scheme.de2_hz},
                           {"strength", table_json(cfg.level_scheme.strength)},
                           {"branching", table_json(cfg.level_scheme.branching)}};
    doc["detector"] = {{"quantum_efficiency", cfg.detector.quantum_efficiency},
                       {"dark_rate_hz", cfg.detector.dark_rate_hz},
                       {"bin_width_s", cfg.detector.bin_width_s}};
    doc["plan"] = {{"mean_photons", cfg.plan.mean_photons},
                   {"shots_per_cycle", cfg.plan.shots_per_cycle},
                   {"cycles", cfg.plan.cycles},
                   {"path_transmission", cfg.plan.path_transmission}};
    doc["stark"] = {{"shape", cfg.stark_shape == dynamics::PulseShape::Square ? "square" : "gaussian"},
                    {"fwhm_s", cfg.stark_fwhm_s},
                    {"voltage_v", cfg.stark_voltage_v}};
    doc["ensemble"] = {{"n_ions", cfg.n_ions},
                       {"attrition", cfg.attrition},
                       {"homogeneous_decay", cfg.homogeneous_decay},
                       {"instantaneous_fraction", cfg.instantaneous_fraction}};
    doc["grids"] = {{"trace_step_s", cfg.trace_step_s}};
    doc["seeds"] = {{"ensemble", cfg.seed_ensemble}, {"detection", cfg.seed_detection}};
    doc["efficiency_curve"] = {{"t_start_s", cfg.efficiency_curve.t_start_s},
                               {"t_stop_s", cfg.efficiency_curve.t_stop_s},
                               {"t_step_s", cfg.efficiency_curve.t_step_s},
                               {"cross_validate", cfg.efficiency_curve.cross_validate},
                               {"cross_validate_orders", cfg.efficiency_curve.cross_validate_orders}};
    doc["echo_map"] = {{"delay_start_s", cfg.echo_map.delay_start_s},
                       {"delay_stop_s", cfg.echo_map.delay_stop_s},
                       {"delay_step_s", cfg.echo_map.delay_step_s},
                       {"first_pulse_center_s", cfg.echo_map.first_pulse_center_s},
                       {"trace_stop_s", cfg.echo_map.trace_stop_s},
                       {"n_ions", cfg.echo_map.n_ions},
                       {"weak_coherent", cfg.echo_map.weak_coherent}};
    json pulses = json::array();
    for (const auto& p : cfg.prep_plan.sequence.pulses) {
        pulses.push_back({{"name", p.name},
                          {"nu_hz", p.center_hz},
                          {"nu_width_hz", p.width_hz},
                          {"t_fwhm_s", p.t_fwhm_s},
                          {"t_cutoff_s", p.t_cutoff_s},
                          {"target", ground_name(p.target_g) + "->" + excited_name(p.target_e)},
                          {"repetitions", p.repetitions},
                          {"kind", p.kind == prep::PulseKind::Sechyp ? "sechyp" : "hybrid"},
                          {"scan_width_hz", p.scan_width_hz}});
    }
    doc["prep"] = {{"class_start_hz", cfg.prep_plan.class_start_hz},
                   {"class_step_hz", cfg.prep_plan.class_step_hz},
                   {"class_count", cfg.prep_plan.class_count},
                   {"profile_start_hz", cfg.prep_plan.grid.start_hz},
                   {"profile_step_hz", cfg.prep_plan.grid.step_hz},
                   {"profile_count", cfg.prep_plan.grid.size},
                   {"line_fwhm_hz", cfg.prep_plan.grid.line_fwhm_hz},
                   {"background_depth", cfg.prep_plan.grid.background_depth},
                   {"sequence",
                    {{"window_hz", cfg.prep_plan.sequence.window_hz},
                     {"transfer_efficiency", cfg.prep_plan.sequence.transfer_efficiency},
                     {"residual", cfg.prep_plan.sequence.residual},
                     {"window_edge_softness_hz", cfg.prep_plan.sequence.window_edge_softness_hz},
                     {"pulses", pulses}}}};
    doc["readout"] = {{"source", cfg.readout_plan.source},
                      {"alpha_l", cfg.readout_plan.alpha_l},
                      {"margin_hz", cfg.readout_plan.margin_hz},
                      {"profile_step_hz", cfg.readout_plan.profile_step_hz},
                      {"chirp_rate_hz_per_s", cfg.readout_plan.chirp_rate_hz_per_s},
                      {"amplitude", cfg.readout_plan.amplitude},
                      {"detector_enabled", cfg.readout_plan.detector_enabled},
                      {"detector_table", cfg.readout_plan.detector_table},
                      {"detector_bandwidth_hz", cfg.readout_detector_bandwidth_hz},
                      {"compensate", cfg.readout_plan.compensate},
                      {"regularization", cfg.readout_plan.regularization},
                      {"fit_n_peaks", cfg.readout_plan.fit_n_peaks}};
    doc["cavity_design"] = {{"gamma_hz", cfg.cavity_design.gamma_hz},
                            {"alpha_l", cfg.cavity_design.alpha_l},
                            {"t_s", cfg.cavity_design.t_s},
                            {"finesse_min", cfg.cavity_design.finesse_min},
                            {"finesse_max", cfg.cavity_design.finesse_max},
                            {"finesse_steps", cfg.cavity_design.finesse_steps}};
    return doc.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = canonical_json(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

void write_config(const RunConfig& cfg, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ValidationError("config: cannot write " + file.string());
    out << canonical_json(cfg) << '\n';
}

}  // namespace afc::config
