// afc: command-line driver reproducing the memory experiments from one
// declarative config.  Exit codes: 0 success, 2 validation error, 3 numeric
// failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "afc/config.hpp"
#include "afc/counting.hpp"
#include "afc/csv.hpp"
#include "afc/dynamics.hpp"
#include "afc/errors.hpp"
#include "afc/prep.hpp"
#include "afc/readout.hpp"
#include "afc/rng.hpp"
#include "afc/spectra.hpp"
#include "afc/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliContext {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool dry_run = false;

    afc::config::RunConfig config;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started;
};

afc::config::RunConfig load_effective_config(const CliContext& ctx) {
    afc::config::RunConfig cfg;
    if (!ctx.config_path.empty()) {
        cfg = afc::config::load_config(ctx.config_path);
    } else if (const char* env = std::getenv("AFC_CONFIG"); env && *env) {
        cfg = afc::config::load_config(env);
    } else {
        cfg = afc::config::default_config();
    }
    if (ctx.seed) {
        cfg.seed_ensemble = *ctx.seed;
        cfg.seed_detection = *ctx.seed;
    }
    cfg.validate();
    return cfg;
}

fs::path prepare_out_dir(CliContext& ctx) {
    if (ctx.out_dir.empty()) throw afc::ValidationError("--out is required for this command");
    fs::path dir(ctx.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const CliContext& ctx, const fs::path& dir) {
    json manifest;
    manifest["config_hash"] = afc::config::config_hash(ctx.config);
    manifest["tool_version"] = afc::kVersion;
    manifest["seeds"] = {{"ensemble", ctx.config.seed_ensemble},
                         {"detection", ctx.config.seed_detection}};
    manifest["plan"] = {{"mean_photons", ctx.config.plan.mean_photons},
                        {"shots_per_cycle", ctx.config.plan.shots_per_cycle},
                        {"cycles", ctx.config.plan.cycles},
                        {"path_transmission", ctx.config.plan.path_transmission}};
    manifest["detector"] = {{"quantum_efficiency", ctx.config.detector.quantum_efficiency},
                            {"dark_rate_hz", ctx.config.detector.dark_rate_hz},
                            {"bin_width_s", ctx.config.detector.bin_width_s}};
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - ctx.started);
    manifest["wall_time_s"] = elapsed.count();
    manifest["outputs"] = ctx.outputs;

    const fs::path tmp = dir / "manifest.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << manifest.dump(2) << '\n';
        if (!out) throw afc::NumericError("manifest write failed");
    }
    fs::rename(tmp, dir / "manifest.json");
}

int finish(CliContext& ctx, const fs::path& dir) {
    write_manifest(ctx, dir);
    std::cout << "config " << afc::config::config_hash(ctx.config) << ", outputs in "
              << dir.string() << '\n';
    return 0;
}

int cmd_efficiency_curve(CliContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& plan = cfg.efficiency_curve;
    afc::EfficiencyCurve curve;
    for (double t = plan.t_start_s; t <= plan.t_stop_s + 0.5 * plan.t_step_s; t += plan.t_step_s)
        curve.points.push_back({t, afc::spectra::efficiency_forward(cfg.comb, t), 0.0});
    if (curve.points.empty())
        throw afc::ValidationError("efficiency-curve: empty storage-time grid");
    if (ctx.dry_run) return 0;

    const fs::path dir = prepare_out_dir(ctx);
    afc::csv::write_efficiency_curve(dir / "efficiency_curve.csv", curve);
    ctx.outputs.push_back("efficiency_curve.csv");

    if (plan.cross_validate) {
        const auto ensemble =
            afc::dynamics::sample_ensemble(cfg.comb, cfg.n_ions, cfg.seed_ensemble);
        auto opts = cfg.trace_options();
        opts.attrition = false;
        std::vector<std::vector<double>> rows;
        for (int n : plan.cross_validate_orders) {
            const auto recall = afc::dynamics::on_demand_recall(
                ensemble, n, cfg.stark_pulse(), cfg.material, opts);
            rows.push_back({static_cast<double>(n), recall.echo_time_s, recall.efficiency,
                            afc::spectra::efficiency_forward(cfg.comb, recall.echo_time_s)});
        }
        afc::csv::write_rows(dir / "cross_validation.csv", "n,t_s,eta_ensemble,eta_model", rows);
        ctx.outputs.push_back("cross_validation.csv");
    }
    return finish(ctx, dir);
}

int cmd_echo_map(CliContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& plan = cfg.echo_map;
    std::vector<double> delays;
    for (double d = plan.delay_start_s; d <= plan.delay_stop_s + 0.5 * plan.delay_step_s;
         d += plan.delay_step_s)
        delays.push_back(d);
    if (delays.empty()) throw afc::ValidationError("echo-map: empty delay grid");
    if (ctx.dry_run) return 0;

    const fs::path dir = prepare_out_dir(ctx);
    const auto ensemble = afc::dynamics::sample_ensemble(cfg.comb, plan.n_ions, cfg.seed_ensemble);
    const auto pulse = cfg.stark_pulse();
    const double first_start = plan.first_pulse_center_s - (pulse.center_s() - pulse.start_s);
    if (first_start < 0.0)
        throw afc::ValidationError("echo-map: first pulse center too early for the pulse shape");
    const auto n_samples =
        static_cast<std::size_t>(std::floor(plan.trace_stop_s / cfg.trace_step_s)) + 1;
    const auto traces = afc::dynamics::echo_map(ensemble, cfg.material, pulse, first_start,
                                                delays, 0.0, cfg.trace_step_s, n_samples,
                                                cfg.trace_options());

    const std::string hash = afc::config::config_hash(cfg);
    std::ofstream index(dir / "index.jsonl", std::ios::binary);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "trace_%04zu.csv", i);
        std::vector<std::vector<double>> rows;
        rows.reserve(traces[i].size());
        for (std::size_t k = 0; k < traces[i].size(); ++k)
            rows.push_back({traces[i].time_at(k), traces[i].intensity[k]});
        afc::csv::write_rows(dir / name, "t_s,intensity", rows);
        ctx.outputs.push_back(name);

        json entry = {{"delay_s", delays[i]},
                      {"trace", name},
                      {"seed", cfg.seed_ensemble},
                      {"config_hash", hash}};
        if (plan.weak_coherent) {
            const auto hist = afc::counting::simulate_detection(
                cfg.plan, traces[i], cfg.detector, afc::derive_seed(cfg.seed_detection, i));
            char hist_name[64];
            std::snprintf(hist_name, sizeof(hist_name), "counts_%04zu.csv", i);
            std::vector<std::vector<double>> hist_rows;
            for (std::size_t b = 0; b < hist.counts.size(); ++b)
                hist_rows.push_back({hist.bin_start_s(b), static_cast<double>(hist.counts[b])});
            afc::csv::write_rows(dir / hist_name, "bin_start_s,counts", hist_rows);
            ctx.outputs.push_back(hist_name);
            entry["counts"] = hist_name;
        }
        index << entry.dump() << '\n';
    }
    index.close();
    ctx.outputs.push_back("index.jsonl");
    return finish(ctx, dir);
}

int cmd_prepare_comb(CliContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& plan = cfg.prep_plan;
    if (ctx.dry_run) return 0;
    const fs::path dir = prepare_out_dir(ctx);
    const auto initial = afc::prep::PopulationState::uniform(plan.class_start_hz,
                                                             plan.class_step_hz, plan.class_count);
    const auto result =
        afc::prep::run_sequence(plan.sequence, cfg.level_scheme, initial, plan.grid);
    afc::csv::write_absorption_profile(dir / "comb_profile.csv", result.profile);
    ctx.outputs.push_back("comb_profile.csv");
    return finish(ctx, dir);
}

int cmd_readout(CliContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& plan = cfg.readout_plan;

    afc::AbsorptionProfile profile;
    if (plan.source == "comb") {
        afc::CombSpec comb = cfg.comb;
        comb.peak_optical_depth = plan.alpha_l;  // D1-probe scale
        const double lo = comb.peak_center_hz(0) - plan.margin_hz;
        const double hi = comb.peak_center_hz(comb.peak_count - 1) + plan.margin_hz;
        const auto n =
            static_cast<std::size_t>(std::ceil((hi - lo) / plan.profile_step_hz)) + 1;
        profile = afc::spectra::build_comb_profile(comb, lo, plan.profile_step_hz, n);
    } else {
        profile = afc::csv::read_absorption_profile(plan.source);
    }
    if (ctx.dry_run) return 0;

    const fs::path dir = prepare_out_dir(ctx);
    const auto chirp = afc::readout::ChirpSpec::covering(profile, plan.chirp_rate_hz_per_s,
                                                         plan.amplitude);
    auto trace = afc::readout::chirp_forward(profile, chirp);
    afc::readout::DetectorResponse detector = afc::readout::DetectorResponse::disabled();
    if (plan.detector_enabled)
        detector = plan.detector_table.empty()
                       ? afc::readout::DetectorResponse::single_pole(
                             cfg.readout_detector_bandwidth_hz)
                       : afc::csv::read_detector_table(plan.detector_table);
    trace = afc::readout::apply_detector(trace, detector);

    std::vector<std::vector<double>> rows;
    rows.reserve(trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k)
        rows.push_back({trace.time_at(k), trace.intensity[k]});
    afc::csv::write_rows(dir / "beat_trace.csv", "t_s,intensity", rows);
    ctx.outputs.push_back("beat_trace.csv");

    afc::readout::DeconvOptions opts;
    opts.compensate_detector = plan.compensate;
    opts.regularization = plan.regularization;
    const auto recovered =
        afc::readout::deconvolve_profile(trace, chirp, &detector, opts);
    afc::csv::write_absorption_profile(dir / "recovered_profile.csv", recovered);
    ctx.outputs.push_back("recovered_profile.csv");

    const int n_peaks = plan.fit_n_peaks > 0 ? plan.fit_n_peaks : cfg.comb.peak_count;
    const auto fit = afc::readout::fit_peaks(recovered, n_peaks);
    std::vector<std::vector<double>> peak_rows;
    for (const auto& p : fit.peaks)
        peak_rows.push_back({p.center_hz, p.fwhm_hz, p.amplitude, p.center_err_hz,
                             p.fwhm_err_hz, p.amplitude_err});
    afc::csv::write_rows(dir / "peak_fits.csv",
                         "center_hz,fwhm_hz,alphaL,center_err_hz,fwhm_err_hz,alphaL_err",
                         peak_rows);
    ctx.outputs.push_back("peak_fits.csv");
    return finish(ctx, dir);
}

int cmd_cavity_design(CliContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& plan = cfg.cavity_design;
    if (ctx.dry_run) return 0;
    const fs::path dir = prepare_out_dir(ctx);

    afc::CombSpec comb = cfg.comb;
    comb.peak_fwhm_hz = plan.gamma_hz;
    comb.peak_optical_depth = plan.alpha_l;
    comb.height_multipliers.clear();

    std::vector<std::vector<double>> rows;
    double best_eta = 0.0, best_f = plan.finesse_min;
    for (int i = 0; i < plan.finesse_steps; ++i) {
        const double f = plan.finesse_min +
                         (plan.finesse_max - plan.finesse_min) * static_cast<double>(i) /
                             static_cast<double>(plan.finesse_steps - 1);
        comb.spacing_hz = f * plan.gamma_hz;
        const double eta = afc::spectra::efficiency_cavity(comb, cfg.cavity, plan.t_s);
        rows.push_back({f, eta});
        if (eta > best_eta) {
            best_eta = eta;
            best_f = f;
        }
    }
    afc::csv::write_rows(dir / "cavity_scan.csv", "finesse,eta", rows);
    ctx.outputs.push_back("cavity_scan.csv");
    std::cout << "max eta " << best_eta << " at finesse " << best_f << '\n';
    return finish(ctx, dir);
}

int cmd_init_config(CliContext& ctx) {
    if (ctx.out_dir.empty()) throw afc::ValidationError("--out is required for init-config");
    if (ctx.dry_run) return 0;
    fs::path out(ctx.out_dir);
    if (!out.has_extension()) {
        fs::create_directories(out);
        out /= "afc_config.json";
    }
    afc::config::write_config(afc::config::default_config(), out);
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stark-controlled atomic-frequency-comb memory simulator"};
    app.set_version_flag("--version", afc::kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    CliContext ctx;
    app.add_option("--config", ctx.config_path, "Run configuration JSON (or $AFC_CONFIG)");
    app.add_option("--out", ctx.out_dir, "Output directory");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override all seeds");
    app.add_flag("--dry-run", ctx.dry_run, "Validate the configuration without computing");

    auto* c_curve = app.add_subcommand("efficiency-curve", "Recall efficiency vs storage time");
    auto* c_map = app.add_subcommand("echo-map", "Emission traces over a pulse-delay sweep");
    auto* c_prep = app.add_subcommand("prepare-comb", "Run the hole-burning sequence");
    auto* c_readout = app.add_subcommand("readout", "Chirped-probe readout round trip");
    auto* c_cavity = app.add_subcommand("cavity-design", "Cavity efficiency over a finesse scan");
    auto* c_init = app.add_subcommand("init-config", "Write the default configuration");

    try {
        app.parse(argc, argv);
        if (seed_opt->count() > 0) ctx.seed = seed_value;
        ctx.started = std::chrono::steady_clock::now();
        ctx.config = load_effective_config(ctx);

        if (c_init->parsed()) return cmd_init_config(ctx);
        if (c_curve->parsed()) return cmd_efficiency_curve(ctx);
        if (c_map->parsed()) return cmd_echo_map(ctx);
        if (c_prep->parsed()) return cmd_prepare_comb(ctx);
        if (c_readout->parsed()) return cmd_readout(ctx);
        if (c_cavity->parsed()) return cmd_cavity_design(ctx);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const afc::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const afc::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
