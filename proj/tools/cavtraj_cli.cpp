// Command-line front end: ground states, BdG spectra, trajectories,
// ensembles and scans, each written to an output directory with a manifest.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "cavtraj/errors.hpp"
#include "cavtraj/experiment.hpp"
#include "cavtraj/io.hpp"

using namespace cavtraj;

namespace {

enum Exit { ok = 0, config_error = 1, numerical_failure = 2, partial_ensemble = 3 };

struct Common {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trajectories;
    std::optional<unsigned> threads;
    std::string out = "out";
    bool force = false;
    bool strict = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_path, "YAML or JSON run configuration");
    cmd->add_option("-p,--preset", c.preset, "start from a named preset (see `presets`)");
    cmd->add_option("--seed", c.seed, "base seed; trajectory k uses seed+k");
    cmd->add_option("-n,--trajectories", c.trajectories, "ensemble size");
    cmd->add_option("--threads", c.threads, "worker threads (0: all cores)");
    cmd->add_option("-o,--out", c.out, "output directory")->capture_default_str();
    cmd->add_flag("-f,--force", c.force, "overwrite an existing output directory");
    cmd->add_flag("--strict-validity", c.strict, "treat validity warnings as errors");
    cmd->add_flag("-q,--quiet", c.quiet, "no progress on stderr");
}

RunConfig resolve(const Common& c) {
    if (!c.config_path.empty() && !c.preset.empty())
        throw ConfigError("give either --config or --preset, not both (a config file may name a preset)");
    RunConfig cfg = !c.config_path.empty() ? load_config(c.config_path)
                    : !c.preset.empty()    ? make_preset(c.preset)
                                           : RunConfig{};
    if (c.seed) cfg.ensemble.base_seed = *c.seed;
    if (c.trajectories) cfg.ensemble.trajectories = *c.trajectories;
    if (c.threads) cfg.ensemble.threads = *c.threads;
    if (c.strict) cfg.strict_validity = true;
    cfg.validate();
    return cfg;
}

void report_validity(const Prepared& p, bool quiet) {
    for (const auto& w : p.validity.warnings) std::cerr << "warning: " << w << '\n';
    if (quiet) return;
    std::cerr << "ground state: mu = " << p.ground->mu << ", energy = " << p.ground->energy
              << ", residual = " << p.ground->residual << " after " << p.ground->iterations
              << " iterations\n";
    if (p.config.targeting.mode > 0)
        std::cerr << "cavity wavenumber " << p.config.model.cavity.wavenumber << " targets mode "
                  << p.config.targeting.mode << " (overlap " << p.target_overlap << ")\n";
}

nlohmann::json validity_json(const ValidityReport& v) {
    return {{"tonks_gamma", v.tonks_gamma},
            {"healing_length", v.healing_length},
            {"atoms_per_healing_length", v.atoms_per_healing_length},
            {"min_site_occupation", v.min_site_occupation},
            {"adiabatic_small_parameter", v.adiabatic_small_parameter},
            {"warnings", v.warnings}};
}

int cmd_presets() {
    for (const auto& name : preset_names()) std::cout << name << "\t" << preset_description(name) << '\n';
    return ok;
}

int cmd_ground_state(const Common& c) {
    RunConfig cfg = resolve(c);
    cfg.initial.bdg_modes = 0;
    cfg.targeting.mode = 0;
    const Prepared p = prepare(cfg);
    report_validity(p, c.quiet);
    OutputDir out(c.out, c.force);
    write_ground_state_csv(out, *p.ground);
    out.write_manifest(p.config, {{"command", "ground-state"},
                                  {"mu", p.ground->mu},
                                  {"energy", p.ground->energy},
                                  {"validity", validity_json(p.validity)}});
    return ok;
}

int cmd_bdg(const Common& c, std::size_t n_modes) {
    RunConfig cfg = resolve(c);
    if (n_modes > 0) cfg.initial.bdg_modes = n_modes;
    if (cfg.initial.bdg_modes == 0) throw ConfigError("bdg needs at least one mode (--modes)");
    cfg.record.bdg_populations = true;
    const Prepared p = prepare(cfg);
    report_validity(p, c.quiet);
    if (!c.quiet && p.modes->discarded > 0)
        std::cerr << "discarded " << p.modes->discarded << " negative-energy modes\n";
    OutputDir out(c.out, c.force);
    write_ground_state_csv(out, *p.ground);
    write_bdg_csv(out, *p.modes, p.config.model.cavity);
    out.write_manifest(p.config, {{"command", "bdg"},
                                  {"mu", p.ground->mu},
                                  {"energies", p.modes->energies()},
                                  {"validity", validity_json(p.validity)}});
    return ok;
}

int cmd_simulate(const Common& c) {
    const Prepared p = prepare(resolve(c));
    report_validity(p, c.quiet);
    OutputDir out(c.out, c.force);
    EnsembleConfig e = make_ensemble_config(p);
    const TrajectoryOutput traj =
        run_trajectory(make_initial_state(e, 0), e.params, e.scheme, e.t_final, e.recorder);
    write_trajectory_csv(out, traj, p);
    out.write_manifest(p.config, {{"command", "simulate"},
                                  {"seeds", {traj.seed}},
                                  {"failed", traj.failed},
                                  {"failure", traj.failure},
                                  {"validity", validity_json(p.validity)}});
    if (traj.failed) {
        std::cerr << "trajectory failed: " << traj.failure << '\n';
        return numerical_failure;
    }
    return ok;
}

int cmd_ensemble(const Common& c, bool resume) {
    const Prepared p = prepare(resolve(c));
    report_validity(p, c.quiet);
    // Resuming reuses the directory that holds the checkpoint.
    OutputDir out(c.out, c.force || resume);
    EnsembleConfig e = make_ensemble_config(p);
    e.checkpoint_path = (out.path() / "checkpoint.json").string();
    const std::size_t n = e.n_trajectories;
    const bool per_traj = p.config.record.per_trajectory_csv;
    e.on_trajectory = [&](std::size_t i, const TrajectoryOutput& t) {
        if (per_traj) write_trajectory_csv(out, t, p, "trajectory_" + std::to_string(i));
        if (!c.quiet) {
            std::fprintf(stderr, "\rtrajectory %zu/%zu%s", i + 1, n, t.failed ? " (failed)" : "");
            std::fflush(stderr);
        }
    };
    const EnsembleStats stats = resume ? resume_ensemble(e) : run_ensemble(e);
    if (!c.quiet) std::fputc('\n', stderr);
    write_ensemble_csv(out, stats, p);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < stats.processed; ++i) seeds.push_back(e.base_seed + i);
    out.write_manifest(p.config, {{"command", "ensemble"},
                                  {"base_seed", e.base_seed},
                                  {"seeds", seeds},
                                  {"requested", n},
                                  {"succeeded", stats.count},
                                  {"failed", stats.failed},
                                  {"params_hash", params_hash(e)},
                                  {"validity", validity_json(p.validity)}});
    if (!stats.failed.empty()) {
        std::cerr << stats.failed.size() << " of " << stats.processed << " trajectories failed\n";
        return partial_ensemble;
    }
    return ok;
}

int cmd_threshold(const Common& c) {
    RunConfig cfg = resolve(c);
    cfg.initial.bdg_modes = 0;
    cfg.targeting.mode = 0;
    if (cfg.scan.pump_scales.empty()) throw ConfigError("scan.pump_scales is empty");
    const Prepared p = prepare(cfg);
    report_validity(p, c.quiet);
    SteadyStateOptions opt;
    opt.damping = cfg.scan.damping;
    opt.seed_strength = cfg.scan.seed_strength;
    const auto scan = threshold_scan(p.config.model, p.grid, cfg.scan.pump_scales, opt);
    OutputDir out(c.out, c.force);
    write_threshold_csv(out, scan);
    std::size_t unconverged = 0;
    for (const auto& pt : scan) unconverged += pt.result.converged ? 0 : 1;
    const double onset = threshold_onset(scan, cfg.scan.onset_level);
    if (!c.quiet) std::cerr << "threshold pump scale: " << onset << '\n';
    out.write_manifest(p.config, {{"command", "threshold-scan"},
                                  {"onset", onset},
                                  {"unconverged_points", unconverged}});
    return unconverged ? numerical_failure : ok;
}

int cmd_wavelength(const Common& c, int mode) {
    RunConfig cfg = resolve(c);
    cfg.targeting.mode = 0;
    if (cfg.initial.bdg_modes < static_cast<std::size_t>(mode)) cfg.initial.bdg_modes = mode;
    cfg.record.bdg_populations = true;
    const Prepared p = prepare(cfg);
    report_validity(p, c.quiet);
    const auto scan = wavelength_scan(p, mode);
    OutputDir out(c.out, c.force);
    write_wavelength_csv(out, scan);
    out.write_manifest(p.config, {{"command", "wavelength-scan"},
                                  {"mode", mode},
                                  {"base_seed", cfg.ensemble.base_seed},
                                  {"trajectories_per_point", cfg.scan.trajectories}});
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic measurement trajectories of a condensate in a driven lossy cavity"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(code_version));

    Common c;
    std::size_t n_modes = 0;
    int scan_mode = 1;
    bool resume = false;

    app.add_subcommand("presets", "list built-in presets");
    auto* gs = app.add_subcommand("ground-state", "solve the ground state and write ground_state.csv");
    add_common(gs, c);
    auto* bdg = app.add_subcommand("bdg", "ground state plus Bogoliubov modes and cavity overlaps");
    add_common(bdg, c);
    bdg->add_option("--modes", n_modes, "number of modes (default from config)");
    auto* sim = app.add_subcommand("simulate", "one trajectory with the configured base seed");
    add_common(sim, c);
    auto* ens = app.add_subcommand("ensemble", "ensemble of trajectories with checkpointing");
    add_common(ens, c);
    ens->add_flag("--resume", resume, "continue from checkpoint.json in the output directory");
    auto* thr = app.add_subcommand("threshold-scan", "self-organised steady states across pump strength");
    add_common(thr, c);
    auto* wl = app.add_subcommand("wavelength-scan", "mode population against cavity wavenumber");
    add_common(wl, c);
    wl->add_option("--mode", scan_mode, "BdG mode to follow")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (app.got_subcommand("presets")) return cmd_presets();
        if (gs->parsed()) return cmd_ground_state(c);
        if (bdg->parsed()) return cmd_bdg(c, n_modes);
        if (sim->parsed()) return cmd_simulate(c);
        if (ens->parsed()) return cmd_ensemble(c, resume);
        if (thr->parsed()) return cmd_threshold(c);
        if (wl->parsed()) return cmd_wavelength(c, scan_mode);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numerical_failure;
    }
    return ok;
}
