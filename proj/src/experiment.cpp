#include "cavtraj/experiment.hpp"

#include <cmath>

#include "cavtraj/errors.hpp"

namespace cavtraj {

namespace {

double abs_overlap(const BdGModeSet& modes, CavitySpec cavity, int mode, double k) {
    cavity.wavenumber = k;
    const auto g = eval_cavity_mode(cavity, modes.ground.psi0.grid());
    return std::abs(overlap_integral(static_cast<std::size_t>(mode), g, modes));
}

}  // namespace

double best_wavenumber(const BdGModeSet& modes, const CavitySpec& cavity, int mode, double k_min,
                       double k_max, std::size_t samples) {
    if (samples < 2 || !(k_max > k_min)) throw ConfigError("bad wavenumber search range");
    const double h = (k_max - k_min) / static_cast<double>(samples - 1);
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double v = abs_overlap(modes, cavity, mode, k_min + h * static_cast<double>(i));
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    // Golden-section refinement inside the neighbouring samples.
    double a = std::max(k_min, k_min + h * (static_cast<double>(best) - 1.0));
    double b = std::min(k_max, k_min + h * (static_cast<double>(best) + 1.0));
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = abs_overlap(modes, cavity, mode, c), fd = abs_overlap(modes, cavity, mode, d);
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = abs_overlap(modes, cavity, mode, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = abs_overlap(modes, cavity, mode, d);
        }
    }
    return 0.5 * (a + b);
}

Prepared prepare(const RunConfig& config) {
    config.validate();
    Prepared p;
    p.config = config;
    p.grid = make_grid(config.grid.n_points, config.grid.extent);

    GroundStateOptions gopt;
    gopt.tol = config.initial.ground_state_tol;
    auto ground = std::make_shared<GroundState>(solve_ground_state(config.model, p.grid, gopt));
    p.ground = ground;

    const bool need_modes = config.initial.bdg_modes > 0 &&
                            (config.record.bdg_populations || config.initial.sample_noise ||
                             config.targeting.mode > 0);
    if (need_modes) {
        p.modes = std::make_shared<BdGModeSet>(solve_bdg(*ground, config.model, config.initial.bdg_modes));
    } else if (config.initial.sample_noise) {
        throw ConfigError("initial.sample_noise needs initial.bdg_modes > 0");
    }

    if (config.targeting.mode > 0) {
        auto& cav = p.config.model.cavity;
        cav.wavenumber = best_wavenumber(*p.modes, cav, config.targeting.mode, config.targeting.k_min,
                                         config.targeting.k_max, config.targeting.samples);
        p.target_overlap =
            overlap_integral(static_cast<std::size_t>(config.targeting.mode),
                             eval_cavity_mode(cav, *p.grid), *p.modes);
    }

    p.validity = validity_diagnostics(ground->psi0, p.config.model);
    if (config.strict_validity && !p.validity.warnings.empty()) {
        std::string msg = "validity check failed:";
        for (const auto& w : p.validity.warnings) msg += "\n  " + w;
        throw ConfigError(msg);
    }
    return p;
}

RecorderConfig make_recorder(const Prepared& p) {
    const RecordConfig& r = p.config.record;
    RecorderConfig rc;
    rc.interval = r.interval;
    rc.density = r.density;
    rc.density_stride = r.density_stride;
    rc.sites = r.sites;
    rc.center_label = r.center_label;
    rc.site_pairs = r.site_pairs;
    if (r.bdg_populations) rc.modes = p.modes;
    rc.wigner_sampled = p.config.initial.sample_noise;
    rc.g1_pairs = r.g1_pairs;
    rc.phase_probes = r.phase_probes;
    rc.store_wiener = r.store_wiener;
    return rc;
}

EnsembleConfig make_ensemble_config(const Prepared& p) {
    const RunConfig& c = p.config;
    EnsembleConfig e;
    e.n_trajectories = c.ensemble.trajectories;
    e.base_seed = c.ensemble.base_seed;
    e.threads = c.ensemble.threads;
    e.params = c.model;
    e.scheme = c.scheme;
    e.t_final = c.t_final;
    e.recorder = make_recorder(p);
    e.initial.ground = p.ground;
    e.initial.modes = p.modes;
    e.initial.sample_noise = c.initial.sample_noise;
    e.initial.temperature = c.initial.temperature;
    e.initial.alpha0 = c.initial.alpha0;
    e.initial.alpha_vacuum_noise = c.initial.alpha_vacuum_noise;
    return e;
}

std::vector<WavelengthPoint> wavelength_scan(const Prepared& p, int mode) {
    if (!p.modes) throw ConfigError("wavelength scan needs BdG modes (initial.bdg_modes > 0)");
    if (p.config.scan.wavenumbers.empty()) throw ConfigError("scan.wavenumbers is empty");
    std::vector<WavelengthPoint> out;
    for (double k : p.config.scan.wavenumbers) {
        EnsembleConfig e = make_ensemble_config(p);
        e.params.cavity.wavenumber = k;
        e.n_trajectories = p.config.scan.trajectories;
        e.t_final = p.config.scan.time;
        e.recorder.modes = p.modes;
        e.recorder.density = false;
        e.recorder.interval = p.config.scan.time;
        const EnsembleStats s = run_ensemble(e);
        const std::size_t last = s.times.size() - 1;
        WavelengthPoint w;
        w.wavenumber = k;
        w.overlap = overlap_integral(static_cast<std::size_t>(mode),
                                     eval_cavity_mode(e.params.cavity, *p.grid), *p.modes);
        const auto col = static_cast<std::size_t>(mode - 1);
        w.mode_population = {s.mean("bdg_population", last, col),
                             s.standard_error("bdg_population", last, col)};
        w.abs_q1 = {s.mean("abs_q1", last), s.standard_error("abs_q1", last)};
        out.push_back(w);
    }
    return out;
}

}  // namespace cavtraj
