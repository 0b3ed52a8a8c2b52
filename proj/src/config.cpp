#include "cavtraj/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "cavtraj/errors.hpp"

namespace cavtraj {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string where(const std::string& source, const YAML::Mark& m) {
    if (m.is_null()) return source;
    return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

// One mapping in the config. Keys are consumed by get(); finish() rejects
// whatever is left over.
class Section {
public:
    Section(YAML::Node node, std::string path, const std::string& source)
        : node_(node), path_(std::move(path)), source_(source) {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            throw ConfigError(where(source_, node_.Mark()) + ": section '" + path_ +
                              "' must be a mapping");
    }

    bool has(const char* key) const { return node_ && node_.IsMap() && node_[key]; }

    YAML::Node raw(const char* key) {
        used_.insert(key);
        const YAML::Node& n = node_;  // const lookup never inserts
        if (n && n.IsMap()) {
            if (YAML::Node v = n[key]; v.IsDefined()) return v;
        }
        return YAML::Node(YAML::NodeType::Undefined);
    }

    template <class T>
    bool get(const char* key, T& out) {
        YAML::Node v = raw(key);
        if (!v) return false;
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(where(source_, v.Mark()) + ": bad value for '" + path_ + "." + key + "'");
        }
        return true;
    }

    template <class T>
    std::optional<T> opt(const char* key) {
        T v{};
        if (get(key, v)) return v;
        return std::nullopt;
    }

    bool get_complex(const char* key, cplx& out) {
        YAML::Node v = raw(key);
        if (!v) return false;
        try {
            if (v.IsSequence()) {
                if (v.size() != 2) throw YAML::Exception(v.Mark(), "pair");
                out = cplx(v[0].as<double>(), v[1].as<double>());
            } else {
                out = cplx(v.as<double>(), 0.0);
            }
        } catch (const YAML::Exception&) {
            throw ConfigError(where(source_, v.Mark()) + ": '" + path_ + "." + key +
                              "' must be a number or a [re, im] pair");
        }
        return true;
    }

    Section sub(const char* key) { return Section(raw(key), path_ + "." + key, source_); }

    std::string location(const char* key) const {
        return where(source_, node_ && node_[key] ? node_[key].Mark() : node_.Mark());
    }

    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string k = it->first.as<std::string>();
            if (!used_.count(k))
                throw ConfigError(where(source_, it->first.Mark()) + ": unknown key '" + k +
                                  "' in section '" + path_ + "'");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    const std::string& source_;
    std::set<std::string> used_;
};

PumpProfile::Kind pump_kind(const std::string& s, const std::string& loc) {
    if (s == "zero") return PumpProfile::Kind::Zero;
    if (s == "uniform") return PumpProfile::Kind::Uniform;
    if (s == "gaussian") return PumpProfile::Kind::Gaussian;
    throw ConfigError(loc + ": unknown pump profile '" + s + "' (zero, uniform or gaussian)");
}

std::string pump_kind_name(PumpProfile::Kind k) {
    switch (k) {
        case PumpProfile::Kind::Zero: return "zero";
        case PumpProfile::Kind::Uniform: return "uniform";
        case PumpProfile::Kind::Gaussian: return "gaussian";
    }
    return "zero";
}

template <class F>
auto rethrow_at(const std::string& loc, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(loc + ": " + e.what());
    }
}

void apply(RunConfig& c, const YAML::Node& root, const std::string& source) {
    Section top(root, "config", source);
    top.raw("preset");  // consumed by the caller

    {
        Section s = top.sub("grid");
        s.get("n_points", c.grid.n_points);
        s.get("extent", c.grid.extent);
        s.finish();
    }
    {
        Section s = top.sub("trap");
        s.get("harmonic_strength", c.model.trap.harmonic_strength);
        s.get("lattice_wavenumber", c.model.trap.lattice_wavenumber);
        s.get("lattice_depth_s", c.model.trap.lattice_depth_s);
        if (auto depth = s.opt<double>("lattice_depth")) {
            // Absolute depth in hbar*omega; converted to recoil units.
            if (!(c.model.trap.lattice_wavenumber > 0.0))
                throw ConfigError(s.location("lattice_depth") +
                                  ": lattice_depth needs a positive lattice_wavenumber");
            c.model.trap.lattice_depth_s = *depth / c.model.trap.recoil_energy();
        }
        s.finish();
    }

    std::optional<double> g0_raw, delta_raw, g0_rs;
    {
        Section s = top.sub("cavity");
        auto& cav = c.model.cavity;
        s.get("g0_sq_over_delta", cav.g0_sq_over_delta);
        g0_rs = s.opt<double>("g0_over_sqrt_delta");
        g0_raw = s.opt<double>("g0");
        delta_raw = s.opt<double>("delta_pa");
        if (g0_raw.has_value() != delta_raw.has_value())
            throw ConfigError(s.location(g0_raw ? "g0" : "delta_pa") +
                              ": raw couplings need both g0 and delta_pa");
        if (g0_rs) cav.g0_sq_over_delta = *g0_rs * *g0_rs;
        if (g0_raw) {
            if (*delta_raw == 0.0) throw ConfigError(s.location("delta_pa") + ": delta_pa must be nonzero");
            cav.g0_sq_over_delta = *g0_raw * *g0_raw / *delta_raw;
        }
        s.get("wavenumber", cav.wavenumber);
        s.get("phase_offset", cav.phase_offset);
        s.get("kappa", cav.kappa);
        s.get("delta_pc", cav.delta_pc);
        s.get_complex("eta", cav.eta);
        s.get("photon_scale_n", cav.photon_scale_n);
        s.get("optimize_wavenumber_for_mode", c.targeting.mode);
        if (YAML::Node r = s.raw("wavenumber_range")) {
            try {
                if (!r.IsSequence() || r.size() != 2) throw YAML::Exception(r.Mark(), "pair");
                c.targeting.k_min = r[0].as<double>();
                c.targeting.k_max = r[1].as<double>();
            } catch (const YAML::Exception&) {
                throw ConfigError(where(source, r.Mark()) + ": wavenumber_range must be [min, max]");
            }
        }
        s.get("wavenumber_samples", c.targeting.samples);
        s.finish();
    }
    {
        Section s = top.sub("pump");
        auto& p = c.model.pump;
        if (auto kind = s.opt<std::string>("profile")) p.kind = pump_kind(*kind, s.location("profile"));
        s.get("h0g0_over_delta", p.h0g0_over_delta);
        if (auto v = s.opt<double>("h0_sq_over_delta")) p.h0_sq_over_delta = *v;
        if (auto v = s.opt<double>("h0_over_sqrt_delta")) {
            const double g = c.model.cavity.g0_sq_over_delta;
            if (!(g > 0.0))
                throw ConfigError(s.location("h0_over_sqrt_delta") +
                                  ": h0_over_sqrt_delta needs a positive g0^2/delta_pa");
            p.h0g0_over_delta = *v * std::sqrt(g);
            p.h0_sq_over_delta = *v * *v;
        }
        if (auto h0 = s.opt<double>("h0")) {
            if (!g0_raw)
                throw ConfigError(s.location("h0") + ": raw h0 needs cavity.g0 and cavity.delta_pa");
            p.h0g0_over_delta = *h0 * *g0_raw / *delta_raw;
            p.h0_sq_over_delta = *h0 * *h0 / *delta_raw;
        }
        if (auto cm = s.opt<double>("h2g2_over_kappa_delta2")) {
            if (*cm < 0.0)
                throw ConfigError(s.location("h2g2_over_kappa_delta2") + ": must be non-negative");
            p.h0g0_over_delta = std::sqrt(*cm * c.model.cavity.kappa);
        }
        s.get("amplitude", p.amplitude);
        s.get("center", p.center);
        s.get("width", p.width);
        s.get("compensate_lightshift", c.model.compensate_pump_lightshift);
        s.finish();
    }
    {
        Section s = top.sub("atoms");
        s.get("NU", c.model.NU);
        s.get("atom_number", c.model.atom_number);
        s.finish();
    }
    {
        Section s = top.sub("model");
        if (auto v = s.opt<std::string>("variant"))
            c.model.variant = rethrow_at(s.location("variant"), [&] { return variant_from_string(*v); });
        s.get("f_order", c.model.f_order);
        s.finish();
    }
    {
        Section s = top.sub("scheme");
        s.get("dt", c.scheme.dt);
        s.get("t_final", c.t_final);
        if (auto v = s.opt<std::string>("splitting"))
            c.scheme.splitting = rethrow_at(s.location("splitting"), [&] { return splitting_from_string(*v); });
        if (auto v = s.opt<std::string>("noise_update"))
            c.scheme.noise_update =
                rethrow_at(s.location("noise_update"), [&] { return noise_update_from_string(*v); });
        s.get("kinetic", c.scheme.kinetic);
        s.get("potential", c.scheme.potential);
        s.get("nonlinear", c.scheme.nonlinear);
        s.get("noise", c.scheme.noise);
        s.finish();
    }
    {
        Section s = top.sub("initial");
        s.get("temperature", c.initial.temperature);
        s.get("sample_noise", c.initial.sample_noise);
        s.get("bdg_modes", c.initial.bdg_modes);
        s.get("ground_state_tol", c.initial.ground_state_tol);
        s.get_complex("alpha0", c.initial.alpha0);
        s.get("alpha_vacuum_noise", c.initial.alpha_vacuum_noise);
        s.finish();
    }
    {
        Section s = top.sub("record");
        auto& r = c.record;
        s.get("interval", r.interval);
        s.get("density", r.density);
        s.get("density_stride", r.density_stride);
        s.get("sites", r.sites);
        s.get("center_label", r.center_label);
        s.get("site_pairs", r.site_pairs);
        s.get("bdg_populations", r.bdg_populations);
        s.get("g1_pairs", r.g1_pairs);
        s.get("phase_probes", r.phase_probes);
        s.get("store_wiener", r.store_wiener);
        s.get("per_trajectory_csv", r.per_trajectory_csv);
        s.finish();
    }
    {
        Section s = top.sub("ensemble");
        s.get("trajectories", c.ensemble.trajectories);
        s.get("base_seed", c.ensemble.base_seed);
        s.get("threads", c.ensemble.threads);
        s.finish();
    }
    {
        Section s = top.sub("scan");
        s.get("pump_scales", c.scan.pump_scales);
        s.get("damping", c.scan.damping);
        s.get("seed_strength", c.scan.seed_strength);
        s.get("onset_level", c.scan.onset_level);
        s.get("wavenumbers", c.scan.wavenumbers);
        s.get("time", c.scan.time);
        s.get("trajectories", c.scan.trajectories);
        s.finish();
    }
    {
        Section s = top.sub("validity");
        s.get("strict", c.strict_validity);
        s.finish();
    }
    top.finish();
}

}  // namespace

void RunConfig::validate() const {
    if (grid.n_points < 8 || (grid.n_points & (grid.n_points - 1)) != 0)
        throw ConfigError("grid.n_points must be a power of two >= 8");
    if (!(grid.extent > 0.0)) throw ConfigError("grid.extent must be positive");
    model.validate();
    scheme.validate();
    if (!(t_final >= 0.0)) throw ConfigError("scheme.t_final must be non-negative");
    if (initial.temperature < 0.0) throw ConfigError("initial.temperature must be non-negative");
    if (!(initial.ground_state_tol > 0.0)) throw ConfigError("initial.ground_state_tol must be positive");
    if (!(record.interval > 0.0)) throw ConfigError("record.interval must be positive");
    if (record.density_stride == 0) throw ConfigError("record.density_stride must be positive");
    if (record.sites && !model.trap.has_lattice())
        throw ConfigError("record.sites needs a lattice (trap.lattice_depth_s > 0)");
    if (ensemble.trajectories == 0) throw ConfigError("ensemble.trajectories must be at least 1");
    if (!(scan.damping > 0.0 && scan.damping <= 1.0)) throw ConfigError("scan.damping must lie in (0, 1]");
    if (targeting.mode < 0) throw ConfigError("cavity.optimize_wavenumber_for_mode must be >= 0");
    if (targeting.mode > 0 && (!(targeting.k_max > targeting.k_min) || targeting.samples < 2))
        throw ConfigError("cavity.wavenumber_range must be increasing with at least two samples");
    if (targeting.mode > 0 && static_cast<std::size_t>(targeting.mode) > initial.bdg_modes)
        throw ConfigError("optimize_wavenumber_for_mode exceeds initial.bdg_modes");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(where(source, e.mark) + ": " + e.msg);
    }
    if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");
    if (!root.IsMap()) throw ConfigError(source + ": configuration must be a mapping");
    if (root["config"]) {
        // Manifest: only the embedded configuration matters.
        root = root["config"];
        if (!root.IsMap()) throw ConfigError(where(source, root.Mark()) + ": 'config' must be a mapping");
    }
    RunConfig c;
    if (YAML::Node p = root["preset"]) {
        const std::string name = p.as<std::string>();
        c = rethrow_at(where(source, p.Mark()), [&] { return make_preset(name); });
    }
    apply(c, root, source);
    rethrow_at(source, [&] {
        c.validate();
        return 0;
    });
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

nlohmann::json config_to_json(const RunConfig& c) {
    using nlohmann::json;
    const auto& m = c.model;
    json j;
    if (!c.preset.empty()) j["preset"] = c.preset;
    j["grid"] = {{"n_points", c.grid.n_points}, {"extent", c.grid.extent}};
    j["trap"] = {{"harmonic_strength", m.trap.harmonic_strength},
                 {"lattice_depth_s", m.trap.lattice_depth_s},
                 {"lattice_wavenumber", m.trap.lattice_wavenumber}};
    j["cavity"] = {{"g0_sq_over_delta", m.cavity.g0_sq_over_delta},
                   {"wavenumber", m.cavity.wavenumber},
                   {"phase_offset", m.cavity.phase_offset},
                   {"kappa", m.cavity.kappa},
                   {"delta_pc", m.cavity.delta_pc},
                   {"eta", {m.cavity.eta.real(), m.cavity.eta.imag()}},
                   {"photon_scale_n", m.cavity.photon_scale_n},
                   {"optimize_wavenumber_for_mode", c.targeting.mode},
                   {"wavenumber_range", {c.targeting.k_min, c.targeting.k_max}},
                   {"wavenumber_samples", c.targeting.samples}};
    j["pump"] = {{"profile", pump_kind_name(m.pump.kind)},
                 {"h0g0_over_delta", m.pump.h0g0_over_delta},
                 {"amplitude", m.pump.amplitude},
                 {"center", m.pump.center},
                 {"width", m.pump.width},
                 {"compensate_lightshift", m.compensate_pump_lightshift}};
    if (m.pump.h0_sq_over_delta) j["pump"]["h0_sq_over_delta"] = *m.pump.h0_sq_over_delta;
    j["atoms"] = {{"NU", m.NU}, {"atom_number", m.atom_number}};
    j["model"] = {{"variant", to_string(m.variant)}, {"f_order", m.f_order}};
    j["scheme"] = {{"dt", c.scheme.dt},
                   {"t_final", c.t_final},
                   {"splitting", to_string(c.scheme.splitting)},
                   {"noise_update", to_string(c.scheme.noise_update)},
                   {"kinetic", c.scheme.kinetic},
                   {"potential", c.scheme.potential},
                   {"nonlinear", c.scheme.nonlinear},
                   {"noise", c.scheme.noise}};
    j["initial"] = {{"temperature", c.initial.temperature},
                    {"sample_noise", c.initial.sample_noise},
                    {"bdg_modes", c.initial.bdg_modes},
                    {"ground_state_tol", c.initial.ground_state_tol},
                    {"alpha0", {c.initial.alpha0.real(), c.initial.alpha0.imag()}},
                    {"alpha_vacuum_noise", c.initial.alpha_vacuum_noise}};
    const auto& r = c.record;
    j["record"] = {{"interval", r.interval},         {"density", r.density},
                   {"density_stride", r.density_stride}, {"sites", r.sites},
                   {"center_label", r.center_label}, {"site_pairs", r.site_pairs},
                   {"bdg_populations", r.bdg_populations}, {"g1_pairs", r.g1_pairs},
                   {"phase_probes", r.phase_probes}, {"store_wiener", r.store_wiener},
                   {"per_trajectory_csv", r.per_trajectory_csv}};
    j["ensemble"] = {{"trajectories", c.ensemble.trajectories},
                     {"base_seed", c.ensemble.base_seed},
                     {"threads", c.ensemble.threads}};
    j["scan"] = {{"pump_scales", c.scan.pump_scales}, {"damping", c.scan.damping},
                 {"seed_strength", c.scan.seed_strength}, {"onset_level", c.scan.onset_level},
                 {"wavenumbers", c.scan.wavenumbers}, {"time", c.scan.time},
                 {"trajectories", c.scan.trajectories}};
    j["validity"] = {{"strict", c.strict_validity}};
    return j;
}

std::string config_to_yaml(const RunConfig& config) {
    // JSON is a subset of YAML; emit it block-style for readability.
    YAML::Node n = YAML::Load(config_to_json(config).dump());
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << n;
    return out.c_str();
}

// --- presets ---------------------------------------------------------------

namespace {

// Lattice experiments: pump-cavity detuning chosen so that the dispersive
// shift leaves Delta_pc - X slightly negative (organising sign).
constexpr double lattice_delta_pc = 12.5;

RunConfig lattice_base() {
    RunConfig c;
    c.grid = {1024, 12.0};
    auto& m = c.model;
    m.trap.lattice_depth_s = 10.0;
    m.trap.lattice_wavenumber = 8.1;
    m.cavity.wavenumber = 8.1;
    m.cavity.kappa = 100.0;
    m.cavity.g0_sq_over_delta = 0.0256;
    m.cavity.delta_pc = lattice_delta_pc;
    m.pump = PumpProfile::uniform(std::sqrt(2.6e-3 * 100.0));
    m.NU = 38.0;
    m.atom_number = 750.0;
    m.variant = Variant::TransverseEliminated;
    c.scheme.dt = 1e-4;
    c.t_final = 2.0 * two_pi;
    c.record.interval = 0.02 * two_pi;
    c.record.sites = true;
    c.record.density_stride = 2;
    c.record.site_pairs = {{12, 13}, {12, 14}, {12, 15}, {12, 16}, {12, 17}, {12, 18}};
    c.initial.bdg_modes = 0;
    c.ensemble.trajectories = 400;
    return c;
}

RunConfig optomech_base() {
    RunConfig c;
    c.grid = {1024, 20.0};
    auto& m = c.model;
    m.cavity.kappa = 100.0;
    m.cavity.g0_sq_over_delta = 0.16 * 0.16;
    m.cavity.delta_pc = 10.0;
    m.pump = PumpProfile::uniform(12.8 * 0.16);
    m.pump.h0_sq_over_delta = 12.8 * 12.8;
    m.compensate_pump_lightshift = true;
    m.NU = 64.0;
    m.atom_number = 750.0;
    m.variant = Variant::TransverseEliminated;
    c.scheme.dt = 2.5e-4;
    c.t_final = 2.0 * two_pi;
    c.record.interval = 0.01 * two_pi;
    c.record.bdg_populations = true;
    c.record.g1_pairs = {{-2.0, 2.0}, {-1.0, 1.0}, {0.0, 2.0}};
    c.initial.bdg_modes = 8;
    c.ensemble.trajectories = 400;
    c.scan.time = 0.16 * two_pi;
    return c;
}

struct PresetEntry {
    const char* name;
    const char* description;
    RunConfig (*make)();
};

const std::vector<PresetEntry>& registry() {
    static const std::vector<PresetEntry> entries = {
        {"lattice-selforg",
         "lattice BEC under a uniform transverse pump; measurement-driven odd/even self-organisation",
         [] {
             RunConfig c = lattice_base();
             c.preset = "lattice-selforg";
             return c;
         }},
        {"gaussian-pump",
         "lattice BEC with a Gaussian transverse pump over sites 16-17 and light shift compensated",
         [] {
             RunConfig c = lattice_base();
             c.preset = "gaussian-pump";
             const double spacing = std::numbers::pi / 8.1;
             c.model.pump = PumpProfile::gaussian(std::sqrt(2.6e-3 * 100.0), 1.0, 4.0 * spacing, 0.6);
             c.model.compensate_pump_lightshift = true;
             c.record.site_pairs = {{16, 17}, {16, 13}, {16, 12}, {8, 9}};
             c.ensemble.trajectories = 200;
             return c;
         }},
        {"threshold-scan",
         "steady-state self-organisation imbalance against pump strength at the lattice parameters",
         [] {
             RunConfig c = lattice_base();
             c.preset = "threshold-scan";
             for (int i = 0; i <= 40; ++i) c.scan.pump_scales.push_back(0.5 * i);
             return c;
         }},
        {"kohn",
         "harmonic BEC with the cavity wavelength chosen to couple most strongly to the Kohn mode",
         [] {
             RunConfig c = optomech_base();
             c.preset = "kohn";
             c.targeting.mode = 1;
             return c;
         }},
        {"breathing",
         "harmonic BEC, trap centre at a cavity antinode, wavelength matched to the breathing mode",
         [] {
             RunConfig c = optomech_base();
             c.preset = "breathing";
             c.model.cavity.phase_offset = std::numbers::pi / 2.0;
             c.targeting.mode = 2;
             return c;
         }},
        {"third-mode",
         "harmonic BEC at cavity wavenumber 1.03, where the third BdG mode dominates",
         [] {
             RunConfig c = optomech_base();
             c.preset = "third-mode";
             c.model.cavity.wavenumber = 1.03;
             return c;
         }},
        {"wavelength-scan",
         "Kohn population and <|q1|> after 0.16 trap periods across cavity wavenumbers",
         [] {
             RunConfig c = optomech_base();
             c.preset = "wavelength-scan";
             for (int i = 0; i <= 18; ++i) c.scan.wavenumbers.push_back(0.2 + 0.1 * i);
             c.record.density = false;
             return c;
         }},
    };
    return entries;
}

const PresetEntry& find_preset(const std::string& name) {
    for (const auto& e : registry())
        if (name == e.name) return e;
    std::string known;
    for (const auto& e : registry()) known += std::string(known.empty() ? "" : ", ") + e.name;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.emplace_back(e.name);
    return out;
}

std::string preset_description(const std::string& name) { return find_preset(name).description; }

RunConfig make_preset(const std::string& name) { return find_preset(name).make(); }

}  // namespace cavtraj
