#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cavtraj/model.hpp"
#include "cavtraj/sde.hpp"

namespace cavtraj {

struct GridSpec {
    std::size_t n_points = 1024;
    double extent = 20.0;
};

struct InitialConfig {
    double temperature = 0.0;
    bool sample_noise = false;
    std::size_t bdg_modes = 8;
    double ground_state_tol = 1e-10;
    cplx alpha0{0.0, 0.0};
    bool alpha_vacuum_noise = false;
};

struct RecordConfig {
    double interval = 0.05;
    bool density = true;
    std::size_t density_stride = 4;
    bool sites = false;
    int center_label = 12;
    std::vector<std::pair<int, int>> site_pairs;
    bool bdg_populations = false;
    std::vector<std::pair<double, double>> g1_pairs;
    std::vector<double> phase_probes;
    bool store_wiener = false;
    bool per_trajectory_csv = false;
};

struct EnsembleSettings {
    std::size_t trajectories = 100;
    std::uint64_t base_seed = 1;
    unsigned threads = 0;
};

struct ScanSettings {
    std::vector<double> pump_scales;
    double damping = 0.3;
    double seed_strength = 0.1;
    double onset_level = 0.01;
    std::vector<double> wavenumbers;
    double time = 0.32 * 3.141592653589793;
    std::size_t trajectories = 100;
};

/// Choose the cavity wavenumber that maximises |O_j| for BdG mode j (0: off).
struct ModeTargeting {
    int mode = 0;
    double k_min = 0.2;
    double k_max = 3.0;
    std::size_t samples = 561;
};

struct RunConfig {
    std::string preset;
    GridSpec grid;
    ModelParams model;
    StepScheme scheme;
    double t_final = 2.0 * 3.141592653589793;
    InitialConfig initial;
    RecordConfig record;
    EnsembleSettings ensemble;
    ScanSettings scan;
    ModeTargeting targeting;
    bool strict_validity = false;

    void validate() const;
};

/// Parse YAML (or JSON) text. A top-level `preset` key selects a base that
/// the remaining keys override. A manifest with a top-level `config` key is
/// read through that key. Errors carry source:line:column.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical form: every physical key, couplings already combined.
nlohmann::json config_to_json(const RunConfig& config);
std::string config_to_yaml(const RunConfig& config);

std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
RunConfig make_preset(const std::string& name);

}  // namespace cavtraj
