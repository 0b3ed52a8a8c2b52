#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cavtraj/config.hpp"
#include "cavtraj/ensemble.hpp"
#include "cavtraj/experiment.hpp"

namespace cavtraj {

inline constexpr const char* code_version = "0.1.0";

/// Column contracts of every CSV the tools write.
namespace columns {
inline const std::vector<std::string> ground_state = {"x", "potential", "psi_re", "psi_im", "abs_psi_sq"};
inline const std::vector<std::string> bdg_modes = {"mode", "energy", "overlap", "parity"};
inline const std::vector<std::string> density = {"t", "x", "abs_psi_sq"};
inline const std::vector<std::string> ensemble_density = {"t", "x", "abs_psi_sq_mean", "abs_psi_sq_se"};
inline const std::vector<std::string> trajectory_sites = {"t", "site", "center", "population", "phase"};
inline const std::vector<std::string> trajectory_bdg = {"t", "mode", "population"};
inline const std::vector<std::string> ensemble_bdg = {"t", "mode", "energy", "population_mean", "population_se"};
inline const std::vector<std::string> ensemble_cos_phase = {"t", "site_i", "site_j", "cos_mean", "cos_se"};
inline const std::vector<std::string> ensemble_g1 = {"t", "x1", "x2", "g1"};
inline const std::vector<std::string> threshold_scan = {"pump_scale", "imbalance", "alpha_re", "alpha_im",
                                                        "converged", "iterations"};
inline const std::vector<std::string> wavelength_scan = {"k_c", "O_1", "kohn_pop_mean", "kohn_pop_se",
                                                         "abs_q1_mean", "abs_q1_se"};
/// Scalar channels in the order they appear in the scalars files.
inline const std::vector<std::string> scalar_channels = {
    "rate", "norm", "q1", "abs_q1", "q2", "delta_q", "imbalance", "alpha_re", "alpha_im", "photons"};
}  // namespace columns

/// Comma-separated writer with a fixed header and round-trip precision.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long long v);
    CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
    void end_row();
    void close();
    std::size_t rows() const { return rows_; }

private:
    void sep();
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t width_;
    std::size_t col_ = 0;
    std::size_t rows_ = 0;
};

/// Output directory guard. Refuses a directory that already holds a
/// manifest unless forced.
class OutputDir {
public:
    OutputDir(const std::filesystem::path& dir, bool force);
    std::filesystem::path file(const std::string& name);
    const std::vector<std::string>& files() const { return files_; }
    const std::filesystem::path& path() const { return dir_; }

    /// Writes manifest.json: configuration, seeds, version and a content hash
    /// per written file.
    nlohmann::json write_manifest(const RunConfig& config, nlohmann::json extra = {});

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

void write_ground_state_csv(OutputDir& out, const GroundState& gs);
void write_bdg_csv(OutputDir& out, const BdGModeSet& modes, const CavitySpec& cavity);
/// trajectory_scalars.csv, trajectory_density.csv, trajectory_sites.csv and
/// trajectory_bdg.csv as far as the channels exist. prefix selects the file stem.
void write_trajectory_csv(OutputDir& out, const TrajectoryOutput& traj, const Prepared& p,
                          const std::string& prefix = "trajectory");
void write_ensemble_csv(OutputDir& out, const EnsembleStats& stats, const Prepared& p);
void write_threshold_csv(OutputDir& out, const std::vector<ThresholdPoint>& scan);
void write_wavelength_csv(OutputDir& out, const std::vector<WavelengthPoint>& scan);

std::string file_hash(const std::filesystem::path& path);

}  // namespace cavtraj
