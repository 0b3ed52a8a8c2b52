#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cavtraj/bdg.hpp"
#include "cavtraj/model.hpp"
#include "cavtraj/observables.hpp"
#include "cavtraj/rng.hpp"

namespace cavtraj {

enum class NoiseUpdate { ExactRotation, Milstein };
enum class Splitting { Strang, Lie };

std::string to_string(NoiseUpdate n);
std::string to_string(Splitting s);
NoiseUpdate noise_update_from_string(const std::string& s);
Splitting splitting_from_string(const std::string& s);

struct StepScheme {
    double dt = 1e-4;
    Splitting splitting = Splitting::Strang;
    NoiseUpdate noise_update = NoiseUpdate::ExactRotation;
    // Switches for individual terms. Turning noise off removes both the
    // stochastic term and its Ito drift.
    bool kinetic = true;
    bool potential = true;
    bool nonlinear = true;
    bool noise = true;

    void validate() const;
};

struct TrajectoryState {
    ComplexField psi;  // carries the atom number
    cplx alpha{0.0, 0.0};
    double t = 0.0;
    Rng rng;
};

/// Wiener increments for one step. dw_y is used by the full cavity model only.
struct WienerIncrement {
    double dw = 0.0;
    double dw_y = 0.0;
};

/// Precomputed stepping machinery for one model on one grid. Not shared
/// between threads: each worker owns its own.
class Integrator {
public:
    Integrator(const ModelParams& params, GridPtr grid, const StepScheme& scheme);

    const ModelParams& params() const { return params_; }
    const StepScheme& scheme() const { return scheme_; }
    const ModelProfiles& profiles() const { return prof_; }
    /// Position-dependent measurement noise amplitude a(x) of the eliminated
    /// models (zero for the full model).
    const std::vector<double>& noise_amplitude() const { return noise_amp_; }

    WienerIncrement draw(Rng& rng) const;
    void step(TrajectoryState& s) const;
    void step(TrajectoryState& s, const WienerIncrement& w) const;
    /// n steps; consecutive kinetic half-steps are fused under Strang splitting.
    void advance(TrajectoryState& s, std::size_t n, std::vector<double>* wiener = nullptr) const;

    /// X = int g^2/Delta |psi|^2 and Y = int h g/Delta |psi|^2 (unscaled by any pump factor).
    std::pair<double, double> cavity_integrals(const ComplexField& psi) const;
    double measurement_rate(const ComplexField& psi, cplx alpha) const;

private:
    void kinetic(std::span<cplx> psi, double fraction) const;
    void local(TrajectoryState& s, const WienerIncrement& w) const;

    ModelParams params_;
    StepScheme scheme_;
    GridPtr grid_;
    ModelProfiles prof_;
    std::vector<double> static_pot_;   // V(x) plus the light shift where applicable
    std::vector<double> axial_pot_;    // (|eta|^2/kappa^2) g^2/Delta, times F at run time
    std::vector<double> noise_amp_;
    std::vector<cplx> half_kick_, full_kick_;
    double U_;
};

TrajectoryState step_full(TrajectoryState s, const ModelParams& params, const StepScheme& scheme);
TrajectoryState step_axial_eliminated(TrajectoryState s, const ModelParams& params,
                                      const StepScheme& scheme);
TrajectoryState step_transverse_eliminated(TrajectoryState s, const ModelParams& params,
                                           const StepScheme& scheme);
double measurement_rate(const TrajectoryState& s, const ModelParams& params);

/// What run_trajectory samples, and how often.
struct RecorderConfig {
    double interval = 0.01;
    bool density = false;
    std::size_t density_stride = 1;
    bool sites = false;
    int center_label = 12;
    /// Site label pairs whose relative phase is recorded.
    std::vector<std::pair<int, int>> site_pairs;
    std::shared_ptr<const BdGModeSet> modes;
    bool wigner_sampled = false;
    /// Position pairs for first-order coherence moments.
    std::vector<std::pair<double, double>> g1_pairs;
    /// Positions whose phase relative to t = 0 is tracked (unwrapped between records).
    std::vector<double> phase_probes;
    bool store_wiener = false;
};

/// Row-major time series: times x width.
struct Series {
    std::size_t width = 1;
    std::vector<double> data;

    double at(std::size_t time_index, std::size_t column = 0) const {
        return data[time_index * width + column];
    }
};

struct MeasurementRecord {
    std::vector<double> times;
    std::vector<double> rates;
    std::vector<double> wiener_path;
};

struct TrajectoryOutput {
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::map<std::string, Series> channels;
    std::vector<double> wiener_path;
    bool failed = false;
    std::string failure;
    std::vector<cplx> final_psi;
    cplx final_alpha{0.0, 0.0};

    const Series& channel(const std::string& name) const;
    MeasurementRecord record() const;
};

/// Integrate from the given state to t_final, recording every
/// recorder.interval (rounded to whole steps). Deterministic in the state's
/// generator, the scheme and the parameters.
TrajectoryOutput run_trajectory(TrajectoryState initial, const ModelParams& params,
                                const StepScheme& scheme, double t_final,
                                const RecorderConfig& recorder);

TrajectoryOutput run_trajectory(const ComplexField& initial, cplx alpha0, const ModelParams& params,
                                const StepScheme& scheme, double t_final,
                                const RecorderConfig& recorder, std::uint64_t seed);

}  // namespace cavtraj
