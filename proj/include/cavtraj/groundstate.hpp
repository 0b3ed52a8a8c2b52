#pragma once

#include <optional>
#include <vector>

#include "cavtraj/grid.hpp"
#include "cavtraj/model.hpp"

namespace cavtraj {

struct GroundState {
    ComplexField psi0;  // normalised to one, real and non-negative
    double mu = 0.0;
    double energy = 0.0;   // energy per atom
    double residual = 0.0; // sup |(H - mu) psi| / (max(1,|mu|) sup |psi|)
    int iterations = 0;
    double NU = 0.0;
    std::vector<double> potential;  // single-particle potential the state was solved in
    std::vector<double> energy_history;  // accepted energies, if requested
};

struct GroundStateOptions {
    double tol = 1e-10;
    double initial_step = 1e-2;
    double max_step = 1.0;
    int max_iterations = 400000;
    bool record_energy_history = false;
    std::optional<ComplexField> initial_guess;
};

/// Ground state of H0 + NU|psi|^2 with the pump off.
GroundState solve_ground_state(const ModelParams& params, GridPtr grid, double tol = 1e-10);
GroundState solve_ground_state(const ModelParams& params, GridPtr grid,
                               const GroundStateOptions& options);

/// Ground state in an arbitrary single-particle potential.
///
/// Normalised gradient flow with the kinetic part implicit in Fourier space
/// and a stabilised explicit potential. Steps that raise the energy are
/// rejected and retried at half the step.
GroundState solve_stationary(GridPtr grid, std::vector<double> potential, double NU,
                             const GroundStateOptions& options);

/// Energy per atom of a normalised field: <T + V> + NU/2 <|psi|^2>.
double gp_energy(const ComplexField& psi, std::span<const double> potential, double NU);

struct SteadyStateResult {
    ComplexField psi_ss;  // normalised to one
    cplx alpha_ss;
    double imbalance = 0.0;
    bool converged = false;
    int iterations = 0;
    double alpha_change = 0.0;
};

struct SteadyStateOptions {
    double damping = 0.3;
    double tol = 1e-9;
    int max_outer = 20000;
    /// Gradient-flow iterations of the atomic field per update of alpha.
    int inner_iterations = 20;
    /// +1 seeds the odd-site pattern, -1 the even one.
    int seed_parity = 1;
    double seed_strength = 0.1;
    /// Warm start. When psi is set the seed is skipped.
    std::optional<ComplexField> psi_start;
    std::optional<cplx> alpha_start;
};

/// Self-consistent mean-field steady state under transverse pumping with the
/// pump coupling multiplied by pump_scale.
SteadyStateResult solve_selforg_steady_state(const ModelParams& params, GridPtr grid,
                                             double pump_scale,
                                             const SteadyStateOptions& options = {});

/// Cavity amplitude for a normalised atomic field under the eliminated
/// mean-field relation alpha = -i Y / (kappa - i (Delta_pc - X)).
cplx steady_alpha(const ComplexField& psi, const ModelParams& params, const ModelProfiles& prof,
                  double pump_scale);

struct ThresholdPoint {
    double pump_scale = 0.0;
    SteadyStateResult result;
};

/// Scan in the given order, warm-starting each point from the previous one.
/// Points that fail to converge are kept with converged == false.
std::vector<ThresholdPoint> threshold_scan(const ModelParams& params, GridPtr grid,
                                           const std::vector<double>& pump_scales,
                                           const SteadyStateOptions& options = {});

/// First pump scale whose steady-state |imbalance| exceeds the given level, or
/// a negative value if none does.
double threshold_onset(const std::vector<ThresholdPoint>& scan, double level = 1e-2);

}  // namespace cavtraj
