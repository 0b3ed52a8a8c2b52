#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cavtraj/grid.hpp"

namespace cavtraj {

/// Static confinement V(x) = harmonic_strength*x^2 + s*E_R*cos^2(k_L x).
struct TrapSpec {
    double harmonic_strength = 0.5;
    double lattice_depth_s = 0.0;
    double lattice_wavenumber = 0.0;

    double recoil_energy() const { return 0.5 * lattice_wavenumber * lattice_wavenumber; }
    bool has_lattice() const { return lattice_depth_s > 0.0; }
    void validate() const;
};

/// Single cavity mode g(x) = g0 sin(k_c x + phase_offset) with loss and axial drive.
///
/// Only the combination g0^2/Delta_pa enters the equations of motion; its
/// sign carries the sign of the pump-atom detuning.
struct CavitySpec {
    double g0_sq_over_delta = 0.0;
    double wavenumber = 1.0;
    double phase_offset = 0.0;
    double kappa = 1.0;
    double delta_pc = 0.0;
    cplx eta{0.0, 0.0};
    double photon_scale_n = 100.0;

    void validate() const;
};

/// Transverse pump h(x) = h0 * profile(x). The coupling enters through the
/// products h0 g0/Delta_pa (scattering into the cavity) and h0^2/Delta_pa
/// (light shift).
struct PumpProfile {
    enum class Kind { Zero, Uniform, Gaussian };

    Kind kind = Kind::Zero;
    double h0g0_over_delta = 0.0;
    /// Light-shift strength. When unset it is derived as
    /// (h0g0/Delta)^2 / (g0^2/Delta), or zero if the cavity coupling vanishes.
    std::optional<double> h0_sq_over_delta;
    double amplitude = 1.0;
    double center = 0.0;
    double width = 1.0;

    static PumpProfile zero() { return {}; }
    static PumpProfile uniform(double h0g0_over_delta, double amplitude = 1.0);
    static PumpProfile gaussian(double h0g0_over_delta, double amplitude, double center,
                                double width);

    void validate() const;
};

enum class Variant { FullCavity, AxialEliminated, TransverseEliminated };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct ModelParams {
    TrapSpec trap;
    CavitySpec cavity;
    PumpProfile pump;
    /// Nonlinearity N*U in hbar*omega*x0.
    double NU = 0.0;
    double atom_number = 750.0;
    bool compensate_pump_lightshift = false;
    Variant variant = Variant::TransverseEliminated;
    /// 0: F = 1; 1: include the cavity-frequency-shift correction to F.
    int f_order = 0;
    /// Optional spatial dependence Delta_pa(x) = Delta_pa * detuning_scale(x).
    /// Not serialised; programmatic use only.
    std::function<double(double)> detuning_scale;

    double interaction() const { return NU / atom_number; }
    double light_shift_strength() const;
    void validate() const;
};

std::vector<double> eval_trap_potential(const TrapSpec& trap, const Grid& grid);
/// Dimensionless mode shape sin(k_c x + offset).
std::vector<double> eval_cavity_mode(const CavitySpec& cavity, const Grid& grid);
/// Dimensionless pump shape h(x)/h0.
std::vector<double> eval_pump(const PumpProfile& pump, const Grid& grid);

/// Every position-dependent coefficient the equations of motion need,
/// evaluated once on a grid.
struct ModelProfiles {
    GridPtr grid;
    std::vector<double> trap;           // V(x)
    std::vector<double> mode;           // g(x)/g0
    std::vector<double> pump;           // h(x)/h0
    std::vector<double> g2_over_delta;  // g(x)^2 / Delta_pa(x)
    std::vector<double> hg_over_delta;  // h(x) g(x) / Delta_pa(x)
    std::vector<double> h2_over_delta;  // h(x)^2 / Delta_pa(x)
};

ModelProfiles evaluate_profiles(const ModelParams& params, GridPtr grid);

struct ValidityReport {
    double tonks_gamma = 0.0;
    double healing_length = 0.0;
    double atoms_per_healing_length = 0.0;
    double eps_n = 0.0;
    /// Inverse occupation of a healing-length cell at peak density.
    double min_site_occupation = 0.0;
    double adiabatic_small_parameter = 0.0;
    bool classical_limit = false;
    std::vector<std::string> warnings;
};

/// psi must be normalised to one; densities are scaled by the atom number.
ValidityReport validity_diagnostics(const ComplexField& psi, const ModelParams& params);

}  // namespace cavtraj
