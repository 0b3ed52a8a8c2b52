#include "cavtraj/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cavtraj/errors.hpp"

namespace cavtraj {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void TrapSpec::validate() const {
    if (!finite(harmonic_strength) || harmonic_strength < 0.0)
        throw ConfigError("trap.harmonic_strength must be finite and non-negative");
    if (!finite(lattice_depth_s) || lattice_depth_s < 0.0)
        throw ConfigError("trap.lattice_depth_s must be finite and non-negative");
    if (lattice_depth_s > 0.0 && !(lattice_wavenumber > 0.0))
        throw ConfigError("trap.lattice_wavenumber must be positive when a lattice is present");
}

void CavitySpec::validate() const {
    if (!(kappa > 0.0) || !finite(kappa)) throw ConfigError("cavity.kappa must be positive");
    if (!finite(g0_sq_over_delta)) throw ConfigError("cavity.g0_sq_over_delta must be finite");
    if (!finite(wavenumber)) throw ConfigError("cavity.wavenumber must be finite");
    if (!(phase_offset >= 0.0 && phase_offset < 2.0 * std::numbers::pi))
        throw ConfigError("cavity.phase_offset must lie in [0, 2pi)");
    if (!finite(delta_pc)) throw ConfigError("cavity.delta_pc must be finite");
    if (!finite(eta.real()) || !finite(eta.imag())) throw ConfigError("cavity.eta must be finite");
    if (!(photon_scale_n > 0.0)) throw ConfigError("cavity.photon_scale_n must be positive");
}

PumpProfile PumpProfile::uniform(double h0g0_over_delta, double amplitude) {
    PumpProfile p;
    p.kind = Kind::Uniform;
    p.h0g0_over_delta = h0g0_over_delta;
    p.amplitude = amplitude;
    return p;
}

PumpProfile PumpProfile::gaussian(double h0g0_over_delta, double amplitude, double center,
                                  double width) {
    PumpProfile p;
    p.kind = Kind::Gaussian;
    p.h0g0_over_delta = h0g0_over_delta;
    p.amplitude = amplitude;
    p.center = center;
    p.width = width;
    return p;
}

void PumpProfile::validate() const {
    if (!finite(h0g0_over_delta)) throw ConfigError("pump.h0g0_over_delta must be finite");
    if (h0_sq_over_delta && !finite(*h0_sq_over_delta))
        throw ConfigError("pump.h0_sq_over_delta must be finite");
    if (!finite(amplitude)) throw ConfigError("pump.amplitude must be finite");
    if (kind == Kind::Gaussian && !(width > 0.0))
        throw ConfigError("pump.width must be positive for a Gaussian pump");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::FullCavity: return "full";
        case Variant::AxialEliminated: return "axial";
        case Variant::TransverseEliminated: return "transverse";
    }
    return "unknown";
}

Variant variant_from_string(const std::string& name) {
    if (name == "full") return Variant::FullCavity;
    if (name == "axial") return Variant::AxialEliminated;
    if (name == "transverse") return Variant::TransverseEliminated;
    throw ConfigError("unknown model variant '" + name + "' (expected full, axial or transverse)");
}

double ModelParams::light_shift_strength() const {
    if (pump.h0_sq_over_delta) return *pump.h0_sq_over_delta;
    if (cavity.g0_sq_over_delta == 0.0) return 0.0;
    return pump.h0g0_over_delta * pump.h0g0_over_delta / cavity.g0_sq_over_delta;
}

void ModelParams::validate() const {
    trap.validate();
    cavity.validate();
    pump.validate();
    if (!finite(NU) || NU < 0.0) throw ConfigError("NU must be finite and non-negative");
    if (!finite(atom_number) || !(atom_number > 0.0))
        throw ConfigError("atom_number must be positive");
    if (f_order != 0 && f_order != 1) throw ConfigError("f_order must be 0 or 1");
}

std::vector<double> eval_trap_potential(const TrapSpec& trap, const Grid& grid) {
    auto x = grid.positions();
    std::vector<double> v(x.size());
    const double depth = trap.lattice_depth_s * trap.recoil_energy();
    for (std::size_t i = 0; i < x.size(); ++i) {
        v[i] = trap.harmonic_strength * x[i] * x[i];
        if (depth > 0.0) {
            const double c = std::cos(trap.lattice_wavenumber * x[i]);
            v[i] += depth * c * c;
        }
    }
    return v;
}

std::vector<double> eval_cavity_mode(const CavitySpec& cavity, const Grid& grid) {
    auto x = grid.positions();
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = std::sin(cavity.wavenumber * x[i] + cavity.phase_offset);
    return g;
}

std::vector<double> eval_pump(const PumpProfile& pump, const Grid& grid) {
    auto x = grid.positions();
    std::vector<double> h(x.size(), 0.0);
    switch (pump.kind) {
        case PumpProfile::Kind::Zero: break;
        case PumpProfile::Kind::Uniform: std::fill(h.begin(), h.end(), pump.amplitude); break;
        case PumpProfile::Kind::Gaussian:
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = (x[i] - pump.center) / pump.width;
                h[i] = pump.amplitude * std::exp(-0.5 * d * d);
            }
            break;
    }
    return h;
}

ModelProfiles evaluate_profiles(const ModelParams& params, GridPtr grid) {
    ModelProfiles p;
    p.grid = grid;
    p.trap = eval_trap_potential(params.trap, *grid);
    p.mode = eval_cavity_mode(params.cavity, *grid);
    p.pump = eval_pump(params.pump, *grid);
    const std::size_t n = grid->size();
    p.g2_over_delta.resize(n);
    p.hg_over_delta.resize(n);
    p.h2_over_delta.resize(n);
    const double h2 = params.light_shift_strength();
    auto x = grid->positions();
    for (std::size_t i = 0; i < n; ++i) {
        double inv = 1.0;
        if (params.detuning_scale) {
            const double s = params.detuning_scale(x[i]);
            if (!(std::abs(s) > 0.0) || !finite(s))
                throw ConfigError("detuning profile must be finite and nonzero");
            inv = 1.0 / s;
        }
        p.g2_over_delta[i] = params.cavity.g0_sq_over_delta * p.mode[i] * p.mode[i] * inv;
        p.hg_over_delta[i] = params.pump.h0g0_over_delta * p.pump[i] * p.mode[i] * inv;
        p.h2_over_delta[i] = h2 * p.pump[i] * p.pump[i] * inv;
    }
    return p;
}

ValidityReport validity_diagnostics(const ComplexField& psi, const ModelParams& params) {
    const Grid& grid = psi.grid();
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw NumericalError("validity diagnostics need a field with nonzero density");

    double peak = 0.0;
    for (cplx v : psi.values()) peak = std::max(peak, std::norm(v));
    peak /= norm;  // normalised peak density

    ValidityReport r;
    const double N = params.atom_number;
    const double U = params.interaction();
    const double rho = N * peak;
    const double inf = std::numeric_limits<double>::infinity();
    if (params.NU == 0.0) {
        r.classical_limit = true;
        r.tonks_gamma = 0.0;
        r.healing_length = inf;
        r.atoms_per_healing_length = inf;
        r.min_site_occupation = 0.0;
    } else {
        r.tonks_gamma = U / rho;
        r.healing_length = 1.0 / std::sqrt(2.0 * rho * U);
        r.atoms_per_healing_length = 1.0 / std::sqrt(2.0 * r.tonks_gamma);
        r.min_site_occupation = 1.0 / r.atoms_per_healing_length;
    }
    r.eps_n = 1.0 / params.cavity.photon_scale_n;

    auto grid_ptr = psi.grid_ptr();
    ModelProfiles prof = evaluate_profiles(params, grid_ptr);
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = prof.g2_over_delta[i] * std::norm(psi[i]) * N / norm;
    const double X = integrate(w, grid);
    r.adiabatic_small_parameter = std::abs(params.cavity.delta_pc - X) / params.cavity.kappa;

    if (r.adiabatic_small_parameter >= 0.2)
        r.warnings.push_back("adiabatic parameter |Delta_pc - X|/kappa = " +
                             std::to_string(r.adiabatic_small_parameter) + " is not small");
    if (!r.classical_limit && r.atoms_per_healing_length <= 1.0)
        r.warnings.push_back("fewer than one atom per healing length (N_xi = " +
                             std::to_string(r.atoms_per_healing_length) + ")");
    if (!r.classical_limit && grid.spacing() > r.healing_length)
        r.warnings.push_back("grid spacing exceeds the healing length");
    if ((params.cavity.g0_sq_over_delta != 0.0 || params.pump.h0g0_over_delta != 0.0) &&
        params.cavity.wavenumber != 0.0) {
        const double lambda_c = 2.0 * std::numbers::pi / std::abs(params.cavity.wavenumber);
        if (grid.spacing() > lambda_c / 8.0)
            r.warnings.push_back("grid spacing exceeds 1/8 of the cavity wavelength");
    }
    return r;
}

}  // namespace cavtraj
