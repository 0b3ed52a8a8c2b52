#pragma once

#include <vector>

#include "cavtraj/groundstate.hpp"
#include "cavtraj/rng.hpp"

namespace cavtraj {

struct BdGMode {
    double energy = 0.0;
    ComplexField u;
    ComplexField v;
    /// +1 even, -1 odd, 0 if u has no definite parity on the grid.
    int parity = 0;
};

/// Quasiparticle modes about a real ground state, ascending in energy,
/// without the condensate (zero) mode.
struct BdGModeSet {
    GroundState ground;
    std::vector<BdGMode> modes;
    /// Number of spurious modes discarded (complex or negative-norm solutions).
    int discarded = 0;

    std::size_t size() const { return modes.size(); }
    /// Mode j, counting from 1.
    const BdGMode& mode(std::size_t j) const;
    std::vector<double> energies() const;
};

BdGModeSet solve_bdg(const GroundState& ground, const ModelParams& params, std::size_t n_modes);

struct ModeAmplitudes {
    cplx alpha0;
    std::vector<cplx> alphas;
    double time = 0.0;
};

ModeAmplitudes project_amplitudes(const ComplexField& psi, const BdGModeSet& modes, double t);

/// integral of g(x) psi0(x) (u_j - v_j)(x) dx for mode j counted from 1.
double overlap_integral(std::size_t j, std::span<const double> cavity_mode,
                        const BdGModeSet& modes);

/// sqrt(N) psi0 + sum_j (a_j u_j - a_j* v_j*), a_j complex Gaussian with
/// <|a_j|^2> = n_BE(eps_j, T) + 1/2. With noise off the field is sqrt(N) psi0.
ComplexField sample_initial_state(const BdGModeSet& modes, double temperature,
                                  double atom_number, Rng& rng, bool noise = true);

/// Parity of a field under x -> -x on the grid: +1, -1, or 0 if neither
/// holds to the given relative tolerance.
int field_parity(const ComplexField& f, double tol = 1e-6);

}  // namespace cavtraj
