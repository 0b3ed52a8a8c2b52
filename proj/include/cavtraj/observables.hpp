#pragma once

#include <span>
#include <vector>

#include "cavtraj/bdg.hpp"
#include "cavtraj/grid.hpp"
#include "cavtraj/model.hpp"

namespace cavtraj {

/// Partition of the grid into lattice wells, bounded by local maxima of the
/// static potential. The partial segments at the box edges are merged into
/// the outermost wells. Sites are labelled left to right so that the last
/// well left of x = 0 carries center_label.
struct SitePartition {
    std::vector<std::size_t> starts;  // first grid index of each site, plus n at the end
    std::vector<double> centers;
    std::vector<double> widths;
    std::vector<int> labels;
    /// Grid point 0 is a (periodic) maximum split between the two edge wells.
    /// Interior boundary points are always split half and half.
    bool wrap_shared = false;

    std::size_t size() const { return centers.size(); }
    /// Position in the site arrays of a given label; throws std::out_of_range.
    std::size_t index_of(int label) const;
};

SitePartition make_site_partition(const TrapSpec& trap, const Grid& grid, int center_label = 12);

struct LatticeSiteDecomposition {
    std::vector<double> site_centers;
    std::vector<int> labels;
    std::vector<cplx> site_amplitudes;  // integral of psi over the well / well width
    std::vector<double> site_populations;
    std::vector<double> site_phases;
    std::vector<bool> unreliable;  // population below 1e-6 of the total

    std::size_t size() const { return site_centers.size(); }
    std::size_t index_of(int label) const;
};

LatticeSiteDecomposition site_decompose(const ComplexField& psi, const SitePartition& sites);
LatticeSiteDecomposition site_decompose(const ComplexField& psi, const TrapSpec& trap,
                                        int center_label = 12);

/// (N_odd - N_even) / (N_odd + N_even) over site labels.
double odd_even_imbalance(const LatticeSiteDecomposition& d);

/// arg(a_i conj(a_j)) in (-pi, pi], sites addressed by label.
double relative_phase(const LatticeSiteDecomposition& d, int label_i, int label_j);

/// Odd/even imbalance when a lattice is present, otherwise the normalised
/// overlap of the density with the cavity mode.
double pattern_imbalance(const ComplexField& psi, const ModelParams& params);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

/// Mean of cos(phi_i - phi_j) across trajectories at one time.
Estimate ensemble_cos_phase(std::span<const LatticeSiteDecomposition> snapshots, int label_i,
                            int label_j);

/// |<psi*(x) psi(x')>| / sqrt(<|psi(x)|^2><|psi(x')|^2>) across fields sampled
/// at one time. With wigner_sampled the symmetric-ordering term 1/(2 dx) is
/// removed from coincident-point averages.
double g1_coherence(std::span<const ComplexField> fields, std::size_t ix, std::size_t ix2,
                    bool wigner_sampled = false);

/// Same estimator from already averaged moments.
double g1_from_means(cplx cross, double dens_x, double dens_x2, bool same_point, double dx,
                     bool wigner_sampled);

struct MomentSet {
    double q1 = 0.0;
    double q2 = 0.0;
    double delta_q = 0.0;
};

MomentSet moments(const ComplexField& psi);

/// |alpha_j|^2 per mode, minus 1/2 when initial Wigner noise was sampled,
/// clamped at zero.
std::vector<double> bdg_populations(const ComplexField& psi, const BdGModeSet& modes, double t,
                                    bool wigner_sampled = false);

}  // namespace cavtraj
