#include "cavtraj/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cavtraj/errors.hpp"

namespace cavtraj {

namespace {

std::size_t find_label(const std::vector<int>& labels, int label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw std::out_of_range("no lattice site labelled " + std::to_string(label));
    return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace

std::size_t SitePartition::index_of(int label) const { return find_label(labels, label); }
std::size_t LatticeSiteDecomposition::index_of(int label) const { return find_label(labels, label); }

SitePartition make_site_partition(const TrapSpec& trap, const Grid& grid, int center_label) {
    if (!trap.has_lattice()) throw std::invalid_argument("site decomposition needs a lattice (s > 0)");
    const auto V = eval_trap_potential(trap, grid);
    const std::size_t n = grid.size();
    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (V[i] > V[i - 1] && V[i] >= V[i + 1]) maxima.push_back(i);
    if (maxima.size() < 2) throw std::invalid_argument("lattice has fewer than two wells on this grid");

    // Interior wells lie between consecutive maxima; the edge pieces join
    // their neighbours.
    SitePartition p;
    // A maximum on the first grid point (periodic neighbour n-1) is shared
    // by the two edge wells.
    p.wrap_shared = V[0] > V[n - 1] && V[0] >= V[1];
    p.starts.push_back(0);
    for (std::size_t k = 1; k + 1 < maxima.size(); ++k) p.starts.push_back(maxima[k]);
    p.starts.push_back(n);

    auto x = grid.positions();
    const double dx = grid.spacing();
    const std::size_t sites = p.starts.size() - 1;
    std::size_t center_index = sites;
    for (std::size_t s = 0; s < sites; ++s) {
        // Well centre: the potential minimum inside the well.
        std::size_t lo = p.starts[s], hi = p.starts[s + 1];
        std::size_t imin = lo;
        for (std::size_t i = lo; i < hi; ++i)
            if (V[i] < V[imin]) imin = i;
        p.centers.push_back(x[imin]);
        // The grid point on each inner boundary is shared half and half.
        double count = static_cast<double>(hi - lo);
        if (s == 0) count += p.wrap_shared ? 0.0 : 0.5;
        if (s + 1 == sites) count -= p.wrap_shared ? 0.0 : 0.5;
        p.widths.push_back(count * dx);
        if (x[imin] < 0.0) center_index = s;
    }
    if (center_index == sites) throw std::invalid_argument("no lattice well left of the origin");
    for (std::size_t s = 0; s < sites; ++s)
        p.labels.push_back(static_cast<int>(s) - static_cast<int>(center_index) + center_label);
    return p;
}

LatticeSiteDecomposition site_decompose(const ComplexField& psi, const SitePartition& sites) {
    const Grid& g = psi.grid();
    if (sites.starts.empty() || sites.starts.back() != g.size())
        throw std::invalid_argument("site partition does not match the field's grid");
    LatticeSiteDecomposition d;
    d.site_centers = sites.centers;
    d.labels = sites.labels;
    const double dx = g.spacing();
    double total = 0.0;
    const std::size_t n_sites = sites.size();
    for (std::size_t s = 0; s < n_sites; ++s) {
        cplx amp = 0.0;
        double pop = 0.0;
        for (std::size_t i = sites.starts[s]; i < sites.starts[s + 1]; ++i) {
            amp += psi[i];
            pop += std::norm(psi[i]);
        }
        if (s > 0) {
            const std::size_t b = sites.starts[s];
            amp -= 0.5 * psi[b];
            pop -= 0.5 * std::norm(psi[b]);
        }
        if (s + 1 < n_sites) {
            const std::size_t b = sites.starts[s + 1];
            amp += 0.5 * psi[b];
            pop += 0.5 * std::norm(psi[b]);
        }
        if (sites.wrap_shared && (s == 0 || s + 1 == n_sites)) {
            const double w = s == 0 ? -0.5 : 0.5;
            amp += w * psi[0];
            pop += w * std::norm(psi[0]);
        }
        d.site_amplitudes.push_back(amp * dx / sites.widths[s]);
        d.site_populations.push_back(pop * dx);
        d.site_phases.push_back(std::arg(d.site_amplitudes.back()));
        total += pop * dx;
    }
    for (double pop : d.site_populations) d.unreliable.push_back(pop < 1e-6 * total);
    return d;
}

LatticeSiteDecomposition site_decompose(const ComplexField& psi, const TrapSpec& trap,
                                        int center_label) {
    return site_decompose(psi, make_site_partition(trap, psi.grid(), center_label));
}

double odd_even_imbalance(const LatticeSiteDecomposition& d) {
    if (d.size() < 2) throw std::invalid_argument("imbalance needs at least two sites");
    double odd = 0.0, even = 0.0;
    for (std::size_t s = 0; s < d.size(); ++s)
        ((d.labels[s] % 2 != 0) ? odd : even) += d.site_populations[s];
    if (odd + even == 0.0) throw NumericalError("imbalance of an empty field");
    return (odd - even) / (odd + even);
}

double relative_phase(const LatticeSiteDecomposition& d, int label_i, int label_j) {
    const cplx a = d.site_amplitudes[d.index_of(label_i)];
    const cplx b = d.site_amplitudes[d.index_of(label_j)];
    if (label_i == label_j) return 0.0;
    const double ph = std::arg(a * std::conj(b));
    return ph == -std::numbers::pi ? std::numbers::pi : ph;
}

double pattern_imbalance(const ComplexField& psi, const ModelParams& params) {
    if (params.trap.has_lattice()) return odd_even_imbalance(site_decompose(psi, params.trap));
    const auto g = eval_cavity_mode(params.cavity, psi.grid());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        num += g[i] * std::norm(psi[i]);
        den += std::norm(psi[i]);
    }
    if (den == 0.0) throw NumericalError("imbalance of an empty field");
    return num / den;
}

Estimate ensemble_cos_phase(std::span<const LatticeSiteDecomposition> snapshots, int label_i,
                            int label_j) {
    if (snapshots.size() < 2) throw std::invalid_argument("cos-phase estimate needs two trajectories");
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (const auto& d : snapshots) {
        const double c = std::cos(relative_phase(d, label_i, label_j));
        ++n;
        const double delta = c - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (c - mean);
    }
    const double var = m2 / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

double g1_from_means(cplx cross, double dens_x, double dens_x2, bool same_point, double dx,
                     bool wigner_sampled) {
    const double shift = wigner_sampled ? 0.5 / dx : 0.0;
    const double a = dens_x - shift, b = dens_x2 - shift;
    if (!(a > 0.0) || !(b > 0.0)) throw NumericalError("g1 undefined where the density vanishes");
    const double c = same_point ? std::abs(cross) - shift : std::abs(cross);
    return c / std::sqrt(a * b);
}

double g1_coherence(std::span<const ComplexField> fields, std::size_t ix, std::size_t ix2,
                    bool wigner_sampled) {
    if (fields.empty()) throw std::invalid_argument("g1 needs at least one field");
    cplx cross = 0.0;
    double d1 = 0.0, d2 = 0.0;
    for (const auto& f : fields) {
        cross += std::conj(f[ix]) * f[ix2];
        d1 += std::norm(f[ix]);
        d2 += std::norm(f[ix2]);
    }
    const double n = static_cast<double>(fields.size());
    return g1_from_means(cross / n, d1 / n, d2 / n, ix == ix2, fields.front().grid().spacing(),
                         wigner_sampled);
}

MomentSet moments(const ComplexField& psi) {
    auto x = psi.grid().positions();
    double n0 = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double rho = std::norm(psi[i]);
        n0 += rho;
        n1 += x[i] * rho;
        n2 += x[i] * x[i] * rho;
    }
    if (n0 == 0.0) throw NumericalError("moments of a zero field");
    MomentSet m;
    m.q1 = n1 / n0;
    m.q2 = n2 / n0;
    m.delta_q = std::sqrt(std::max(0.0, m.q2 - m.q1 * m.q1));
    return m;
}

std::vector<double> bdg_populations(const ComplexField& psi, const BdGModeSet& modes, double t,
                                    bool wigner_sampled) {
    const ModeAmplitudes a = project_amplitudes(psi, modes, t);
    std::vector<double> pops;
    pops.reserve(a.alphas.size());
    for (cplx v : a.alphas) {
        double p = std::norm(v) - (wigner_sampled ? 0.5 : 0.0);
        pops.push_back(std::max(0.0, p));
    }
    return pops;
}

}  // namespace cavtraj
