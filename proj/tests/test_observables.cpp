#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cavtraj/bdg.hpp"
#include "cavtraj/config.hpp"
#include "cavtraj/groundstate.hpp"
#include "cavtraj/observables.hpp"

using namespace cavtraj;

namespace {

struct Lattice {
    RunConfig config = make_preset("lattice-selforg");
    GridPtr grid = make_grid(config.grid.n_points, config.grid.extent);
    GroundState ground = solve_ground_state(config.model, grid);
    SitePartition sites = make_site_partition(config.model.trap, *grid, 12);
};

const Lattice& lattice() {
    static const Lattice l;
    return l;
}

}  // namespace

TEST_CASE("site partition of the lattice ground state") {
    const Lattice& l = lattice();
    ComplexField psi = std::sqrt(750.0) * l.ground.psi0;
    auto d = site_decompose(psi, l.sites);

    double sum = 0.0;
    for (double p : d.site_populations) sum += p;
    CHECK(std::abs(sum - psi.norm()) < 1e-10 * psi.norm());

    const std::size_t i12 = d.index_of(12), i13 = d.index_of(13);
    CHECK(d.site_centers[i12] < 0.0);
    CHECK(d.site_centers[i13] > 0.0);
    const double top = *std::max_element(d.site_populations.begin(), d.site_populations.end());
    CHECK(std::max(d.site_populations[i12], d.site_populations[i13]) == top);
    // mirror pairs 12-k and 13+k
    for (int k = 0; k < 10; ++k) {
        const double a = d.site_populations[d.index_of(12 - k)], b = d.site_populations[d.index_of(13 + k)];
        CHECK(std::abs(a - b) < 1e-6 * top);
    }
    CHECK(std::abs(odd_even_imbalance(d)) < 1e-6);
    for (std::size_t s = 0; s < d.size(); ++s) CHECK(std::abs(d.site_phases[s]) < 1e-10);
}

TEST_CASE("site phases, relative phases and imbalance") {
    const Lattice& l = lattice();
    ComplexField psi = std::polar(1.0, 2.1) * l.ground.psi0;
    auto d = site_decompose(psi, l.sites);
    for (std::size_t s = 0; s < d.size(); ++s)
        if (!d.unreliable[s]) CHECK(std::abs(d.site_phases[s] - 2.1) < 1e-10);

    // give each well its own phase
    ComplexField twisted = l.ground.psi0;
    for (std::size_t s = 0; s < l.sites.size(); ++s)
        for (std::size_t i = l.sites.starts[s]; i < l.sites.starts[s + 1]; ++i)
            twisted[i] *= std::polar(1.0, 0.37 * l.sites.labels[s]);
    auto t = site_decompose(twisted, l.sites);
    CHECK(relative_phase(t, 12, 12) == 0.0);
    for (int j : {13, 14, 17}) {
        const double a = relative_phase(t, 12, j), b = relative_phase(t, j, 12);
        CHECK(std::abs(std::remainder(a + b, 2 * std::numbers::pi)) < 1e-10);
        // shared boundary points blend the neighbours' phases slightly
        CHECK(std::abs(std::remainder(a - 0.37 * (12 - j), 2 * std::numbers::pi)) < 1e-4);
        CHECK(a > -std::numbers::pi);
        CHECK(a <= std::numbers::pi);
    }

    ComplexField one(l.grid);
    const std::size_t s15 = l.sites.index_of(15);
    for (std::size_t i = l.sites.starts[s15] + 1; i < l.sites.starts[s15 + 1]; ++i) one[i] = 1.0;
    CHECK(odd_even_imbalance(site_decompose(one, l.sites)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pattern_imbalance(one, l.config.model) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("phase coherence estimators") {
    const Lattice& l = lattice();
    std::vector<LatticeSiteDecomposition> snaps(5, site_decompose(l.ground.psi0, l.sites));
    Estimate e = ensemble_cos_phase(snaps, 12, 17);
    CHECK(e.mean == 1.0);
    CHECK(e.se == 0.0);

    std::vector<ComplexField> fields(4, std::sqrt(750.0) * l.ground.psi0);
    CHECK(g1_coherence(fields, 400, 600) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g1_coherence(fields, 500, 500) == doctest::Approx(1.0).epsilon(1e-14));

    // random phases: cos estimator is order independent up to rounding
    std::vector<LatticeSiteDecomposition> varied;
    for (int k = 0; k < 30; ++k) {
        ComplexField f = l.ground.psi0;
        const std::size_t s = l.sites.index_of(14);
        for (std::size_t i = l.sites.starts[s]; i < l.sites.starts[s + 1]; ++i) f[i] *= std::polar(1.0, 0.1 * k * k);
        varied.push_back(site_decompose(f, l.sites));
    }
    Estimate fwd = ensemble_cos_phase(varied, 12, 14);
    std::reverse(varied.begin(), varied.end());
    Estimate rev = ensemble_cos_phase(varied, 12, 14);
    CHECK(std::abs(fwd.mean - rev.mean) < 1e-14);
    CHECK(std::abs(fwd.se - rev.se) < 1e-14);

    // Wigner vacuum term is removed from both the cross term and the densities
    const double dx = 0.1;
    CHECK(g1_from_means(cplx(4.0 + 5.0, 0.0), 4.0 + 5.0, 4.0 + 5.0, true, dx, true) == doctest::Approx(1.0));
    CHECK(g1_from_means(cplx(2.0, 0.0), 4.0 + 5.0, 4.0 + 5.0, false, dx, true) == doctest::Approx(0.5));
}

TEST_CASE("position moments") {
    auto g = make_grid(512, 20.0);
    ModelParams p;
    GroundState gs = solve_ground_state(p, g);
    MomentSet m = moments(gs.psi0);
    CHECK(std::abs(m.q1) < 1e-10);
    CHECK(m.delta_q == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));

    const double d = 0.8;  // 20.48 grid spacings is not a grid shift, so use the closed form
    ComplexField shifted(g);
    auto x = g->positions();
    for (std::size_t i = 0; i < shifted.size(); ++i)
        shifted[i] = std::pow(std::numbers::pi, -0.25) * std::exp(-(x[i] - d) * (x[i] - d) / 2);
    CHECK(std::abs(moments(shifted).q1 - d) < 1e-8);
}

TEST_CASE("BdG populations") {
    auto g = make_grid(512, 20.0);
    ModelParams p;
    p.NU = 64.0;
    GroundState gs = solve_ground_state(p, g);
    BdGModeSet modes = solve_bdg(gs, p, 4);
    ComplexField psi = std::sqrt(750.0) * gs.psi0;
    for (double v : bdg_populations(psi, modes, 0.0)) CHECK(std::abs(v) < 1e-10);
    for (double v : bdg_populations(psi, modes, 0.0, true)) CHECK(v == 0.0);

    const cplx c(1.5, 0.0);
    const BdGMode& m3 = modes.mode(3);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += c * m3.u[i] - std::conj(c) * std::conj(m3.v[i]);
    auto pops = bdg_populations(psi, modes, 0.0);
    CHECK(pops[2] == doctest::Approx(2.25).epsilon(1e-10));
    CHECK(bdg_populations(psi, modes, 0.0, true)[2] == doctest::Approx(1.75).epsilon(1e-10));
}
