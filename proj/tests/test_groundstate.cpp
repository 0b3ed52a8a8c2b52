#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavtraj/config.hpp"
#include "cavtraj/groundstate.hpp"
#include "cavtraj/observables.hpp"

using namespace cavtraj;

namespace {

// Thomas-Fermi chemical potential in V = x^2/2 from the normalisation
// integral int max(mu - V, 0)/NU dx = 1, solved by bisection.
double thomas_fermi_mu(double NU) {
    auto atoms = [&](double mu) {
        const double R = std::sqrt(2 * mu);
        const int n = 20000;
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = -R + (i + 0.5) * 2 * R / n;
            s += (mu - 0.5 * x * x) / NU;
        }
        return s * 2 * R / n;
    };
    double lo = 0.0, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (atoms(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ModelParams harmonic(double NU) {
    ModelParams p;
    p.NU = NU;
    return p;
}

}  // namespace

TEST_CASE("noninteracting harmonic ground state") {
    auto g = make_grid(512, 20.0);
    GroundState gs = solve_ground_state(harmonic(0.0), g);
    CHECK(std::abs(gs.mu - 0.5) < 1e-6);
    CHECK(gs.residual < 1e-10);
    double err = 0.0;
    auto x = g->positions();
    for (std::size_t i = 0; i < g->size(); ++i)
        err = std::max(err, std::abs(gs.psi0[i] - std::pow(std::numbers::pi, -0.25) * std::exp(-x[i] * x[i] / 2)));
    CHECK(err < 1e-6);
    CHECK(gs.psi0.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("interacting ground state against the Thomas-Fermi limit") {
    auto g = make_grid(512, 20.0);
    GroundState gs = solve_ground_state(harmonic(64.0), g);
    const double tf = thomas_fermi_mu(64.0);
    CHECK(tf == doctest::Approx(std::pow(3 * 64.0 / (4 * std::sqrt(2.0)), 2.0 / 3.0)).epsilon(1e-6));
    CHECK(std::abs(gs.mu - tf) / tf < 0.02);
    CHECK(gs.mu > 0.5);
}

TEST_CASE("ground state energy never rises and the state is even") {
    auto g = make_grid(512, 20.0);
    GroundStateOptions opt;
    opt.record_energy_history = true;
    GroundState gs = solve_ground_state(harmonic(16.0), g, opt);
    REQUIRE(gs.energy_history.size() > 2);
    for (std::size_t i = 1; i < gs.energy_history.size(); ++i)
        CHECK(gs.energy_history[i] <= gs.energy_history[i - 1] * (1 + 1e-12));
    const std::size_t n = g->size();
    double asym = 0.0;
    for (std::size_t i = 1; i < n; ++i) asym = std::max(asym, std::abs(gs.psi0[i] - gs.psi0[n - i]));
    CHECK(asym < 1e-8);
    CHECK(gs.energy == doctest::Approx(gp_energy(gs.psi0, gs.potential, 16.0)).epsilon(1e-12));
}

TEST_CASE("lattice ground state populates about 22 sites") {
    RunConfig c = make_preset("lattice-selforg");
    auto g = make_grid(c.grid.n_points, c.grid.extent);
    GroundState gs = solve_ground_state(c.model, g);
    auto d = site_decompose(gs.psi0, c.model.trap, 12);
    int significant = 0;
    for (double p : d.site_populations) significant += p > 0.01 ? 1 : 0;
    MESSAGE("sites holding more than 1% of the atoms: " << significant);
    CHECK(significant >= 20);
    CHECK(significant <= 24);
    // the two central wells carry the most atoms
    const double p12 = d.site_populations[d.index_of(12)], p13 = d.site_populations[d.index_of(13)];
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.labels[i] == 12 || d.labels[i] == 13) continue;
        CHECK(d.site_populations[i] < std::min(p12, p13));
    }
}

TEST_CASE("self-organised steady states") {
    RunConfig c = make_preset("lattice-selforg");
    auto g = make_grid(c.grid.n_points, c.grid.extent);

    SUBCASE("zero pump") {
        ModelParams p = c.model;
        p.pump.amplitude = 0.0;
        SteadyStateResult r = solve_selforg_steady_state(p, g, 1.0);
        CHECK(r.converged);
        CHECK(std::abs(r.alpha_ss) == 0.0);
        CHECK(std::abs(r.imbalance) < 1e-7);
    }
    SUBCASE("physical pump is below threshold") {
        SteadyStateResult r = solve_selforg_steady_state(c.model, g, 1.0);
        CHECK(r.converged);
        CHECK(std::abs(r.imbalance) < 1e-3);
    }
    SUBCASE("strong pump organises, and the seed picks the sign") {
        // 16 whole cavity wavelengths in the box, so mirroring the grid maps
        // the cavity mode exactly onto minus itself
        auto gm = make_grid(c.grid.n_points, 16 * 2 * std::numbers::pi / 8.1);
        SteadyStateOptions odd, even;
        odd.tol = even.tol = 1e-11;
        even.seed_parity = -1;
        SteadyStateResult a = solve_selforg_steady_state(c.model, gm, 14.0, odd);
        SteadyStateResult b = solve_selforg_steady_state(c.model, gm, 14.0, even);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK(a.imbalance > 0.1);
        CHECK(b.imbalance < -0.1);
        CHECK(std::abs(a.imbalance + b.imbalance) < 1e-8);
        CHECK(std::abs(a.alpha_ss.real() + b.alpha_ss.real()) < 1e-8 * std::abs(a.alpha_ss));
        CHECK(std::abs(a.alpha_ss.imag() + b.alpha_ss.imag()) < 1e-8 * std::abs(a.alpha_ss));
        // the cavity amplitude follows the mean-field relation
        ModelProfiles prof = evaluate_profiles(c.model, gm);
        const cplx expect = steady_alpha(a.psi_ss, c.model, prof, 14.0);
        CHECK(std::abs(a.alpha_ss - expect) < 1e-6 * std::abs(expect));
    }
}
