#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavtraj/config.hpp"
#include "cavtraj/errors.hpp"
#include "cavtraj/groundstate.hpp"
#include "cavtraj/model.hpp"

using namespace cavtraj;

TEST_CASE("trap potential") {
    auto g = make_grid(256, 16.0);
    TrapSpec harmonic;
    auto v = eval_trap_potential(harmonic, *g);
    const std::size_t i2 = g->nearest_index(2.0);
    REQUIRE(g->positions()[i2] == 2.0);
    CHECK(v[i2] == 2.0);
    for (std::size_t i = 1; i < g->size(); ++i) CHECK(v[i] == v[g->size() - i]);

    TrapSpec lattice;
    lattice.lattice_depth_s = 10.0;
    lattice.lattice_wavenumber = 8.1;
    auto vl = eval_trap_potential(lattice, *g);
    const std::size_t i0 = g->nearest_index(0.0);
    CHECK(vl[i0] == doctest::Approx(10.0 * lattice.recoil_energy()));
    CHECK(lattice.recoil_energy() == doctest::Approx(0.5 * 8.1 * 8.1));
}

TEST_CASE("lattice wells sit where the cavity mode is strongest") {
    auto g = make_grid(4096, 12.0);
    TrapSpec lattice;
    lattice.lattice_depth_s = 10.0;
    lattice.lattice_wavenumber = 8.1;
    CavitySpec cav;
    cav.wavenumber = 8.1;
    auto v = eval_trap_potential(lattice, *g);
    auto m = eval_cavity_mode(cav, *g);
    int minima = 0;
    for (std::size_t i = 1; i + 1 < g->size(); ++i) {
        if (std::abs(g->positions()[i]) > 3.0) continue;
        if (v[i] < v[i - 1] && v[i] < v[i + 1]) {
            ++minima;
            // within one grid spacing of |g| = 1
            CHECK(std::abs(m[i]) > std::cos(8.1 * g->spacing()) - 1e-12);
        }
    }
    CHECK(minima >= 6);
}

TEST_CASE("cavity mode parity") {
    auto g = make_grid(512, 20.0);
    CavitySpec cav;
    cav.wavenumber = 0.7;
    auto odd = eval_cavity_mode(cav, *g);
    const std::size_t c = g->nearest_index(0.0);
    CHECK(odd[c] == 0.0);
    for (std::size_t i = 1; i < g->size(); ++i) CHECK(odd[i] == doctest::Approx(-odd[g->size() - i]).epsilon(1e-12));
    cav.phase_offset = std::numbers::pi / 2;
    auto even = eval_cavity_mode(cav, *g);
    CHECK(even[c] == doctest::Approx(1.0));
    for (std::size_t i = 1; i < g->size(); ++i)
        CHECK(std::abs(even[i] - even[g->size() - i]) < 1e-12);
}

TEST_CASE("pump profiles") {
    auto g = make_grid(1024, 20.0);
    auto z = eval_pump(PumpProfile::zero(), *g);
    for (double v : z) CHECK(v == 0.0);
    auto u = eval_pump(PumpProfile::uniform(1.0, 0.7), *g);
    for (double v : u) CHECK(v == 0.7);

    PumpProfile gp = PumpProfile::gaussian(1.0, 2.0, 3.2, 1.0);
    auto gg = make_grid(1024, 25.6);  // spacing 0.025 puts 3.2 on the grid
    auto p = eval_pump(gp, *gg);
    const std::size_t ic = gg->nearest_index(3.2);
    REQUIRE(std::abs(gg->positions()[ic] - 3.2) < 1e-12);
    CHECK(p[ic] == doctest::Approx(2.0));
    for (double off : {-3.0, 3.0}) {
        const std::size_t i = gg->nearest_index(3.2 + off);
        REQUIRE(std::abs(gg->positions()[i] - 3.2 - off) < 1e-12);
        CHECK(p[i] < 0.012 * 2.0);
    }
}

TEST_CASE("parameter validation") {
    ModelParams p;
    p.cavity.kappa = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.cavity.kappa = 10.0;
    p.cavity.phase_offset = 7.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.cavity.phase_offset = 0.0;
    p.atom_number = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.atom_number = 100.0;
    p.f_order = 2;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.f_order = 0;
    CHECK_NOTHROW(p.validate());
    CHECK(variant_from_string(to_string(Variant::AxialEliminated)) == Variant::AxialEliminated);
    CHECK_THROWS_AS(variant_from_string("sideways"), ConfigError);
}

TEST_CASE("light shift derived from the coupling combinations") {
    ModelParams p;
    p.cavity.g0_sq_over_delta = 0.0256;
    p.pump = PumpProfile::uniform(2.048);
    CHECK(p.light_shift_strength() == doctest::Approx(2.048 * 2.048 / 0.0256));
    p.pump.h0_sq_over_delta = 5.0;
    CHECK(p.light_shift_strength() == 5.0);
}

TEST_CASE("validity diagnostics") {
    auto g = make_grid(256, 20.0);
    ComplexField flat(g);
    for (auto& v : flat.values()) v = 1.0;

    ModelParams p;
    p.atom_number = 1000.0;
    p.NU = 0.0;
    ValidityReport r0 = validity_diagnostics(flat, p);
    CHECK(r0.classical_limit);
    CHECK(r0.tonks_gamma == 0.0);
    CHECK(std::isinf(r0.healing_length));

    // uniform density N/L: gamma = U L / N = NU L / N^2 = 0.02
    p.NU = 0.02 * 1000.0 * 1000.0 / 20.0;
    ValidityReport r = validity_diagnostics(flat, p);
    CHECK(r.tonks_gamma == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(r.atoms_per_healing_length == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.min_site_occupation == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("gamma at fixed NU falls as 1/N^2 for a fixed profile") {
    auto g = make_grid(512, 20.0);
    ModelParams p;
    p.NU = 64.0;
    GroundState gs = solve_ground_state(p, g);
    p.atom_number = 500.0;
    const double g1 = validity_diagnostics(gs.psi0, p).tonks_gamma;
    p.atom_number = 1000.0;
    const double g2 = validity_diagnostics(gs.psi0, p).tonks_gamma;
    // U = NU/N halves and the peak density doubles
    CHECK(std::abs(g2 - g1 / 4.0) < 1e-12 * g1);
}

TEST_CASE("the harmonic presets sit deep in the adiabatic regime") {
    RunConfig c = make_preset("kohn");
    auto g = make_grid(c.grid.n_points, c.grid.extent);
    GroundState gs = solve_ground_state(c.model, g);
    ValidityReport r = validity_diagnostics(gs.psi0, c.model);
    CHECK(r.adiabatic_small_parameter < 0.05);
    CHECK(r.atoms_per_healing_length > 1.0);
    CHECK(r.warnings.empty());
}
