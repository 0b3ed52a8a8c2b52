#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cavtraj/ensemble.hpp"
#include "cavtraj/errors.hpp"
#include "cavtraj/groundstate.hpp"

using namespace cavtraj;
namespace fs = std::filesystem;

namespace {

EnsembleConfig small_config(std::size_t n) {
    ModelParams p;
    p.NU = 20.0;
    p.atom_number = 500.0;
    p.cavity.kappa = 100.0;
    p.cavity.g0_sq_over_delta = 0.0256;
    p.cavity.wavenumber = 0.6;
    p.pump = PumpProfile::uniform(2.048);
    p.compensate_pump_lightshift = true;
    p.variant = Variant::TransverseEliminated;
    auto g = make_grid(128, 16.0);

    EnsembleConfig c;
    c.n_trajectories = n;
    c.base_seed = 17;
    c.params = p;
    c.scheme.dt = 1e-3;
    c.t_final = 0.2;
    c.recorder.interval = 0.05;
    c.recorder.density = true;
    c.recorder.density_stride = 8;
    c.recorder.phase_probes = {-1.0, 0.5};
    c.initial.ground = std::make_shared<GroundState>(solve_ground_state(p, g));
    c.threads = 2;
    return c;
}

// Frozen dynamics: only the measurement back-action acts.
EnsembleConfig frozen_config(std::size_t n) {
    EnsembleConfig c = small_config(n);
    c.scheme.kinetic = c.scheme.potential = c.scheme.nonlinear = false;
    c.recorder.density = false;
    c.t_final = 0.1;
    c.recorder.interval = 0.1;
    c.threads = 0;
    return c;
}

bool same_stats(const EnsembleStats& a, const EnsembleStats& b) {
    if (a.times != b.times || a.count != b.count || a.processed != b.processed) return false;
    if (a.channels.size() != b.channels.size()) return false;
    for (const auto& [name, acc] : a.channels) {
        const Accumulator& o = b.channel(name);
        if (acc.width != o.width || acc.mean != o.mean || acc.m2 != o.m2) return false;
    }
    return true;
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("cavtraj_test_" + name);
    fs::remove(p);
    return p;
}

}  // namespace

TEST_CASE("a single trajectory is its own ensemble") {
    EnsembleConfig c = small_config(1);
    TrajectoryOutput t = run_trajectory(make_initial_state(c, 0), c.params, c.scheme, c.t_final, c.recorder);
    EnsembleStats s = run_ensemble(c);
    REQUIRE(s.count == 1);
    CHECK(s.times == t.times);
    for (const auto& [name, ser] : t.channels) {
        CHECK(s.channel(name).mean == ser.data);
        CHECK(s.variance(name, 0) == 0.0);
    }
}

TEST_CASE("ensembles are reproducible and independent of the thread count") {
    EnsembleConfig c = small_config(6);
    EnsembleStats a = run_ensemble(c);
    EnsembleStats b = run_ensemble(c);
    c.threads = 1;
    EnsembleStats serial = run_ensemble(c);
    c.threads = 5;
    EnsembleStats wide = run_ensemble(c);
    CHECK(same_stats(a, b));
    CHECK(same_stats(a, serial));
    CHECK(same_stats(a, wide));
    CHECK(a.count == 6);
    CHECK(a.failed.empty());
}

TEST_CASE("checkpoints resume to the uninterrupted result") {
    EnsembleConfig c = small_config(8);
    EnsembleStats whole = run_ensemble(c);

    c.checkpoint_path = scratch("resume.json").string();
    c.stop_after = 3;
    EnsembleStats part = run_ensemble(c);
    CHECK(part.processed == 3);
    CHECK_FALSE(part.complete(8));
    c.stop_after = 0;
    EnsembleStats resumed = resume_ensemble(c);
    CHECK(same_stats(whole, resumed));

    SUBCASE("a complete checkpoint is returned as stored") {
        bool ran = false;
        c.on_trajectory = [&](std::size_t, const TrajectoryOutput&) { ran = true; };
        EnsembleStats again = resume_ensemble(c);
        CHECK_FALSE(ran);
        CHECK(same_stats(whole, again));
    }
    SUBCASE("different physics is refused") {
        EnsembleConfig other = c;
        other.params.cavity.kappa = 99.0;
        CHECK_THROWS_AS(resume_ensemble(other), ConfigError);
        other = c;
        other.base_seed = 18;
        CHECK_THROWS_AS(resume_ensemble(other), ConfigError);
        other = c;
        other.n_trajectories = 9;
        CHECK_THROWS_AS(resume_ensemble(other), ConfigError);
    }
    SUBCASE("a tampered checkpoint is refused") {
        std::ifstream in(c.checkpoint_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        const auto pos = text.find("\"count\"");
        REQUIRE(pos != std::string::npos);
        const auto digit = text.find_first_of("0123456789", pos);
        text[digit] = text[digit] == '8' ? '7' : '8';
        std::ofstream(c.checkpoint_path) << text;
        CHECK_THROWS_AS(resume_ensemble(c), ConfigError);
    }
    fs::remove(c.checkpoint_path);
}

TEST_CASE("resuming needs a checkpoint") {
    EnsembleConfig c = small_config(3);
    c.checkpoint_path = scratch("missing.json").string();
    CHECK_THROWS_AS(resume_ensemble(c), ConfigError);
}

TEST_CASE("standard error falls as one over root n") {
    double se[3];
    const std::size_t sizes[3] = {100, 400, 1600};
    for (int k = 0; k < 3; ++k) {
        EnsembleStats s = run_ensemble(frozen_config(sizes[k]));
        se[k] = s.standard_error("probe_phase", 1, 0);
        REQUIRE(se[k] > 0.0);
    }
    CHECK(se[0] / se[1] == doctest::Approx(2.0).epsilon(0.2));
    CHECK(se[1] / se[2] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("neighbouring seeds are uncorrelated") {
    EnsembleConfig c = frozen_config(2000);
    std::vector<double> phase(c.n_trajectories);
    c.on_trajectory = [&](std::size_t i, const TrajectoryOutput& t) { phase[i] = t.channel("probe_phase").at(1, 0); };
    run_ensemble(c);
    const std::size_t pairs = phase.size() / 2;
    double ma = 0, mb = 0;
    for (std::size_t k = 0; k < pairs; ++k) {
        ma += phase[2 * k];
        mb += phase[2 * k + 1];
    }
    ma /= pairs;
    mb /= pairs;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < pairs; ++k) {
        const double a = phase[2 * k] - ma, b = phase[2 * k + 1] - mb;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    const double r = sab / std::sqrt(saa * sbb);
    MESSAGE("correlation of neighbouring trajectories: " << r);
    CHECK(std::abs(r) < 3.0 / std::sqrt(static_cast<double>(pairs)));
}
