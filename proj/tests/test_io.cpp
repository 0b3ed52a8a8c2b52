#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cavtraj/errors.hpp"
#include "cavtraj/io.hpp"

using namespace cavtraj;
namespace fs = std::filesystem;

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table read_csv(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    Table t;
    std::string line;
    std::getline(in, line);
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::vector<double> row;
        for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
        t.rows.push_back(row);
    }
    return t;
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("cavtraj_io_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig harmonic_run() {
    RunConfig c = parse_config(R"(
preset: kohn
grid: {n_points: 256, extent: 20}
initial: {bdg_modes: 4, sample_noise: true}
cavity: {wavenumber_samples: 41}
scheme: {t_final: 0.1, dt: 1.0e-3}
record: {interval: 0.05, density_stride: 8}
ensemble: {trajectories: 4, threads: 2}
)");
    return c;
}

RunConfig lattice_run() {
    return parse_config(R"(
preset: lattice-selforg
grid: {n_points: 512}
scheme: {t_final: 0.02, dt: 1.0e-3}
record: {interval: 0.01, density_stride: 16}
ensemble: {trajectories: 3, threads: 1}
)");
}

}  // namespace

TEST_CASE("csv writer keeps full precision and rectangular rows") {
    fs::path dir = fresh_dir("writer");
    fs::create_directories(dir);
    {
        CsvWriter w(dir / "a.csv", {"x", "n"});
        w << 0.1 << 3;
        w.end_row();
        w << 1.0 / 3.0 << std::size_t{7};
        w.end_row();
        CHECK_THROWS(w.end_row());  // empty row
        w.close();
        CHECK(w.rows() == 2);
    }
    Table t = read_csv(dir / "a.csv");
    CHECK(t.header == std::vector<std::string>{"x", "n"});
    CHECK(t.rows[0][0] == 0.1);
    CHECK(t.rows[1][0] == 1.0 / 3.0);
    CHECK(t.rows[1][1] == 7.0);

    CsvWriter w(dir / "b.csv", {"x"});
    w << 1.0;
    CHECK_THROWS(w << 2.0);
    fs::remove_all(dir);
}

TEST_CASE("output directories refuse to clobber results") {
    fs::path dir = fresh_dir("clobber");
    RunConfig c = harmonic_run();
    {
        OutputDir out(dir, false);
        CsvWriter w(out.file("x.csv"), {"a"});
        w << 1.0;
        w.end_row();
        w.close();
        auto m = out.write_manifest(c, {{"command", "test"}});
        CHECK(m["files"]["x.csv"] == file_hash(dir / "x.csv"));
        CHECK(m["version"] == code_version);
    }
    CHECK_THROWS_AS(OutputDir(dir, false), ConfigError);
    CHECK_NOTHROW(OutputDir(dir, true));
    fs::remove_all(dir);
}

TEST_CASE("ground state, mode and ensemble files follow their column contracts") {
    const Prepared p = prepare(harmonic_run());
    fs::path dir = fresh_dir("harmonic");
    OutputDir out(dir, false);
    write_ground_state_csv(out, *p.ground);
    write_bdg_csv(out, *p.modes, p.config.model.cavity);
    EnsembleConfig e = make_ensemble_config(p);
    const EnsembleStats stats = run_ensemble(e);
    write_ensemble_csv(out, stats, p);
    out.write_manifest(p.config);

    Table gs = read_csv(dir / "ground_state.csv");
    CHECK(gs.header == columns::ground_state);
    CHECK(gs.rows.size() == 256);

    Table bdg = read_csv(dir / "bdg_modes.csv");
    CHECK(bdg.header == columns::bdg_modes);
    REQUIRE(bdg.rows.size() == 4);
    CHECK(bdg.rows[0][1] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(bdg.rows[0][2]) == doctest::Approx(std::abs(p.target_overlap)));

    Table dens = read_csv(dir / "ensemble_density.csv");
    CHECK(dens.header == columns::ensemble_density);
    const std::size_t nx = 256 / 8, nt = stats.times.size();
    REQUIRE(dens.rows.size() == nx * nt);
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t k = 0; k < nx; ++k) {
            const auto& r = dens.rows[t * nx + k];
            CHECK(r[0] == stats.times[t]);
            CHECK(r[1] == p.grid->positions()[8 * k]);
        }

    Table bpop = read_csv(dir / "ensemble_bdg.csv");
    CHECK(bpop.header == columns::ensemble_bdg);
    CHECK(bpop.rows.size() == 4 * nt);

    Table g1 = read_csv(dir / "ensemble_g1.csv");
    CHECK(g1.header == columns::ensemble_g1);
    CHECK(g1.rows.size() == 3 * nt);

    Table sc = read_csv(dir / "ensemble_scalars.csv");
    CHECK(sc.header[0] == "t");
    CHECK(sc.header[1] == "n");
    for (const char* col : {"abs_q1_mean", "abs_q1_se", "delta_q_mean", "rate_mean"})
        CHECK(std::find(sc.header.begin(), sc.header.end(), col) != sc.header.end());
    CHECK(sc.rows.size() == nt);
    fs::remove_all(dir);
}

TEST_CASE("lattice trajectory and ensemble files") {
    const Prepared p = prepare(lattice_run());
    fs::path dir = fresh_dir("lattice");
    OutputDir out(dir, false);
    EnsembleConfig e = make_ensemble_config(p);
    TrajectoryOutput traj = run_trajectory(make_initial_state(e, 0), e.params, e.scheme, e.t_final, e.recorder);
    write_trajectory_csv(out, traj, p);
    const EnsembleStats stats = run_ensemble(e);
    write_ensemble_csv(out, stats, p);

    const std::size_t nt = traj.times.size();
    Table d = read_csv(dir / "trajectory_density.csv");
    CHECK(d.header == columns::density);
    CHECK(d.rows.size() == nt * (512 / 16));

    Table s = read_csv(dir / "trajectory_sites.csv");
    CHECK(s.header == columns::trajectory_sites);
    const std::size_t n_sites = traj.channel("site_population").width;
    REQUIRE(s.rows.size() == nt * n_sites);
    for (std::size_t k = 1; k < n_sites; ++k) CHECK(s.rows[k][1] == s.rows[k - 1][1] + 1);

    Table cos = read_csv(dir / "ensemble_cos_phase.csv");
    CHECK(cos.header == columns::ensemble_cos_phase);
    CHECK(cos.rows.size() == nt * p.config.record.site_pairs.size());
    CHECK(cos.rows[0][3] == doctest::Approx(1.0));  // coherent start

    Table sc = read_csv(dir / "trajectory_scalars.csv");
    CHECK(std::find(sc.header.begin(), sc.header.end(), "imbalance") != sc.header.end());
    fs::remove_all(dir);
}

TEST_CASE("scan files") {
    fs::path dir = fresh_dir("scans");
    OutputDir out(dir, false);
    auto g = make_grid(64, 10.0);
    ThresholdPoint tp{2.0, SteadyStateResult{ComplexField(g), cplx(0.5, -1.0), 0.25, true, 12, 0.0}};
    write_threshold_csv(out, {tp});
    WavelengthPoint wp{0.5, 0.2, {0.1, 0.01}, {0.3, 0.02}};
    write_wavelength_csv(out, {wp});
    Table t = read_csv(dir / "threshold_scan.csv");
    CHECK(t.header == columns::threshold_scan);
    CHECK(t.rows.at(0) == std::vector<double>{2.0, 0.25, 0.5, -1.0, 1.0, 12.0});
    Table w = read_csv(dir / "wavelength_scan.csv");
    CHECK(w.header == columns::wavelength_scan);
    CHECK(w.rows.at(0) == std::vector<double>{0.5, 0.2, 0.1, 0.01, 0.3, 0.02});
    fs::remove_all(dir);
}

TEST_CASE("a manifest reproduces its run") {
    fs::path d1 = fresh_dir("first"), d2 = fresh_dir("second");
    std::string hash;
    {
        const Prepared p = prepare(harmonic_run());
        OutputDir out(d1, false);
        write_ensemble_csv(out, run_ensemble(make_ensemble_config(p)), p);
        out.write_manifest(p.config);
        hash = file_hash(d1 / "ensemble_scalars.csv");
    }
    const RunConfig again = load_config((d1 / "manifest.json").string());
    const Prepared p = prepare(again);
    OutputDir out(d2, false);
    write_ensemble_csv(out, run_ensemble(make_ensemble_config(p)), p);
    CHECK(file_hash(d2 / "ensemble_scalars.csv") == hash);
    CHECK(file_hash(d2 / "ensemble_density.csv") == file_hash(d1 / "ensemble_density.csv"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}
