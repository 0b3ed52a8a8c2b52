#include "cavtraj/io.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include "cavtraj/errors.hpp"

namespace cavtraj {

namespace fs = std::filesystem;

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path), width_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::sep() {
    if (col_ >= width_) throw std::logic_error("too many columns for " + path_.string());
    if (col_++) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
    sep();
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    out_.write(buf, r.ptr - buf);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
    sep();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    if (col_ != width_) throw std::logic_error("short row in " + path_.string());
    out_ << '\n';
    col_ = 0;
    ++rows_;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
}

std::string file_hash(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return content_hash(ss.str());
}

OutputDir::OutputDir(const fs::path& dir, bool force) : dir_(dir) {
    if (fs::exists(dir_ / "manifest.json") && !force)
        throw ConfigError("output directory " + dir_.string() +
                          " already holds results; use --force to overwrite");
    fs::create_directories(dir_);
}

fs::path OutputDir::file(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
}

nlohmann::json OutputDir::write_manifest(const RunConfig& config, nlohmann::json extra) {
    nlohmann::json m;
    m["tool"] = "cavtraj";
    m["version"] = code_version;
    m["config"] = config_to_json(config);
    nlohmann::json files = nlohmann::json::object();
    for (const auto& f : files_) files[f] = file_hash(dir_ / f);
    m["files"] = files;
    if (!extra.is_null()) m["run"] = std::move(extra);
    std::ofstream o(dir_ / "manifest.json");
    o << m.dump(2) << '\n';
    if (!o) throw std::runtime_error("failed writing manifest in " + dir_.string());
    return m;
}

void write_ground_state_csv(OutputDir& out, const GroundState& gs) {
    CsvWriter w(out.file("ground_state.csv"), columns::ground_state);
    auto x = gs.psi0.grid().positions();
    for (std::size_t i = 0; i < gs.psi0.size(); ++i) {
        w << x[i] << gs.potential[i] << gs.psi0[i].real() << gs.psi0[i].imag() << std::norm(gs.psi0[i]);
        w.end_row();
    }
    w.close();
}

void write_bdg_csv(OutputDir& out, const BdGModeSet& modes, const CavitySpec& cavity) {
    CsvWriter w(out.file("bdg_modes.csv"), columns::bdg_modes);
    const auto g = eval_cavity_mode(cavity, modes.ground.psi0.grid());
    for (std::size_t j = 1; j <= modes.size(); ++j) {
        w << j << modes.mode(j).energy << overlap_integral(j, g, modes) << modes.mode(j).parity;
        w.end_row();
    }
    w.close();
}

namespace {

std::vector<std::string> present_scalars(const auto& channels) {
    std::vector<std::string> out;
    for (const auto& name : columns::scalar_channels)
        if (channels.count(name)) out.push_back(name);
    return out;
}

std::vector<double> density_positions(const Grid& g, std::size_t stride) {
    std::vector<double> xs;
    auto x = g.positions();
    for (std::size_t i = 0; i < g.size(); i += stride) xs.push_back(x[i]);
    return xs;
}

}  // namespace

void write_trajectory_csv(OutputDir& out, const TrajectoryOutput& traj, const Prepared& p,
                          const std::string& prefix) {
    const auto scalars = present_scalars(traj.channels);
    {
        std::vector<std::string> header{"t"};
        header.insert(header.end(), scalars.begin(), scalars.end());
        CsvWriter w(out.file(prefix + "_scalars.csv"), header);
        for (std::size_t t = 0; t < traj.times.size(); ++t) {
            w << traj.times[t];
            for (const auto& s : scalars) w << traj.channel(s).at(t);
            w.end_row();
        }
        w.close();
    }
    if (traj.channels.count("density")) {
        const auto xs = density_positions(*p.grid, p.config.record.density_stride);
        const Series& d = traj.channel("density");
        CsvWriter w(out.file(prefix + "_density.csv"), columns::density);
        for (std::size_t t = 0; t < traj.times.size(); ++t)
            for (std::size_t k = 0; k < d.width; ++k) {
                w << traj.times[t] << xs[k] << d.at(t, k);
                w.end_row();
            }
        w.close();
    }
    if (traj.channels.count("site_population")) {
        const SitePartition sites =
            make_site_partition(p.config.model.trap, *p.grid, p.config.record.center_label);
        const Series& pop = traj.channel("site_population");
        const Series& ph = traj.channel("site_phase");
        CsvWriter w(out.file(prefix + "_sites.csv"), columns::trajectory_sites);
        for (std::size_t t = 0; t < traj.times.size(); ++t)
            for (std::size_t s = 0; s < pop.width; ++s) {
                w << traj.times[t] << sites.labels[s] << sites.centers[s] << pop.at(t, s) << ph.at(t, s);
                w.end_row();
            }
        w.close();
    }
    if (traj.channels.count("bdg_population")) {
        const Series& b = traj.channel("bdg_population");
        CsvWriter w(out.file(prefix + "_bdg.csv"), columns::trajectory_bdg);
        for (std::size_t t = 0; t < traj.times.size(); ++t)
            for (std::size_t j = 0; j < b.width; ++j) {
                w << traj.times[t] << j + 1 << b.at(t, j);
                w.end_row();
            }
        w.close();
    }
}

void write_ensemble_csv(OutputDir& out, const EnsembleStats& stats, const Prepared& p) {
    const auto scalars = present_scalars(stats.channels);
    const std::size_t nt = stats.times.size();
    {
        std::vector<std::string> header{"t", "n"};
        for (const auto& s : scalars) {
            header.push_back(s + "_mean");
            header.push_back(s + "_se");
        }
        CsvWriter w(out.file("ensemble_scalars.csv"), header);
        for (std::size_t t = 0; t < nt; ++t) {
            w << stats.times[t] << stats.count;
            for (const auto& s : scalars) w << stats.mean(s, t) << stats.standard_error(s, t);
            w.end_row();
        }
        w.close();
    }
    if (stats.channels.count("density")) {
        const auto xs = density_positions(*p.grid, p.config.record.density_stride);
        const std::size_t width = stats.channel("density").width;
        CsvWriter w(out.file("ensemble_density.csv"), columns::ensemble_density);
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t k = 0; k < width; ++k) {
                w << stats.times[t] << xs[k] << stats.mean("density", t, k)
                  << stats.standard_error("density", t, k);
                w.end_row();
            }
        w.close();
    }
    if (stats.channels.count("pair_cos")) {
        const auto& pairs = p.config.record.site_pairs;
        CsvWriter w(out.file("ensemble_cos_phase.csv"), columns::ensemble_cos_phase);
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                w << stats.times[t] << pairs[k].first << pairs[k].second << stats.mean("pair_cos", t, k)
                  << stats.standard_error("pair_cos", t, k);
                w.end_row();
            }
        w.close();
    }
    if (stats.channels.count("bdg_population") && p.modes) {
        const std::size_t width = stats.channel("bdg_population").width;
        CsvWriter w(out.file("ensemble_bdg.csv"), columns::ensemble_bdg);
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t j = 0; j < width; ++j) {
                w << stats.times[t] << j + 1 << p.modes->mode(j + 1).energy
                  << stats.mean("bdg_population", t, j) << stats.standard_error("bdg_population", t, j);
                w.end_row();
            }
        w.close();
    }
    if (stats.channels.count("g1")) {
        const auto& pairs = p.config.record.g1_pairs;
        const Grid& g = *p.grid;
        auto x = g.positions();
        CsvWriter w(out.file("ensemble_g1.csv"), columns::ensemble_g1);
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                const std::size_t i1 = g.nearest_index(pairs[k].first), i2 = g.nearest_index(pairs[k].second);
                const cplx cross(stats.mean("g1", t, 4 * k), stats.mean("g1", t, 4 * k + 1));
                const double v = g1_from_means(cross, stats.mean("g1", t, 4 * k + 2),
                                               stats.mean("g1", t, 4 * k + 3), i1 == i2, g.spacing(),
                                               p.config.initial.sample_noise);
                w << stats.times[t] << x[i1] << x[i2] << v;
                w.end_row();
            }
        w.close();
    }
}

void write_threshold_csv(OutputDir& out, const std::vector<ThresholdPoint>& scan) {
    CsvWriter w(out.file("threshold_scan.csv"), columns::threshold_scan);
    for (const auto& p : scan) {
        w << p.pump_scale << p.result.imbalance << p.result.alpha_ss.real() << p.result.alpha_ss.imag()
          << (p.result.converged ? 1 : 0) << p.result.iterations;
        w.end_row();
    }
    w.close();
}

void write_wavelength_csv(OutputDir& out, const std::vector<WavelengthPoint>& scan) {
    CsvWriter w(out.file("wavelength_scan.csv"), columns::wavelength_scan);
    for (const auto& p : scan) {
        w << p.wavenumber << p.overlap << p.mode_population.mean << p.mode_population.se
          << p.abs_q1.mean << p.abs_q1.se;
        w.end_row();
    }
    w.close();
}

}  // namespace cavtraj
