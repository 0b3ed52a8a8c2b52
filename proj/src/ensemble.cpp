#include "cavtraj/ensemble.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cavtraj/errors.hpp"

namespace cavtraj {

using nlohmann::json;

void EnsembleStats::add(const TrajectoryOutput& traj) {
    ++processed;
    if (traj.failed) return;
    if (count == 0) {
        times = traj.times;
        channels.clear();
        for (const auto& [name, ser] : traj.channels) {
            Accumulator& a = channels[name];
            a.width = ser.width;
            a.mean.assign(ser.data.size(), 0.0);
            a.m2.assign(ser.data.size(), 0.0);
        }
    } else if (traj.times.size() != times.size() || traj.channels.size() != channels.size()) {
        throw NumericalError("trajectory record layout differs from the ensemble's");
    }
    ++count;
    const double n = static_cast<double>(count);
    for (const auto& [name, ser] : traj.channels) {
        auto it = channels.find(name);
        if (it == channels.end() || it->second.mean.size() != ser.data.size())
            throw NumericalError("trajectory channel '" + name + "' does not match the ensemble");
        Accumulator& a = it->second;
        for (std::size_t i = 0; i < ser.data.size(); ++i) {
            const double x = ser.data[i];
            const double d = x - a.mean[i];
            a.mean[i] += d / n;
            a.m2[i] += d * (x - a.mean[i]);
        }
    }
}

const Accumulator& EnsembleStats::channel(const std::string& name) const {
    auto it = channels.find(name);
    if (it == channels.end()) throw std::out_of_range("ensemble has no channel '" + name + "'");
    return it->second;
}

double EnsembleStats::mean(const std::string& name, std::size_t t, std::size_t c) const {
    const Accumulator& a = channel(name);
    return a.mean[t * a.width + c];
}

double EnsembleStats::variance(const std::string& name, std::size_t t, std::size_t c) const {
    const Accumulator& a = channel(name);
    if (count < 2) return 0.0;
    return a.m2[t * a.width + c] / static_cast<double>(count - 1);
}

double EnsembleStats::standard_error(const std::string& name, std::size_t t, std::size_t c) const {
    if (count < 2) return 0.0;
    return std::sqrt(variance(name, t, c) / static_cast<double>(count));
}

std::string content_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json field_bits(std::span<const cplx> v) {
    std::string s;
    s.reserve(v.size() * 32);
    for (cplx c : v) {
        s += std::to_string(std::bit_cast<std::uint64_t>(c.real()));
        s += ',';
        s += std::to_string(std::bit_cast<std::uint64_t>(c.imag()));
        s += ';';
    }
    return content_hash(s);
}

json describe(const EnsembleConfig& c) {
    const ModelParams& p = c.params;
    json j;
    j["trap"] = {p.trap.harmonic_strength, p.trap.lattice_depth_s, p.trap.lattice_wavenumber};
    j["cavity"] = {p.cavity.g0_sq_over_delta, p.cavity.wavenumber, p.cavity.phase_offset,
                   p.cavity.kappa,  p.cavity.delta_pc,   p.cavity.eta.real(),
                   p.cavity.eta.imag()};
    j["pump"] = {static_cast<int>(p.pump.kind), p.pump.h0g0_over_delta, p.light_shift_strength(),
                 p.pump.amplitude, p.pump.center, p.pump.width};
    j["atoms"] = {p.NU, p.atom_number, p.compensate_pump_lightshift, static_cast<int>(p.variant),
                  p.f_order, static_cast<bool>(p.detuning_scale)};
    const StepScheme& s = c.scheme;
    j["scheme"] = {s.dt, static_cast<int>(s.splitting), static_cast<int>(s.noise_update), s.kinetic,
                   s.potential, s.nonlinear, s.noise};
    j["t_final"] = c.t_final;
    j["base_seed"] = c.base_seed;
    const RecorderConfig& r = c.recorder;
    j["recorder"] = {r.interval, r.density, r.density_stride, r.sites, r.center_label, r.site_pairs,
                     r.wigner_sampled, r.g1_pairs, r.phase_probes, r.store_wiener,
                     r.modes ? r.modes->size() : 0};
    const InitialStateSpec& in = c.initial;
    j["initial"] = {in.sample_noise, in.temperature, in.alpha0.real(), in.alpha0.imag(),
                    in.alpha_vacuum_noise};
    if (in.ground) {
        j["grid"] = {in.ground->psi0.size(), in.ground->psi0.grid().extent()};
        j["ground"] = field_bits(in.ground->psi0.values());
    }
    return j;
}

json stats_to_json(const EnsembleStats& s) {
    json j;
    j["times"] = s.times;
    j["count"] = s.count;
    j["processed"] = s.processed;
    j["failed"] = s.failed;
    json ch = json::object();
    for (const auto& [name, a] : s.channels) ch[name] = {{"width", a.width}, {"mean", a.mean}, {"m2", a.m2}};
    j["channels"] = ch;
    return j;
}

EnsembleStats stats_from_json(const json& j) {
    EnsembleStats s;
    s.times = j.at("times").get<std::vector<double>>();
    s.count = j.at("count").get<std::size_t>();
    s.processed = j.at("processed").get<std::size_t>();
    s.failed = j.at("failed").get<std::vector<std::size_t>>();
    for (const auto& [name, a] : j.at("channels").items()) {
        Accumulator acc;
        acc.width = a.at("width").get<std::size_t>();
        acc.mean = a.at("mean").get<std::vector<double>>();
        acc.m2 = a.at("m2").get<std::vector<double>>();
        s.channels[name] = std::move(acc);
    }
    return s;
}

void write_checkpoint(const EnsembleConfig& c, const EnsembleStats& s) {
    json stats = stats_to_json(s);
    const std::string body = stats.dump();
    json j;
    j["format"] = "cavtraj-checkpoint-1";
    j["params_hash"] = params_hash(c);
    j["n_trajectories"] = c.n_trajectories;
    j["base_seed"] = c.base_seed;
    j["content_hash"] = content_hash(body);
    j["stats"] = std::move(stats);
    const std::filesystem::path path(c.checkpoint_path);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp);
        if (!f) throw std::runtime_error("cannot write checkpoint " + tmp.string());
        f << j.dump();
        if (!f) throw std::runtime_error("failed writing checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

EnsembleStats read_checkpoint(const EnsembleConfig& c) {
    std::ifstream f(c.checkpoint_path);
    if (!f) throw ConfigError("cannot open checkpoint " + c.checkpoint_path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("checkpoint " + c.checkpoint_path + " is not valid JSON: " + e.what());
    }
    try {
        if (j.at("format") != "cavtraj-checkpoint-1") throw ConfigError("unknown checkpoint format");
        if (content_hash(j.at("stats").dump()) != j.at("content_hash").get<std::string>())
            throw ConfigError("checkpoint content hash mismatch: file is corrupt");
        if (j.at("params_hash").get<std::string>() != params_hash(c))
            throw ConfigError("checkpoint was written for different parameters; refusing to resume");
        if (j.at("n_trajectories").get<std::size_t>() != c.n_trajectories)
            throw ConfigError("checkpoint was written for a different trajectory count");
        return stats_from_json(j.at("stats"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
}

EnsembleStats run_from(const EnsembleConfig& cfg, EnsembleStats stats) {
    if (cfg.n_trajectories == 0) throw ConfigError("an ensemble needs at least one trajectory");
    if (!cfg.initial.ground) throw ConfigError("ensemble needs a ground state");
    const std::size_t start = stats.processed;
    std::size_t end = cfg.n_trajectories;
    if (cfg.stop_after > 0) end = std::min(end, start + cfg.stop_after);
    if (start >= end) return stats;

    unsigned nthreads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, end - start));
    const std::size_t window = 2 * static_cast<std::size_t>(nthreads);

    std::mutex mu;
    std::condition_variable cv;
    std::map<std::size_t, TrajectoryOutput> ready;
    std::size_t reduced = start;
    std::atomic<std::size_t> next{start};
    bool abort = false;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= end) return;
            {
                std::unique_lock lk(mu);
                cv.wait(lk, [&] { return abort || idx < reduced + window; });
                if (abort) return;
            }
            try {
                TrajectoryOutput out = run_trajectory(make_initial_state(cfg, idx), cfg.params,
                                                      cfg.scheme, cfg.t_final, cfg.recorder);
                std::lock_guard lk(mu);
                ready.emplace(idx, std::move(out));
            } catch (...) {
                std::lock_guard lk(mu);
                if (!error) error = std::current_exception();
                abort = true;
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);

    try {
        for (std::size_t i = start; i < end; ++i) {
            TrajectoryOutput out;
            {
                std::unique_lock lk(mu);
                cv.wait(lk, [&] { return abort || ready.count(i) > 0; });
                if (abort) break;
                out = std::move(ready.at(i));
                ready.erase(i);
            }
            if (out.failed) stats.failed.push_back(i);
            stats.add(out);
            if (cfg.on_trajectory) cfg.on_trajectory(i, out);
            if (!cfg.checkpoint_path.empty()) write_checkpoint(cfg, stats);
            {
                std::lock_guard lk(mu);
                reduced = i + 1;
            }
            cv.notify_all();
        }
    } catch (...) {
        {
            std::lock_guard lk(mu);
            abort = true;
            if (!error) error = std::current_exception();
        }
        cv.notify_all();
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return stats;
}

}  // namespace

std::string params_hash(const EnsembleConfig& config) { return content_hash(describe(config).dump()); }

TrajectoryState make_initial_state(const EnsembleConfig& config, std::size_t index) {
    const InitialStateSpec& in = config.initial;
    if (!in.ground) throw ConfigError("initial state needs a ground state");
    TrajectoryState s{ComplexField(in.ground->psi0.grid_ptr()), in.alpha0, 0.0,
                      trajectory_rng(config.base_seed, index)};
    const double N = config.params.atom_number;
    if (in.sample_noise) {
        if (!in.modes) throw ConfigError("Bogoliubov sampling needs BdG modes");
        s.psi = sample_initial_state(*in.modes, in.temperature, N, s.rng, true);
    } else {
        s.psi = std::sqrt(N) * in.ground->psi0;
    }
    if (in.alpha_vacuum_noise) {
        const double re = s.rng.normal(), im = s.rng.normal();
        s.alpha += 0.5 * cplx(re, im);
    }
    return s;
}

EnsembleStats run_ensemble(const EnsembleConfig& config) {
    return run_from(config, EnsembleStats{});
}

EnsembleStats resume_ensemble(const EnsembleConfig& config) {
    if (config.checkpoint_path.empty()) throw ConfigError("resume needs a checkpoint path");
    return run_from(config, read_checkpoint(config));
}

}  // namespace cavtraj
