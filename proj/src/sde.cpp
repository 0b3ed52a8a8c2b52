#include "cavtraj/sde.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cavtraj/errors.hpp"

namespace cavtraj {

std::string to_string(NoiseUpdate n) {
    return n == NoiseUpdate::ExactRotation ? "exact-rotation" : "milstein";
}

std::string to_string(Splitting s) { return s == Splitting::Strang ? "strang" : "lie"; }

NoiseUpdate noise_update_from_string(const std::string& s) {
    if (s == "exact-rotation") return NoiseUpdate::ExactRotation;
    if (s == "milstein") return NoiseUpdate::Milstein;
    throw ConfigError("unknown noise update '" + s + "' (expected exact-rotation or milstein)");
}

Splitting splitting_from_string(const std::string& s) {
    if (s == "strang") return Splitting::Strang;
    if (s == "lie") return Splitting::Lie;
    throw ConfigError("unknown splitting '" + s + "' (expected strang or lie)");
}

void StepScheme::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("scheme.dt must be positive");
}

Integrator::Integrator(const ModelParams& params, GridPtr grid, const StepScheme& scheme)
    : params_(params), scheme_(scheme), grid_(grid), prof_(evaluate_profiles(params, grid)),
      U_(params.interaction()) {
    params_.validate();
    scheme_.validate();
    const std::size_t n = grid_->size();
    const auto& c = params_.cavity;
    const bool eliminated_axial = params_.variant == Variant::AxialEliminated;

    static_pot_ = prof_.trap;
    if (!eliminated_axial && !params_.compensate_pump_lightshift)
        for (std::size_t i = 0; i < n; ++i) static_pot_[i] += prof_.h2_over_delta[i];

    axial_pot_.assign(n, 0.0);
    noise_amp_.assign(n, 0.0);
    const double eta2 = std::norm(c.eta);
    if (eliminated_axial) {
        const double amp = std::sqrt(2.0 * eta2 / (c.kappa * c.kappa * c.kappa));
        for (std::size_t i = 0; i < n; ++i) {
            axial_pot_[i] = eta2 / (c.kappa * c.kappa) * prof_.g2_over_delta[i];
            noise_amp_[i] = amp * prof_.g2_over_delta[i];
        }
    } else if (params_.variant == Variant::TransverseEliminated) {
        const double amp = std::sqrt(2.0 / c.kappa);
        for (std::size_t i = 0; i < n; ++i) noise_amp_[i] = amp * prof_.hg_over_delta[i];
    }

    auto k = grid_->wavenumbers();
    half_kick_.resize(n);
    full_kick_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = 0.5 * k[i] * k[i];
        half_kick_[i] = std::polar(1.0, -0.5 * e * scheme_.dt);
        full_kick_[i] = std::polar(1.0, -e * scheme_.dt);
    }
}

WienerIncrement Integrator::draw(Rng& rng) const {
    const double sq = std::sqrt(scheme_.dt);
    WienerIncrement w;
    w.dw = sq * rng.normal();
    if (params_.variant == Variant::FullCavity) w.dw_y = sq * rng.normal();
    return w;
}

void Integrator::kinetic(std::span<cplx> psi, double fraction) const {
    const auto& fft = thread_transform(psi.size());
    fft.forward(psi);
    const auto& kick = fraction == 1.0 ? full_kick_ : half_kick_;
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= kick[i];
    fft.inverse(psi);
}

std::pair<double, double> Integrator::cavity_integrals(const ComplexField& psi) const {
    double X = 0.0, Y = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double rho = std::norm(psi[i]);
        X += prof_.g2_over_delta[i] * rho;
        Y += prof_.hg_over_delta[i] * rho;
    }
    const double dx = grid_->spacing();
    return {X * dx, Y * dx};
}

double Integrator::measurement_rate(const ComplexField& psi, cplx alpha) const {
    const auto& c = params_.cavity;
    switch (params_.variant) {
        case Variant::FullCavity: return 2.0 * c.kappa * (std::norm(alpha) - 0.5);
        case Variant::AxialEliminated: {
            const double X = cavity_integrals(psi).first;
            return 2.0 * std::norm(c.eta) / (c.kappa * c.kappa * c.kappa) * X * X;
        }
        case Variant::TransverseEliminated: {
            const double Y = cavity_integrals(psi).second;
            return 2.0 / c.kappa * Y * Y;
        }
    }
    return 0.0;
}

void Integrator::local(TrajectoryState& s, const WienerIncrement& w) const {
    const double dt = scheme_.dt;
    const std::size_t n = s.psi.size();
    auto psi = s.psi.values();
    const auto& c = params_.cavity;
    const bool pot = scheme_.potential, nl = scheme_.nonlinear;

    if (params_.variant == Variant::FullCavity) {
        const auto [X, Y] = cavity_integrals(s.psi);
        const cplx lambda(c.kappa, -(c.delta_pc - X));
        const cplx drive = c.eta - cplx(0.0, Y);
        const cplx a_inf = drive / lambda;
        const cplx a0 = s.alpha;
        cplx a1 = a_inf + (a0 - a_inf) * std::exp(-lambda * dt);
        if (scheme_.noise) {
            // Exact variance of the Ornstein-Uhlenbeck noise over one step.
            const double gain = std::sqrt(-std::expm1(-2.0 * c.kappa * dt) / (4.0 * dt));
            a1 += gain * cplx(w.dw, w.dw_y);
        }
        const double occ = 0.5 * (std::norm(a0) + std::norm(a1)) - 0.5;
        const double re = a0.real() + a1.real();
        for (std::size_t i = 0; i < n; ++i) {
            double theta = 0.0;
            if (pot)
                theta += static_pot_[i] + prof_.g2_over_delta[i] * occ + prof_.hg_over_delta[i] * re;
            if (nl) theta += U_ * std::norm(psi[i]);
            psi[i] *= std::polar(1.0, -theta * dt);
        }
        s.alpha = a1;
        return;
    }

    double F = 1.0;
    if (params_.variant == Variant::AxialEliminated && params_.f_order == 1)
        F = 1.0 + c.delta_pc / (c.kappa * c.kappa) * cavity_integrals(s.psi).first;

    const bool noise = scheme_.noise;
    const bool exact = scheme_.noise_update == NoiseUpdate::ExactRotation;
    for (std::size_t i = 0; i < n; ++i) {
        double theta = 0.0;
        if (pot) theta += static_pot_[i] + axial_pot_[i] * F;
        if (nl) theta += U_ * std::norm(psi[i]);
        double phase = -theta * dt;
        if (!noise) {
            psi[i] *= std::polar(1.0, phase);
        } else if (exact) {
            phase -= noise_amp_[i] * w.dw;
            psi[i] *= std::polar(1.0, phase);
        } else {
            const double a = noise_amp_[i];
            const cplx m(1.0 - 0.5 * a * a * w.dw * w.dw, -a * w.dw);
            psi[i] *= std::polar(1.0, phase) * m;
        }
    }
}

void Integrator::step(TrajectoryState& s, const WienerIncrement& w) const {
    if (scheme_.kinetic && scheme_.splitting == Splitting::Strang) kinetic(s.psi.values(), 0.5);
    local(s, w);
    if (scheme_.kinetic) kinetic(s.psi.values(), scheme_.splitting == Splitting::Strang ? 0.5 : 1.0);
    s.t += scheme_.dt;
}

void Integrator::step(TrajectoryState& s) const { step(s, draw(s.rng)); }

void Integrator::advance(TrajectoryState& s, std::size_t n, std::vector<double>* wiener) const {
    if (n == 0) return;
    const bool full = params_.variant == Variant::FullCavity;
    auto record = [&](const WienerIncrement& w) {
        if (!wiener) return;
        wiener->push_back(w.dw);
        if (full) wiener->push_back(w.dw_y);
    };
    if (!(scheme_.kinetic && scheme_.splitting == Splitting::Strang)) {
        for (std::size_t k = 0; k < n; ++k) {
            const WienerIncrement w = draw(s.rng);
            record(w);
            step(s, w);
        }
        return;
    }
    kinetic(s.psi.values(), 0.5);
    for (std::size_t k = 0; k < n; ++k) {
        const WienerIncrement w = draw(s.rng);
        record(w);
        local(s, w);
        kinetic(s.psi.values(), k + 1 < n ? 1.0 : 0.5);
        s.t += scheme_.dt;
    }
}

namespace {

TrajectoryState step_variant(TrajectoryState s, const ModelParams& params,
                             const StepScheme& scheme, Variant expected) {
    if (params.variant != expected)
        throw ConfigError("stepper called for variant '" + to_string(expected) +
                          "' with parameters of variant '" + to_string(params.variant) + "'");
    Integrator(params, s.psi.grid_ptr(), scheme).step(s);
    return s;
}

}  // namespace

TrajectoryState step_full(TrajectoryState s, const ModelParams& params, const StepScheme& scheme) {
    return step_variant(std::move(s), params, scheme, Variant::FullCavity);
}

TrajectoryState step_axial_eliminated(TrajectoryState s, const ModelParams& params,
                                      const StepScheme& scheme) {
    return step_variant(std::move(s), params, scheme, Variant::AxialEliminated);
}

TrajectoryState step_transverse_eliminated(TrajectoryState s, const ModelParams& params,
                                           const StepScheme& scheme) {
    return step_variant(std::move(s), params, scheme, Variant::TransverseEliminated);
}

double measurement_rate(const TrajectoryState& s, const ModelParams& params) {
    return Integrator(params, s.psi.grid_ptr(), StepScheme{}).measurement_rate(s.psi, s.alpha);
}

const Series& TrajectoryOutput::channel(const std::string& name) const {
    auto it = channels.find(name);
    if (it == channels.end()) throw std::out_of_range("trajectory has no channel '" + name + "'");
    return it->second;
}

MeasurementRecord TrajectoryOutput::record() const {
    return {times, channel("rate").data, wiener_path};
}

namespace {

class Recorder {
public:
    Recorder(const RecorderConfig& cfg, const ModelParams& params, const Integrator& integ,
             const ComplexField& psi0)
        : cfg_(cfg), params_(params), integ_(integ) {
        const Grid& g = psi0.grid();
        if (cfg.sites) sites_ = make_site_partition(params.trap, g, cfg.center_label);
        for (auto [a, b] : cfg.g1_pairs) g1_idx_.emplace_back(g.nearest_index(a), g.nearest_index(b));
        for (double x : cfg.phase_probes) {
            const std::size_t i = g.nearest_index(x);
            probe_idx_.push_back(i);
            probe_ref_.push_back(psi0[i]);
            probe_phase_.push_back(0.0);
        }
        if (cfg.modes && !(cfg.modes->ground.psi0.grid() == g))
            throw ConfigError("BdG modes and trajectory live on different grids");
        if (cfg.density && cfg.density_stride == 0) throw ConfigError("density stride must be positive");
    }

    void sample(const TrajectoryState& s, TrajectoryOutput& out) {
        out.times.push_back(s.t);
        auto put = [&](const std::string& name, std::size_t width, auto&& fill) {
            Series& ser = out.channels[name];
            ser.width = width;
            const std::size_t base = ser.data.size();
            ser.data.resize(base + width);
            fill(ser.data.data() + base);
        };
        const double norm = s.psi.norm();
        const MomentSet m = moments(s.psi);
        auto scalar = [&](const std::string& name, double v) {
            put(name, 1, [&](double* d) { d[0] = v; });
        };
        scalar("rate", integ_.measurement_rate(s.psi, s.alpha));
        scalar("norm", norm);
        scalar("q1", m.q1);
        scalar("abs_q1", std::abs(m.q1));
        scalar("q2", m.q2);
        scalar("delta_q", m.delta_q);
        if (params_.variant == Variant::FullCavity) {
            scalar("alpha_re", s.alpha.real());
            scalar("alpha_im", s.alpha.imag());
            scalar("photons", std::norm(s.alpha) - 0.5);
        }
        if (cfg_.sites) {
            const auto d = site_decompose(s.psi, sites_);
            scalar("imbalance", odd_even_imbalance(d));
            put("site_population", d.size(), [&](double* p) {
                for (std::size_t k = 0; k < d.size(); ++k) p[k] = d.site_populations[k];
            });
            put("site_phase", d.size(), [&](double* p) {
                for (std::size_t k = 0; k < d.size(); ++k) p[k] = d.site_phases[k];
            });
            if (!cfg_.site_pairs.empty()) {
                std::vector<double> ph;
                for (auto [a, b] : cfg_.site_pairs) ph.push_back(relative_phase(d, a, b));
                put("pair_phase", ph.size(), [&](double* p) { std::copy(ph.begin(), ph.end(), p); });
                put("pair_cos", ph.size(), [&](double* p) {
                    for (std::size_t k = 0; k < ph.size(); ++k) p[k] = std::cos(ph[k]);
                });
            }
        }
        if (cfg_.density) {
            const std::size_t n = s.psi.size(), st = cfg_.density_stride;
            put("density", (n + st - 1) / st, [&](double* p) {
                for (std::size_t i = 0, k = 0; i < n; i += st, ++k) p[k] = std::norm(s.psi[i]);
            });
        }
        if (cfg_.modes) {
            const auto pops = bdg_populations(s.psi, *cfg_.modes, s.t, cfg_.wigner_sampled);
            put("bdg_population", pops.size(),
                [&](double* p) { std::copy(pops.begin(), pops.end(), p); });
        }
        if (!g1_idx_.empty()) {
            put("g1", 4 * g1_idx_.size(), [&](double* p) {
                for (std::size_t k = 0; k < g1_idx_.size(); ++k) {
                    const cplx a = s.psi[g1_idx_[k].first], b = s.psi[g1_idx_[k].second];
                    const cplx c = std::conj(a) * b;
                    p[4 * k] = c.real();
                    p[4 * k + 1] = c.imag();
                    p[4 * k + 2] = std::norm(a);
                    p[4 * k + 3] = std::norm(b);
                }
            });
        }
        if (!probe_idx_.empty()) {
            for (std::size_t k = 0; k < probe_idx_.size(); ++k) {
                const double raw = std::arg(s.psi[probe_idx_[k]] * std::conj(probe_ref_[k]));
                double prev = probe_phase_[k];
                double d = std::remainder(raw - prev, 2.0 * std::numbers::pi);
                probe_phase_[k] = prev + d;
            }
            put("probe_phase", probe_idx_.size(),
                [&](double* p) { std::copy(probe_phase_.begin(), probe_phase_.end(), p); });
        }
    }

private:
    const RecorderConfig& cfg_;
    const ModelParams& params_;
    const Integrator& integ_;
    SitePartition sites_;
    std::vector<std::pair<std::size_t, std::size_t>> g1_idx_;
    std::vector<std::size_t> probe_idx_;
    std::vector<cplx> probe_ref_;
    std::vector<double> probe_phase_;
};

bool finite_state(const TrajectoryState& s) {
    if (!std::isfinite(s.alpha.real()) || !std::isfinite(s.alpha.imag())) return false;
    return std::isfinite(s.psi.norm());
}

}  // namespace

TrajectoryOutput run_trajectory(TrajectoryState state, const ModelParams& params,
                                const StepScheme& scheme, double t_final,
                                const RecorderConfig& recorder) {
    if (!(t_final >= 0.0)) throw ConfigError("t_final must be non-negative");
    if (!(recorder.interval > 0.0)) throw ConfigError("record interval must be positive");
    Integrator integ(params, state.psi.grid_ptr(), scheme);
    const auto total = static_cast<std::size_t>(std::llround(t_final / scheme.dt));
    const std::size_t stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(recorder.interval / scheme.dt)));

    TrajectoryOutput out;
    out.seed = state.rng.seed();
    Recorder rec(recorder, params, integ, state.psi);
    const double t0 = state.t;
    rec.sample(state, out);
    std::vector<double>* wiener = recorder.store_wiener ? &out.wiener_path : nullptr;
    std::size_t done = 0;
    while (done < total) {
        const std::size_t chunk = std::min(stride, total - done);
        integ.advance(state, chunk, wiener);
        done += chunk;
        // Re-derive the clock from the step count so records align exactly.
        state.t = t0 + static_cast<double>(done) * scheme.dt;
        if (!finite_state(state)) {
            out.failed = true;
            out.failure = "non-finite field between t = " +
                          std::to_string(out.times.back()) + " and t = " + std::to_string(state.t);
            break;
        }
        rec.sample(state, out);
    }
    out.final_psi.assign(state.psi.values().begin(), state.psi.values().end());
    out.final_alpha = state.alpha;
    return out;
}

TrajectoryOutput run_trajectory(const ComplexField& initial, cplx alpha0, const ModelParams& params,
                                const StepScheme& scheme, double t_final,
                                const RecorderConfig& recorder, std::uint64_t seed) {
    return run_trajectory(TrajectoryState{initial, alpha0, 0.0, Rng(seed)}, params, scheme, t_final,
                          recorder);
}

}  // namespace cavtraj
