#include "cavtraj/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cavtraj/errors.hpp"
#include "cavtraj/observables.hpp"

namespace cavtraj {

namespace {

double kinetic_energy(std::span<const cplx> psi_hat, const Grid& grid) {
    auto k = grid.wavenumbers();
    double s = 0.0;
    for (std::size_t i = 0; i < psi_hat.size(); ++i) s += 0.5 * k[i] * k[i] * std::norm(psi_hat[i]);
    return s * grid.spacing() / static_cast<double>(grid.size());
}

double local_energy(std::span<const cplx> psi, std::span<const double> V, double NU,
                    const Grid& grid) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double rho = std::norm(psi[i]);
        s += (V[i] + 0.5 * NU * rho) * rho;
    }
    return s * grid.spacing();
}

ComplexField default_guess(GridPtr grid, double NU) {
    // Gaussian roughly as wide as the harmonic Thomas-Fermi profile.
    const double r_tf = std::cbrt(1.5 * NU);
    const double w = std::max(1.0, 0.6 * r_tf);
    ComplexField f(grid);
    auto x = grid->positions();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-0.5 * x[i] * x[i] / (w * w));
    return normalize(f);
}

// Fix the global phase so the field is real and non-negative where it matters.
void make_real(ComplexField& f) {
    std::size_t imax = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f[i]) > std::abs(f[imax])) imax = i;
    const cplx phase = std::abs(f[imax]) > 0.0 ? std::conj(f[imax]) / std::abs(f[imax]) : 1.0;
    for (auto& v : f.values()) v = cplx((v * phase).real(), 0.0);
}

struct FlowState {
    double step;
};

// Normalised gradient flow. Returns the state after convergence or after
// max_iterations; the caller decides whether the latter is an error.
GroundState gradient_flow(GridPtr grid, std::vector<double> V, double NU,
                          const GroundStateOptions& opt, FlowState& flow, bool& converged) {
    const Grid& g = *grid;
    const std::size_t n = g.size();
    if (V.size() != n) throw std::invalid_argument("potential length does not match grid");
    const auto& fft = thread_transform(n);
    auto k = g.wavenumbers();

    ComplexField psi = opt.initial_guess ? normalize(*opt.initial_guess) : default_guess(grid, NU);
    if (!(psi.grid() == g)) throw std::invalid_argument("initial guess lives on a different grid");

    std::vector<cplx> psi_hat(psi.values().begin(), psi.values().end());
    fft.forward(psi_hat);
    double E = kinetic_energy(psi_hat, g) + local_energy(psi.values(), V, NU, g);

    GroundState out{psi, 0.0, 0.0, 0.0, 0, NU, {}, {}};
    if (opt.record_energy_history) out.energy_history.push_back(E);

    std::vector<cplx> hpsi(n), trial(n);
    std::vector<double> veff(n);
    double last_change = std::numeric_limits<double>::infinity();
    converged = false;
    int it = 0;
    double mu = 0.0, residual = 0.0;
    for (;; ++it) {
        // H psi and the chemical potential of the current field.
        for (std::size_t i = 0; i < n; ++i) hpsi[i] = 0.5 * k[i] * k[i] * psi_hat[i];
        fft.inverse(hpsi);
        double vmax = -1e300, vmin = 1e300, peak = 0.0;
        cplx mu_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            veff[i] = V[i] + NU * std::norm(psi[i]);
            vmax = std::max(vmax, veff[i]);
            vmin = std::min(vmin, veff[i]);
            hpsi[i] += veff[i] * psi[i];
            mu_sum += std::conj(psi[i]) * hpsi[i];
            peak = std::max(peak, std::abs(psi[i]));
        }
        mu = mu_sum.real() * g.spacing();
        double sup = 0.0;
        for (std::size_t i = 0; i < n; ++i) sup = std::max(sup, std::abs(hpsi[i] - mu * psi[i]));
        residual = sup / (std::max(1.0, std::abs(mu)) * peak);

        if (residual < opt.tol && last_change < opt.tol * std::max(1.0, std::abs(E))) {
            converged = true;
            break;
        }
        if (it >= opt.max_iterations) break;

        const double beta = 0.5 * (vmax - vmin);
        for (;;) {
            const double tau = flow.step;
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = (1.0 + tau * (beta + mu - veff[i])) * psi[i];
            fft.forward(trial);
            for (std::size_t i = 0; i < n; ++i) trial[i] /= 1.0 + tau * (beta + 0.5 * k[i] * k[i]);
            // Normalise in Fourier space, then bring back.
            double nrm = 0.0;
            for (auto v : trial) nrm += std::norm(v);
            nrm *= g.spacing() / static_cast<double>(n);
            const double scale = 1.0 / std::sqrt(nrm);
            for (auto& v : trial) v *= scale;
            std::vector<cplx> x_space(trial);
            fft.inverse(x_space);
            const double E_new = kinetic_energy(trial, g) + local_energy(x_space, V, NU, g);
            if (E_new <= E + 1e-14 * std::abs(E)) {
                last_change = E - E_new;
                if (last_change < 0.0) last_change = -last_change;
                E = E_new;
                std::copy(x_space.begin(), x_space.end(), psi.values().begin());
                psi_hat.swap(trial);
                trial.resize(n);
                if (opt.record_energy_history) out.energy_history.push_back(E);
                flow.step = std::min(opt.max_step, flow.step * 1.25);
                break;
            }
            flow.step *= 0.5;
            if (flow.step < 1e-14)
                throw ConvergenceError("ground-state flow stalled: energy rises at every step size");
        }
    }

    make_real(psi);
    out.psi0 = psi;
    out.mu = mu;
    out.energy = E;
    out.residual = residual;
    out.iterations = it;
    out.potential = std::move(V);
    return out;
}

}  // namespace

double gp_energy(const ComplexField& psi, std::span<const double> potential, double NU) {
    const Grid& g = psi.grid();
    std::vector<cplx> hat(psi.values().begin(), psi.values().end());
    thread_transform(g.size()).forward(hat);
    return kinetic_energy(hat, g) + local_energy(psi.values(), potential, NU, g);
}

GroundState solve_stationary(GridPtr grid, std::vector<double> potential, double NU,
                             const GroundStateOptions& options) {
    if (!(options.tol > 0.0)) throw ConfigError("ground-state tolerance must be positive");
    FlowState flow{options.initial_step};
    bool converged = false;
    GroundState gs = gradient_flow(std::move(grid), std::move(potential), NU, options, flow,
                                   converged);
    if (!converged)
        throw ConvergenceError("ground state did not converge within " +
                               std::to_string(options.max_iterations) +
                               " iterations (residual " + std::to_string(gs.residual) + ")");
    return gs;
}

GroundState solve_ground_state(const ModelParams& params, GridPtr grid,
                               const GroundStateOptions& options) {
    params.validate();
    auto V = eval_trap_potential(params.trap, *grid);
    return solve_stationary(std::move(grid), std::move(V), params.NU, options);
}

GroundState solve_ground_state(const ModelParams& params, GridPtr grid, double tol) {
    GroundStateOptions opt;
    opt.tol = tol;
    return solve_ground_state(params, std::move(grid), opt);
}

cplx steady_alpha(const ComplexField& psi, const ModelParams& params, const ModelProfiles& prof,
                  double pump_scale) {
    const double N = params.atom_number / psi.norm();
    double X = 0.0, Y = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double rho = std::norm(psi[i]);
        X += prof.g2_over_delta[i] * rho;
        Y += prof.hg_over_delta[i] * rho;
    }
    const double dx = psi.grid().spacing();
    X *= N * dx;
    Y *= N * dx * pump_scale;
    const double detuning = params.cavity.delta_pc - X;
    return cplx(0.0, -Y) / cplx(params.cavity.kappa, -detuning);
}

namespace {

std::vector<double> mean_field_potential(const ModelParams& params, const ModelProfiles& prof,
                                         double pump_scale, cplx alpha) {
    std::vector<double> V(prof.trap);
    const double a2 = std::norm(alpha);
    for (std::size_t i = 0; i < V.size(); ++i) {
        V[i] += prof.g2_over_delta[i] * a2 + 2.0 * pump_scale * prof.hg_over_delta[i] * alpha.real();
        if (!params.compensate_pump_lightshift)
            V[i] += pump_scale * pump_scale * prof.h2_over_delta[i];
    }
    return V;
}

ComplexField seeded(const ComplexField& psi, const ModelProfiles& prof, int parity,
                    double strength) {
    ComplexField out(psi);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= 1.0 + strength * parity * prof.mode[i];
    return normalize(out);
}

}  // namespace

SteadyStateResult solve_selforg_steady_state(const ModelParams& params, GridPtr grid,
                                             double pump_scale,
                                             const SteadyStateOptions& options) {
    params.validate();
    if (params.variant != Variant::TransverseEliminated && params.variant != Variant::FullCavity)
        throw ConfigError("self-organisation steady state needs a transverse pump model");
    if (!(options.damping > 0.0 && options.damping <= 1.0))
        throw ConfigError("steady-state damping must lie in (0, 1]");
    if (options.seed_parity != 1 && options.seed_parity != -1)
        throw ConfigError("seed parity must be +1 or -1");

    const ModelProfiles prof = evaluate_profiles(params, grid);

    ComplexField psi(grid);
    if (options.psi_start) {
        psi = seeded(*options.psi_start, prof, options.seed_parity, options.seed_strength);
    } else {
        GroundStateOptions gopt;
        gopt.tol = 1e-8;
        GroundState g0 = solve_stationary(grid, mean_field_potential(params, prof, pump_scale, 0.0),
                                          params.NU, gopt);
        psi = seeded(g0.psi0, prof, options.seed_parity, options.seed_strength);
    }
    cplx alpha = options.alpha_start ? *options.alpha_start
                                     : steady_alpha(psi, params, prof, pump_scale);

    GroundStateOptions inner;
    inner.tol = 1e-300;  // never converge inside; the outer loop decides
    inner.max_iterations = options.inner_iterations;
    FlowState flow{1e-2};

    SteadyStateResult res{psi, alpha};
    std::vector<double> changes;
    std::vector<int> signs;
    for (int it = 1; it <= options.max_outer; ++it) {
        inner.initial_guess = psi;
        bool done = false;
        GroundState gs = gradient_flow(grid, mean_field_potential(params, prof, pump_scale, alpha),
                                       params.NU, inner, flow, done);
        psi = gs.psi0;
        const cplx fresh = steady_alpha(psi, params, prof, pump_scale);
        const cplx diff = fresh - alpha;
        const double change = std::abs(diff);
        alpha += options.damping * diff;
        changes.push_back(change);
        signs.push_back(diff.real() >= 0.0 ? 1 : -1);

        res.iterations = it;
        res.alpha_change = change;
        if (change <= options.tol * std::max(1.0, std::abs(alpha)) && gs.residual < 10.0 * options.tol) {
            res.converged = true;
            break;
        }
        constexpr std::size_t window = 40;
        if (changes.size() > window) {
            const std::size_t m = changes.size();
            int flips = 0;
            for (std::size_t j = m - window; j < m; ++j) flips += signs[j] != signs[j - 1];
            if (flips > static_cast<int>(3 * window / 4) && changes[m - 1] >= changes[m - 1 - window] &&
                change > 1e-6 * std::max(1.0, std::abs(alpha)))
                throw ConvergenceError("self-consistent iteration oscillates at pump scale " +
                                       std::to_string(pump_scale) + "; try damping " +
                                       std::to_string(options.damping / 2.0));
        }
    }
    res.psi_ss = psi;
    res.alpha_ss = alpha;
    res.imbalance = pattern_imbalance(psi, params);
    return res;
}

std::vector<ThresholdPoint> threshold_scan(const ModelParams& params, GridPtr grid,
                                           const std::vector<double>& pump_scales,
                                           const SteadyStateOptions& options) {
    std::vector<ThresholdPoint> out;
    SteadyStateOptions opt = options;
    for (double s : pump_scales) {
        ThresholdPoint p{s, {ComplexField(grid), 0.0}};
        try {
            p.result = solve_selforg_steady_state(params, grid, s, opt);
        } catch (const ConvergenceError&) {
            p.result.converged = false;
            out.push_back(std::move(p));
            continue;
        }
        opt.psi_start = p.result.psi_ss;
        opt.alpha_start = p.result.alpha_ss;
        out.push_back(std::move(p));
    }
    return out;
}

double threshold_onset(const std::vector<ThresholdPoint>& scan, double level) {
    for (const auto& p : scan)
        if (p.result.converged && std::abs(p.result.imbalance) > level) return p.pump_scale;
    return -1.0;
}

}  // namespace cavtraj
