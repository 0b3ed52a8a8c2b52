#include "cavtraj/bdg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cavtraj/errors.hpp"

namespace cavtraj {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dense matrix of the spectral Laplacian; it is circulant, so one column
// is enough.
MatrixXd laplacian_matrix(const GridPtr& grid) {
    const std::size_t n = grid->size();
    ComplexField e0(grid);
    e0[0] = 1.0;
    ComplexField col = laplacian(e0);
    MatrixXd D(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) D(i, j) = col[(i + n - j) % n].real();
    return 0.5 * (D + D.transpose());
}

// H = I - 2 v v^T maps the unit vector p onto a multiple of e_pivot.
struct Reflector {
    VectorXd v;
    Eigen::Index pivot;

    MatrixXd conjugate_reduced(const MatrixXd& A) const {
        VectorXd a = A * v;
        const double s = v.dot(a);
        MatrixXd B = A;
        B.noalias() -= 2.0 * v * a.transpose();
        B.noalias() -= 2.0 * a * v.transpose();
        B.noalias() += 4.0 * s * v * v.transpose();
        return remove(B);
    }

    MatrixXd remove(const MatrixXd& B) const {
        const Eigen::Index n = B.rows(), m = n - 1;
        MatrixXd R(m, m);
        for (Eigen::Index j = 0, jj = 0; j < n; ++j) {
            if (j == pivot) continue;
            for (Eigen::Index i = 0, ii = 0; i < n; ++i) {
                if (i == pivot) continue;
                R(ii++, jj) = B(i, j);
            }
            ++jj;
        }
        return R;
    }

    VectorXd lift(const VectorXd& y) const {
        const Eigen::Index n = v.size();
        VectorXd full(n);
        for (Eigen::Index i = 0, ii = 0; i < n; ++i) full(i) = i == pivot ? 0.0 : y(ii++);
        return full - 2.0 * v * v.dot(full);
    }
};

Reflector make_reflector(const VectorXd& p) {
    Eigen::Index pivot = 0;
    p.cwiseAbs().maxCoeff(&pivot);
    VectorXd w = p;
    w(pivot) += (p(pivot) >= 0.0 ? 1.0 : -1.0) * p.norm();
    return {w / w.norm(), pivot};
}

ComplexField to_field(const GridPtr& grid, const VectorXd& v) {
    ComplexField f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = v(static_cast<Eigen::Index>(i));
    return f;
}

}  // namespace

const BdGMode& BdGModeSet::mode(std::size_t j) const {
    if (j == 0 || j > modes.size())
        throw std::out_of_range("BdG mode index " + std::to_string(j) + " outside 1.." +
                                std::to_string(modes.size()));
    return modes[j - 1];
}

std::vector<double> BdGModeSet::energies() const {
    std::vector<double> e;
    for (const auto& m : modes) e.push_back(m.energy);
    return e;
}

int field_parity(const ComplexField& f, double tol) {
    const std::size_t n = f.size();
    double even = 0.0, odd = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = f[i], b = f[(n - i) % n];
        even += std::norm(a - b);
        odd += std::norm(a + b);
        total += std::norm(a);
    }
    if (total == 0.0) return 0;
    if (even <= tol * tol * 4.0 * total) return 1;
    if (odd <= tol * tol * 4.0 * total) return -1;
    return 0;
}

BdGModeSet solve_bdg(const GroundState& ground, const ModelParams& params, std::size_t n_modes) {
    const GridPtr& grid = ground.psi0.grid_ptr();
    const std::size_t n = grid->size();
    if (n_modes == 0 || n_modes >= n - 1)
        throw std::invalid_argument("number of BdG modes must be between 1 and n_points - 2");
    if (ground.potential.size() != n)
        throw std::invalid_argument("ground state carries no potential for this grid");
    const double dx = grid->spacing();
    const double NU = ground.NU;
    const double mu = ground.mu;
    (void)params;

    VectorXd psi0(n);
    for (std::size_t i = 0; i < n; ++i) psi0(i) = ground.psi0[i].real();

    MatrixXd T = -0.5 * laplacian_matrix(grid);
    MatrixXd A = T, C = T;
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = psi0(i) * psi0(i);
        A(i, i) += ground.potential[i] - mu + NU * rho;
        C(i, i) += ground.potential[i] - mu + 3.0 * NU * rho;
    }
    T.resize(0, 0);

    // Restrict to the complement of psi0, where C is positive definite.
    const Reflector H = make_reflector(psi0 * std::sqrt(dx));
    MatrixXd Ar = H.conjugate_reduced(A);
    A.resize(0, 0);
    MatrixXd Cr = H.conjugate_reduced(C);
    C.resize(0, 0);

    Eigen::LLT<MatrixXd> llt(Cr);
    if (llt.info() != Eigen::Success)
        throw NumericalError("BdG reduction failed: (L + NU psi0^2) not positive on the "
                             "complement of the ground state");
    const MatrixXd L = llt.matrixL();
    MatrixXd M = L.transpose() * (Ar * L);
    M = 0.5 * (M + M.transpose());
    Ar.resize(0, 0);

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw NumericalError("BdG eigensolver failed");

    // For an even condensate the modes split into parity blocks; the dense
    // solve leaves round-off leakage between them, removed below.
    const bool even_ground = field_parity(ground.psi0, 1e-8) == 1;

    BdGModeSet out{ground, {}, 0};
    const auto& lam = es.eigenvalues();
    for (Eigen::Index k = 0; k < lam.size() && out.modes.size() < n_modes; ++k) {
        if (lam(k) < 0.0 && std::sqrt(-lam(k)) >= 1e-6) {
            ++out.discarded;  // imaginary frequency: dynamically unstable direction
            continue;
        }
        const double eps = std::sqrt(std::max(lam(k), 0.0));
        if (eps < 1e-6) continue;
        VectorXd fm = llt.matrixU().solve(es.eigenvectors().col(k));
        VectorXd fp = Cr * fm / eps;
        const double s = std::sqrt(eps / dx);
        VectorXd fplus = H.lift(fp * s), fminus = H.lift(fm * s);
        VectorXd u = 0.5 * (fplus + fminus), v = 0.5 * (fplus - fminus);
        Eigen::Index imax = 0;
        u.cwiseAbs().maxCoeff(&imax);
        if (u(imax) < 0.0) {
            u = -u;
            v = -v;
        }
        BdGMode m{eps, to_field(grid, u), to_field(grid, v), 0};
        m.parity = field_parity(m.u);
        if (even_ground && m.parity != 0) {
            VectorXd ur(n), vr(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t r = (n - i) % n;
                ur(i) = 0.5 * (u(i) + m.parity * u(r));
                vr(i) = 0.5 * (v(i) + m.parity * v(r));
            }
            const double scale = 1.0 / std::sqrt((ur.squaredNorm() - vr.squaredNorm()) * dx);
            m.u = to_field(grid, ur * scale);
            m.v = to_field(grid, vr * scale);
        }
        out.modes.push_back(std::move(m));
    }
    if (out.modes.size() < n_modes)
        throw NumericalError("BdG solve produced only " + std::to_string(out.modes.size()) +
                             " positive-energy modes");
    return out;
}

ModeAmplitudes project_amplitudes(const ComplexField& psi, const BdGModeSet& modes, double t) {
    const ComplexField& psi0 = modes.ground.psi0;
    if (!(psi.grid() == psi0.grid())) throw std::invalid_argument("field and modes on different grids");
    const double dx = psi.grid().spacing();
    const cplx ph = std::polar(1.0, modes.ground.mu * t);
    ModeAmplitudes out;
    out.time = t;
    cplx a0 = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) a0 += std::conj(psi0[i]) * psi[i];
    out.alpha0 = a0 * ph * dx;
    out.alphas.reserve(modes.size());
    for (const auto& m : modes.modes) {
        cplx a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            a += std::conj(m.u[i]) * psi[i];
            b += std::conj(m.v[i]) * std::conj(psi[i]);
        }
        out.alphas.push_back((a * ph + b * std::conj(ph)) * dx);
    }
    return out;
}

double overlap_integral(std::size_t j, std::span<const double> cavity_mode,
                        const BdGModeSet& modes) {
    const BdGMode& m = modes.mode(j);
    const ComplexField& psi0 = modes.ground.psi0;
    if (cavity_mode.size() != psi0.size())
        throw std::invalid_argument("cavity mode length does not match grid");
    double s = 0.0;
    for (std::size_t i = 0; i < psi0.size(); ++i)
        s += cavity_mode[i] * (std::conj(psi0[i]) * (m.u[i] - m.v[i])).real();
    return s * psi0.grid().spacing();
}

ComplexField sample_initial_state(const BdGModeSet& modes, double temperature,
                                  double atom_number, Rng& rng, bool noise) {
    if (temperature < 0.0) throw std::invalid_argument("temperature must be non-negative");
    ComplexField psi = std::sqrt(atom_number) * modes.ground.psi0;
    if (!noise) return psi;
    for (const auto& m : modes.modes) {
        double occ = 0.5;
        if (temperature > 0.0) occ += 1.0 / std::expm1(m.energy / temperature);
        const double sd = std::sqrt(0.5 * occ);
        const double re = rng.normal(), im = rng.normal();
        const cplx a(sd * re, sd * im);
        for (std::size_t i = 0; i < psi.size(); ++i)
            psi[i] += a * m.u[i] - std::conj(a) * std::conj(m.v[i]);
    }
    return psi;
}

}  // namespace cavtraj
