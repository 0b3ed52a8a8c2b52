#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cavtraj/errors.hpp"
#include "cavtraj/grid.hpp"

using namespace cavtraj;

namespace {

ComplexField random_field(GridPtr g, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> n;
    ComplexField f(g);
    for (auto& v : f.values()) v = cplx(n(eng), n(eng));
    return f;
}

double sup_diff(const ComplexField& a, const ComplexField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("grid spacing and positions") {
    Grid g(8, 8.0);
    CHECK(g.spacing() == 1.0);
    auto x = g.positions();
    for (int i = 0; i < 8; ++i) CHECK(x[i] == -4.0 + i);

    Grid big(1024, 20.0);
    CHECK(big.spacing() == doctest::Approx(20.0 / 1024).epsilon(1e-15));
    CHECK(std::abs(big.spacing() * 1024 - 20.0) < 1e-13);
    auto xb = big.positions();
    for (std::size_t i = 1; i < xb.size(); ++i) CHECK(xb[i] > xb[i - 1]);
    CHECK(std::abs(xb.front() + xb.back()) <= big.spacing() + 1e-12);
}

TEST_CASE("grid rejects sizes that are not powers of two") {
    CHECK_THROWS_AS(Grid(7, 8.0), ConfigError);
    CHECK_THROWS_AS(Grid(8, -1.0), ConfigError);
}

TEST_CASE("laplacian of plane waves, constants and a Gaussian") {
    auto g = make_grid(64, 2 * std::numbers::pi);
    const double k = 3.0;  // grid wavenumber: 3 periods in the box
    ComplexField f(g);
    auto x = g->positions();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(cplx(0, k * x[i]));
    ComplexField lap = laplacian(f);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(lap[i] + k * k * f[i]));
    CHECK(err < 1e-12);

    ComplexField c(g);
    for (auto& v : c.values()) v = 2.5;
    ComplexField lc = laplacian(c);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(lc[i]) < 1e-12);

    auto g2 = make_grid(256, 20.0);
    ComplexField gauss(g2);
    auto x2 = g2->positions();
    for (std::size_t i = 0; i < gauss.size(); ++i) gauss[i] = std::exp(-x2[i] * x2[i] / 2);
    ComplexField lg = laplacian(gauss);
    double gerr = 0.0;
    for (std::size_t i = 0; i < gauss.size(); ++i)
        gerr = std::max(gerr, std::abs(lg[i] - (x2[i] * x2[i] - 1) * std::exp(-x2[i] * x2[i] / 2)));
    CHECK(gerr < 1e-8);
}

TEST_CASE("integration") {
    auto g = make_grid(256, 20.0);
    std::vector<double> ones(g->size(), 1.0);
    CHECK(integrate(ones, *g) == doctest::Approx(20.0).epsilon(1e-14));

    std::vector<double> s(g->size());
    auto x = g->positions();
    const double k = 2 * std::numbers::pi / 20.0 * 3;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(k * x[i]);
    CHECK(std::abs(integrate(s, *g)) < 1e-12);
}

TEST_CASE("normalize") {
    auto g = make_grid(128, 10.0);
    ComplexField f = random_field(g, 3);
    ComplexField n1 = normalize(f);
    CHECK(n1.norm() == doctest::Approx(1.0).epsilon(1e-14));
    ComplexField n2 = normalize(n1);
    CHECK(sup_diff(n1, n2) < 1e-15);

    ComplexField h = normalize(f, 4.0);
    ComplexField q = normalize(h, 1.0);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(q[i] - 0.5 * h[i]) < 1e-14);

    ComplexField zero(g);
    CHECK_THROWS(normalize(zero));
}

TEST_CASE("laplacian is linear, negative semidefinite, and the transform preserves the norm") {
    auto g = make_grid(256, 20.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ComplexField a = random_field(g, 10 + seed), b = random_field(g, 20 + seed);
        const cplx ca(0.3, -1.2), cb(-2.0, 0.7);
        ComplexField lhs = laplacian(ca * a + cb * b);
        ComplexField rhs = ca * laplacian(a) + cb * laplacian(b);
        double scale = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) scale = std::max(scale, std::abs(rhs[i]));
        CHECK(sup_diff(lhs, rhs) < 1e-12 * scale);

        ComplexField la = laplacian(a);
        std::vector<cplx> prod(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) prod[i] = std::conj(a[i]) * la[i];
        const cplx kin = integrate(std::span<const cplx>(prod), *g);
        CHECK(std::abs(kin.imag()) < 1e-10 * std::abs(kin));
        CHECK(kin.real() <= 0.0);

        CHECK(spectral_norm(a) == doctest::Approx(a.norm()).epsilon(1e-12));
    }
}
