#include "cavtraj/grid.hpp"

#include "cavtraj/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cavtraj {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

Grid::Grid(std::size_t n_points, double extent) : n_(n_points), extent_(extent) {
    if (!is_power_of_two(n_points) || n_points < 8) {
        throw ConfigError("grid: n_points must be a power of two >= 8, got " +
                                    std::to_string(n_points));
    }
    if (!(extent > 0.0) || !std::isfinite(extent)) {
        throw ConfigError("grid: extent must be positive");
    }
    dx_ = extent / static_cast<double>(n_points);
    x_.resize(n_);
    k_.resize(n_);
    const double dk = 2.0 * std::numbers::pi / extent;
    const auto half = static_cast<std::ptrdiff_t>(n_ / 2);
    for (std::size_t i = 0; i < n_; ++i) {
        x_[i] = -0.5 * extent + static_cast<double>(i) * dx_;
        auto m = static_cast<std::ptrdiff_t>(i);
        if (m >= half) m -= static_cast<std::ptrdiff_t>(n_);
        k_[i] = dk * static_cast<double>(m);
    }
}

std::size_t Grid::nearest_index(double x) const {
    const double r = std::round((x + 0.5 * extent_) / dx_);
    if (r <= 0.0) return 0;
    if (r >= static_cast<double>(n_ - 1)) return n_ - 1;
    return static_cast<std::size_t>(r);
}

GridPtr make_grid(std::size_t n_points, double extent) {
    return std::make_shared<const Grid>(n_points, extent);
}

ComplexField::ComplexField(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("field: null grid");
    values_.assign(grid_->size(), cplx{0.0, 0.0});
}

ComplexField::ComplexField(GridPtr grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("field: null grid");
    if (values_.size() != grid_->size()) {
        throw std::invalid_argument("field: " + std::to_string(values_.size()) +
                                    " values for a grid of " + std::to_string(grid_->size()));
    }
}

double ComplexField::norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return s * grid_->spacing();
}

std::vector<double> ComplexField::density() const {
    std::vector<double> d(values_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(values_[i]);
    return d;
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
    if (!(*grid_ == other.grid())) throw std::invalid_argument("field: grid mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ComplexField& ComplexField::operator*=(cplx factor) {
    for (auto& v : values_) v *= factor;
    return *this;
}

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator*(cplx factor, ComplexField f) { return f *= factor; }

FourierTransform::FourierTransform(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    auto* buf = fftw_alloc_complex(n);
    const int len = static_cast<int>(n);
    // ESTIMATE keeps the chosen algorithm (and hence round-off) identical
    // from run to run.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, flags);
    inv_ = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    if (!fwd_ || !inv_) throw std::runtime_error("fftw: plan creation failed");
}

FourierTransform::~FourierTransform() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
}

void FourierTransform::forward(std::span<cplx> data) const {
    if (data.size() != n_) throw std::invalid_argument("fft: length mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void FourierTransform::inverse(std::span<cplx> data) const {
    if (data.size() != n_) throw std::invalid_argument("fft: length mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(inv_), p, p);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
}

const FourierTransform& thread_transform(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FourierTransform>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FourierTransform>(n);
    return *slot;
}

ComplexField laplacian(const ComplexField& f) {
    const auto& grid = f.grid();
    std::vector<cplx> work(f.values().begin(), f.values().end());
    const auto& fft = thread_transform(grid.size());
    fft.forward(work);
    const auto k = grid.wavenumbers();
    for (std::size_t i = 0; i < work.size(); ++i) work[i] *= -k[i] * k[i];
    fft.inverse(work);
    return ComplexField(f.grid_ptr(), std::move(work));
}

double integrate(std::span<const double> values, const Grid& grid) {
    if (values.size() != grid.size()) throw std::invalid_argument("integrate: length mismatch");
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.spacing();
}

cplx integrate(std::span<const cplx> values, const Grid& grid) {
    if (values.size() != grid.size()) throw std::invalid_argument("integrate: length mismatch");
    cplx s{0.0, 0.0};
    for (const auto& v : values) s += v;
    return s * grid.spacing();
}

double spectral_norm(const ComplexField& f) {
    std::vector<cplx> work(f.values().begin(), f.values().end());
    thread_transform(work.size()).forward(work);
    double s = 0.0;
    for (const auto& v : work) s += std::norm(v);
    return s * f.grid().spacing() / static_cast<double>(work.size());
}

ComplexField normalize(const ComplexField& f, double target_norm) {
    const double n = f.norm();
    if (!(n > 0.0)) throw std::invalid_argument("normalize: field has zero norm");
    if (!(target_norm >= 0.0)) throw std::invalid_argument("normalize: negative target");
    ComplexField out = f;
    out *= std::sqrt(target_norm / n);
    return out;
}

}  // namespace cavtraj
