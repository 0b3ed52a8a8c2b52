#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cavtraj {

using cplx = std::complex<double>;

/// Uniform periodic 1D lattice in oscillator units, centred on x = 0.
///
/// Positions are x_i = -extent/2 + i*dx; wavenumbers follow the usual FFT
/// ordering (0, dk, ..., -dk). n_points must be a power of two.
class Grid {
public:
    Grid(std::size_t n_points, double extent);

    std::size_t size() const { return n_; }
    double extent() const { return extent_; }
    double spacing() const { return dx_; }
    std::span<const double> positions() const { return x_; }
    std::span<const double> wavenumbers() const { return k_; }

    /// Index of the grid point nearest to x (no wrap-around).
    std::size_t nearest_index(double x) const;

    bool operator==(const Grid& other) const {
        return n_ == other.n_ && extent_ == other.extent_;
    }

private:
    std::size_t n_;
    double extent_;
    double dx_;
    std::vector<double> x_;
    std::vector<double> k_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(std::size_t n_points, double extent);

/// Complex amplitude psi(x_i) on a grid. Units x0^{-1/2}.
class ComplexField {
public:
    explicit ComplexField(GridPtr grid);
    ComplexField(GridPtr grid, std::vector<cplx> values);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<cplx> values() { return values_; }
    std::span<const cplx> values() const { return values_; }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }

    /// Sum |psi_i|^2 dx.
    double norm() const;
    std::vector<double> density() const;

    ComplexField& operator+=(const ComplexField& other);
    ComplexField& operator*=(cplx factor);

private:
    GridPtr grid_;
    std::vector<cplx> values_;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator*(cplx factor, ComplexField f);

/// In-place complex FFT of a fixed length. Owns its plans and is meant to be
/// held by one worker; execution is never shared between threads.
class FourierTransform {
public:
    explicit FourierTransform(std::size_t n);
    ~FourierTransform();
    FourierTransform(const FourierTransform&) = delete;
    FourierTransform& operator=(const FourierTransform&) = delete;

    std::size_t size() const { return n_; }
    void forward(std::span<cplx> data) const;
    /// Inverse transform including the 1/n normalisation.
    void inverse(std::span<cplx> data) const;

private:
    std::size_t n_;
    void* fwd_ = nullptr;
    void* inv_ = nullptr;
};

/// Per-thread transform for length n, created on first use.
const FourierTransform& thread_transform(std::size_t n);

/// Spectral second derivative with periodic boundary.
ComplexField laplacian(const ComplexField& f);

double integrate(std::span<const double> values, const Grid& grid);
cplx integrate(std::span<const cplx> values, const Grid& grid);

/// Norm evaluated in the spectral domain, sum |psi_k|^2 dx / n.
double spectral_norm(const ComplexField& f);

ComplexField normalize(const ComplexField& f, double target_norm = 1.0);

}  // namespace cavtraj
