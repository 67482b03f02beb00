#pragma once

// Discrete calculus on the 1-D periodic torus [0, L): uniform nodes,
// Fourier (trigonometric interpolation) derivatives, the periodic rectangle
// quadrature and 2/3-rule dealiasing.

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace ekrelax {

class TorusGrid {
public:
    /// Throws ConfigError for odd n, n < 16 or a nonpositive length.
    explicit TorusGrid(int n_points = 64, double length = 2.0 * std::numbers::pi);

    int size() const noexcept { return n_; }
    double length() const noexcept { return length_; }
    double dx() const noexcept { return length_ / n_; }
    double x(int j) const noexcept { return j * dx(); }
    std::vector<double> nodes() const;

    /// Angular wavenumber of Fourier index j.
    double wavenumber(int j) const noexcept { return 2.0 * std::numbers::pi * j / length_; }
    /// Largest retained index under the 2/3 rule.
    int dealias_cutoff() const noexcept { return n_ / 3; }

    bool operator==(const TorusGrid&) const = default;

private:
    int n_;
    double length_;
};

/// Real periodic grid function.
class Field {
public:
    explicit Field(const TorusGrid& grid);
    Field(const TorusGrid& grid, std::vector<double> values);
    Field(const TorusGrid& grid, double value);

    static Field from_function(const TorusGrid& grid, const std::function<double(double)>& f);

    const TorusGrid& grid() const noexcept { return grid_; }
    int size() const noexcept { return grid_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const double* data() const noexcept { return values_.data(); }
    double* data() noexcept { return values_.data(); }
    double operator[](int j) const { return values_[static_cast<std::size_t>(j)]; }
    double& operator[](int j) { return values_[static_cast<std::size_t>(j)]; }

    bool all_finite() const noexcept;
    double min() const;
    double max() const;
    double max_abs() const;
    double mean() const;

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(const Field& other);
    Field& operator/=(const Field& other);
    Field& operator+=(double c);
    Field& operator*=(double c);

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, const Field& b);
Field operator/(Field a, const Field& b);
Field operator*(double c, Field a);
Field operator*(Field a, double c);
Field operator+(Field a, double c);
Field operator-(Field a);

/// Pointwise f(x_j) for every value.
Field apply(const Field& f, const std::function<double(double)>& fn);

/// L/N * sum_j f_j.
double integrate(const Field& f);
/// sqrt(integrate(f^2)).
double l2_norm(const Field& f);
double max_norm(const Field& f);

/// Spectral derivative of order 1..4.
Field deriv(const Field& f, int order);
/// Zero the Fourier modes with index above N/3.
Field dealias(const Field& f);
/// deriv(dealias(f), order) in one transform pair.
Field deriv_dealiased(const Field& f, int order);

/// Relative level below which Fourier coefficients of a pointwise-evaluated
/// field are round-off.
inline constexpr double kRoundoffChop = 2e-15;

/// deriv_dealiased after dropping modes below chop * max |coefficient|.
/// High derivatives of nonlinear fields otherwise amplify the round-off
/// floor by |k|^order.
Field deriv_chopped(const Field& f, int order, double chop = kRoundoffChop);
/// Trigonometric interpolant of f sampled on an n_fine-point grid, at nodes
/// shifted by shift * (L / n_fine). n_fine must be a multiple of f.size().
Field resample(const Field& f, int n_fine, double shift = 0.0);

/// FFT plans and aligned buffers for one grid. Not shareable across threads;
/// for_grid() hands out a thread-local instance.
class SpectralWorkspace {
public:
    explicit SpectralWorkspace(const TorusGrid& grid);
    ~SpectralWorkspace();
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    static SpectralWorkspace& for_grid(const TorusGrid& grid);

    const TorusGrid& grid() const noexcept { return grid_; }

    /// out = d^order/dx^order in, optionally restricted to |index| <= N/3.
    /// order 0 with truncate = true is plain dealiasing. Modes below
    /// chop * max |coefficient| are dropped first. in and out may alias.
    void derivative(std::span<const double> in, std::span<double> out, int order, bool truncate,
                    double chop = 0.0);

    /// Forward transform; spectrum has N/2 + 1 entries (unnormalized).
    void forward(std::span<const double> in, std::vector<std::complex<double>>& spectrum);
    /// Inverse of forward() including the 1/N normalization.
    void inverse(const std::vector<std::complex<double>>& spectrum, std::span<double> out);

private:
    TorusGrid grid_;
    int n_;
    double* real_ = nullptr;
    void* complex_ = nullptr;
    void* plan_forward_ = nullptr;
    void* plan_inverse_ = nullptr;
};

}  // namespace ekrelax
