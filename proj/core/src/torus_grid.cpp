#include "ekrelax/torus_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <utility>

#include "ekrelax/errors.hpp"

namespace ekrelax {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) {
        throw UsageError("field operation on mismatched grids");
    }
}

}  // namespace

TorusGrid::TorusGrid(int n_points, double length) : n_(n_points), length_(length) {
    std::ostringstream os;
    if (n_points < 16 || n_points % 2 != 0) {
        os << "grid size must be even and >= 16, got " << n_points;
    } else if (!(length > 0.0) || !std::isfinite(length)) {
        os << "grid length must be > 0, got " << length;
    }
    if (!os.str().empty()) {
        throw ConfigError(os.str());
    }
}

std::vector<double> TorusGrid::nodes() const {
    std::vector<double> xs(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) {
        xs[static_cast<std::size_t>(j)] = x(j);
    }
    return xs;
}

Field::Field(const TorusGrid& grid) : grid_(grid), values_(static_cast<std::size_t>(grid.size()), 0.0) {}

Field::Field(const TorusGrid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid.size())) {
        throw UsageError("field value count does not match grid size");
    }
}

Field::Field(const TorusGrid& grid, double value)
    : grid_(grid), values_(static_cast<std::size_t>(grid.size()), value) {}

Field Field::from_function(const TorusGrid& grid, const std::function<double(double)>& f) {
    Field out(grid);
    for (int j = 0; j < grid.size(); ++j) {
        out[j] = f(grid.x(j));
    }
    return out;
}

bool Field::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double Field::mean() const {
    double sum = 0.0;
    for (double v : values_) {
        sum += v;
    }
    return sum / static_cast<double>(values_.size());
}

Field& Field::operator+=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += other.values_[i];
    }
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] -= other.values_[i];
    }
    return *this;
}

Field& Field::operator*=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] *= other.values_[i];
    }
    return *this;
}

Field& Field::operator/=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] /= other.values_[i];
    }
    return *this;
}

Field& Field::operator+=(double c) {
    for (double& v : values_) {
        v += c;
    }
    return *this;
}

Field& Field::operator*=(double c) {
    for (double& v : values_) {
        v *= c;
    }
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, const Field& b) { return a *= b; }
Field operator/(Field a, const Field& b) { return a /= b; }
Field operator*(double c, Field a) { return a *= c; }
Field operator*(Field a, double c) { return a *= c; }
Field operator+(Field a, double c) { return a += c; }
Field operator-(Field a) { return a *= -1.0; }

Field apply(const Field& f, const std::function<double(double)>& fn) {
    Field out(f.grid());
    for (int j = 0; j < f.size(); ++j) {
        out[j] = fn(f[j]);
    }
    return out;
}

double integrate(const Field& f) {
    double sum = 0.0;
    for (double v : f.values()) {
        sum += v;
    }
    return f.grid().dx() * sum;
}

double l2_norm(const Field& f) {
    double sum = 0.0;
    for (double v : f.values()) {
        sum += v * v;
    }
    return std::sqrt(f.grid().dx() * sum);
}

double max_norm(const Field& f) { return f.max_abs(); }

Field deriv(const Field& f, int order) {
    if (order < 1 || order > 4) {
        throw UsageError("deriv: order must be in 1..4");
    }
    Field out(f.grid());
    SpectralWorkspace::for_grid(f.grid()).derivative(f.values(), out.values(), order, false);
    return out;
}

Field dealias(const Field& f) {
    Field out(f.grid());
    SpectralWorkspace::for_grid(f.grid()).derivative(f.values(), out.values(), 0, true);
    return out;
}

Field deriv_dealiased(const Field& f, int order) {
    if (order < 0 || order > 4) {
        throw UsageError("deriv_dealiased: order must be in 0..4");
    }
    Field out(f.grid());
    SpectralWorkspace::for_grid(f.grid()).derivative(f.values(), out.values(), order, true);
    return out;
}

Field deriv_chopped(const Field& f, int order, double chop) {
    if (order < 0 || order > 4) {
        throw UsageError("deriv_chopped: order must be in 0..4");
    }
    if (!(chop >= 0.0)) {
        throw UsageError("deriv_chopped: chop must be >= 0");
    }
    Field out(f.grid());
    SpectralWorkspace::for_grid(f.grid()).derivative(f.values(), out.values(), order, true, chop);
    return out;
}

Field resample(const Field& f, int n_fine, double shift) {
    const int n = f.size();
    if (n_fine < n || n_fine % n != 0) {
        throw UsageError("resample: target size must be a multiple of the source size");
    }
    const TorusGrid fine(n_fine, f.grid().length());
    std::vector<std::complex<double>> coarse;
    SpectralWorkspace::for_grid(f.grid()).forward(f.values(), coarse);

    std::vector<std::complex<double>> spec(static_cast<std::size_t>(n_fine / 2 + 1));
    const double phase_step = 2.0 * std::numbers::pi * shift / n_fine;
    for (int j = 0; j <= n / 2; ++j) {
        std::complex<double> c = coarse[static_cast<std::size_t>(j)] / static_cast<double>(n);
        if (j == n / 2 && n_fine > n) {
            // the Nyquist mode is shared equally between +N/2 and -N/2
            c *= 0.5;
        }
        const double phase = phase_step * j;
        spec[static_cast<std::size_t>(j)] = c * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    Field out(fine);
    // inverse() divides by n_fine; the coefficients above are already normalized
    for (auto& c : spec) {
        c *= static_cast<double>(n_fine);
    }
    SpectralWorkspace::for_grid(fine).inverse(spec, out.values());
    return out;
}

SpectralWorkspace::SpectralWorkspace(const TorusGrid& grid) : grid_(grid), n_(grid.size()) {
    const auto n = static_cast<std::size_t>(n_);
    real_ = fftw_alloc_real(n);
    auto* cplx = fftw_alloc_complex(n / 2 + 1);
    complex_ = cplx;
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_forward_ = fftw_plan_dft_r2c_1d(n_, real_, cplx, FFTW_ESTIMATE);
    plan_inverse_ = fftw_plan_dft_c2r_1d(n_, cplx, real_, FFTW_ESTIMATE);
    if (plan_forward_ == nullptr || plan_inverse_ == nullptr) {
        throw std::runtime_error("FFTW plan creation failed");
    }
}

SpectralWorkspace::~SpectralWorkspace() {
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (plan_forward_ != nullptr) {
            fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
        }
        if (plan_inverse_ != nullptr) {
            fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
        }
    }
    fftw_free(real_);
    fftw_free(complex_);
}

SpectralWorkspace& SpectralWorkspace::for_grid(const TorusGrid& grid) {
    thread_local std::map<std::pair<int, double>, std::unique_ptr<SpectralWorkspace>> cache;
    auto& slot = cache[{grid.size(), grid.length()}];
    if (!slot) {
        slot = std::make_unique<SpectralWorkspace>(grid);
    }
    return *slot;
}

void SpectralWorkspace::derivative(std::span<const double> in, std::span<double> out, int order,
                                   bool truncate, double chop) {
    auto* c = static_cast<fftw_complex*>(complex_);
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(static_cast<fftw_plan>(plan_forward_));

    const int half = n_ / 2;
    double floor2 = -1.0;
    if (chop > 0.0) {
        double peak2 = 0.0;
        for (int j = 0; j <= half; ++j) {
            peak2 = std::max(peak2, c[j][0] * c[j][0] + c[j][1] * c[j][1]);
        }
        floor2 = chop * chop * peak2;
    }
    const int cutoff = truncate ? grid_.dealias_cutoff() : half;
    const double scale = 1.0 / n_;
    const double k0 = 2.0 * std::numbers::pi / grid_.length();
    for (int j = 0; j <= half; ++j) {
        double re = c[j][0] * scale;
        double im = c[j][1] * scale;
        if (j > cutoff || (j == half && order % 2 == 1) || c[j][0] * c[j][0] + c[j][1] * c[j][1] < floor2) {
            re = 0.0;
            im = 0.0;
        } else if (order > 0) {
            const double k = k0 * j;
            double kp = 1.0;
            for (int o = 0; o < order; ++o) {
                kp *= k;
            }
            // multiply by (i k)^order
            double r = 0.0;
            double i = 0.0;
            switch (order % 4) {
                case 0: r = re * kp; i = im * kp; break;
                case 1: r = -im * kp; i = re * kp; break;
                case 2: r = -re * kp; i = -im * kp; break;
                default: r = im * kp; i = -re * kp; break;
            }
            re = r;
            im = i;
        }
        c[j][0] = re;
        c[j][1] = im;
    }
    fftw_execute(static_cast<fftw_plan>(plan_inverse_));
    std::copy(real_, real_ + n_, out.begin());
}

void SpectralWorkspace::forward(std::span<const double> in, std::vector<std::complex<double>>& spectrum) {
    auto* c = static_cast<fftw_complex*>(complex_);
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(static_cast<fftw_plan>(plan_forward_));
    spectrum.resize(static_cast<std::size_t>(n_ / 2 + 1));
    for (int j = 0; j <= n_ / 2; ++j) {
        spectrum[static_cast<std::size_t>(j)] = {c[j][0], c[j][1]};
    }
}

void SpectralWorkspace::inverse(const std::vector<std::complex<double>>& spectrum, std::span<double> out) {
    auto* c = static_cast<fftw_complex*>(complex_);
    const double scale = 1.0 / n_;
    for (int j = 0; j <= n_ / 2; ++j) {
        c[j][0] = spectrum[static_cast<std::size_t>(j)].real() * scale;
        c[j][1] = spectrum[static_cast<std::size_t>(j)].imag() * scale;
    }
    fftw_execute(static_cast<fftw_plan>(plan_inverse_));
    std::copy(real_, real_ + n_, out.begin());
}

}  // namespace ekrelax
