#include "flatlab/weights.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "flatlab/errors.hpp"
#include "flatlab/quadrature.hpp"

namespace flatlab {

namespace {

class QuadraticWeight final : public Weight {
public:
    explicit QuadraticWeight(double a) : a_(a) {}
    double value(Complex z) const override { return a_ * std::norm(z); }
    double laplacian_density(Complex) const override { return 2.0 * a_; }
    WeightDomain domain() const override { return WeightDomain::Plane; }
    bool radial() const override { return true; }
    bool constant_laplacian_density(double* out) const override {
        if (out) *out = 2.0 * a_;
        return true;
    }
    std::string describe() const override {
        return "quadratic(a=" + std::to_string(a_) + ")";
    }

private:
    double a_;
};

class LogSquaredWeight final : public Weight {
public:
    explicit LogSquaredWeight(double a) : a_(a) {}
    double value(Complex z) const override {
        if (z == Complex(0.0, 0.0))
            throw std::domain_error("log_squared: value at the puncture");
        double u = std::log(std::abs(z));
        return a_ * u * u;
    }
    double laplacian_density(Complex z) const override {
        if (z == Complex(0.0, 0.0))
            throw std::domain_error("log_squared: density at the puncture");
        return a_ / std::norm(z);
    }
    WeightDomain domain() const override { return WeightDomain::PuncturedPlane; }
    bool radial() const override { return true; }
    std::string describe() const override {
        return "log_squared(a=" + std::to_string(a_) + ")";
    }
    double coefficient() const { return a_; }

private:
    double a_;
};

class RadialPolyWeight final : public Weight {
public:
    explicit RadialPolyWeight(std::vector<double> coeffs)
        : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty())
            throw std::invalid_argument("radial_poly: empty coefficient list");
    }
    double value(Complex z) const override {
        double t = std::norm(z), acc = 0.0, p = 1.0;
        for (double c : coeffs_) {
            acc += c * p;
            p *= t;
        }
        return acc;
    }
    double laplacian_density(Complex z) const override {
        // density of sum c_k |z|^{2k} is  2 * sum c_k k^2 |z|^{2(k-1)}
        double t = std::norm(z), acc = 0.0, p = 1.0;
        for (std::size_t k = 1; k < coeffs_.size(); ++k) {
            acc += coeffs_[k] * double(k) * double(k) * p;
            p *= t;
        }
        return 2.0 * acc;
    }
    WeightDomain domain() const override { return WeightDomain::Plane; }
    bool radial() const override { return true; }
    bool constant_laplacian_density(double* out) const override {
        for (std::size_t k = 2; k < coeffs_.size(); ++k)
            if (coeffs_[k] != 0.0) return false;
        if (out) *out = coeffs_.size() > 1 ? 2.0 * coeffs_[1] : 0.0;
        return true;
    }
    std::string describe() const override {
        std::string s = "radial_poly([";
        for (std::size_t k = 0; k < coeffs_.size(); ++k)
            s += (k ? "," : "") + std::to_string(coeffs_[k]);
        return s + "])";
    }

private:
    std::vector<double> coeffs_;
};

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
    return p1 + 0.5 * t * (p2 - p0 +
                           t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                t * (3.0 * (p1 - p2) + p3 - p0)));
}

class GridSampledWeight final : public Weight {
public:
    GridSampledWeight(GridSpec spec, WeightDomain dom)
        : spec_(std::move(spec)), domain_(dom) {
        if (spec_.nx < 4 || spec_.ny < 4)
            throw std::invalid_argument("grid_sampled: need at least a 4x4 grid");
        if (!(spec_.h > 0.0))
            throw std::invalid_argument("grid_sampled: grid step must be positive");
        if (spec_.values.size() != std::size_t(spec_.nx) * std::size_t(spec_.ny))
            throw std::invalid_argument("grid_sampled: value count mismatch");
    }

    double value(Complex z) const override {
        double fx = (z.real() - spec_.x0) / spec_.h;
        double fy = (z.imag() - spec_.y0) / spec_.h;
        int i = int(std::floor(fx)), j = int(std::floor(fy));
        // bicubic support: columns i-1..i+2, rows j-1..j+2
        if (i < 1 || i + 2 > spec_.nx - 1 || j < 1 || j + 2 > spec_.ny - 1)
            throw std::domain_error("grid_sampled: point outside interpolable region");
        double tx = fx - i, ty = fy - j;
        double col[4];
        for (int dj = -1; dj <= 2; ++dj) {
            const double* row = &spec_.values[std::size_t(j + dj) * spec_.nx];
            col[dj + 1] = catmull_rom(row[i - 1], row[i], row[i + 1], row[i + 2], tx);
        }
        return catmull_rom(col[0], col[1], col[2], col[3], ty);
    }

    double laplacian_density(Complex z) const override {
        const double h = spec_.h;
        double c = value(z);
        double s = value(z + Complex(h, 0.0)) + value(z - Complex(h, 0.0)) +
                   value(z + Complex(0.0, h)) + value(z - Complex(0.0, h));
        return 0.5 * (s - 4.0 * c) / (h * h);
    }

    WeightDomain domain() const override { return domain_; }
    std::string describe() const override {
        return "grid(" + std::to_string(spec_.nx) + "x" + std::to_string(spec_.ny) +
               ",h=" + std::to_string(spec_.h) + ")";
    }

private:
    GridSpec spec_;
    WeightDomain domain_;
};

class CoverPullbackWeight final : public Weight {
public:
    explicit CoverPullbackWeight(WeightPtr base) : base_(std::move(base)) {
        if (!base_) throw std::invalid_argument("cover_pullback: null base");
        if (base_->domain() != WeightDomain::PuncturedPlane)
            throw std::invalid_argument(
                "cover_pullback: base weight must live on the punctured plane");
        if (auto ls = dynamic_cast<const LogSquaredWeight*>(base_.get())) {
            exact_log_squared_ = true;
            a_ = ls->coefficient();
        }
    }

    double value(Complex z) const override {
        if (exact_log_squared_) {
            // (a log^2|zeta|) o exp = a (Re z)^2, exact at any height
            return a_ * z.real() * z.real();
        }
        guard(z);
        return base_->value(std::exp(z));
    }

    double laplacian_density(Complex z) const override {
        if (exact_log_squared_) return a_;
        guard(z);
        Complex w = std::exp(z);
        return std::norm(w) * base_->laplacian_density(w);
    }

    WeightDomain domain() const override { return WeightDomain::Plane; }
    bool constant_laplacian_density(double* out) const override {
        if (!exact_log_squared_) return false;
        if (out) *out = a_;
        return true;
    }
    std::string describe() const override {
        return "pullback(" + base_->describe() + ")";
    }

private:
    static void guard(Complex z) {
        if (std::fabs(z.real()) > 700.0)
            throw std::domain_error("cover_pullback: exp overflow in evaluation");
    }

    WeightPtr base_;
    bool exact_log_squared_ = false;
    double a_ = 0.0;
};

class DilatedWeight final : public Weight {
public:
    DilatedWeight(WeightPtr base, double factor)
        : base_(std::move(base)), factor_(factor) {
        if (!base_) throw std::invalid_argument("dilated_weight: null base");
        if (!(factor_ > 0.0))
            throw std::invalid_argument("dilated_weight: factor must be positive");
    }
    double value(Complex z) const override { return base_->value(z / factor_); }
    double laplacian_density(Complex z) const override {
        return base_->laplacian_density(z / factor_) / (factor_ * factor_);
    }
    WeightDomain domain() const override { return base_->domain(); }
    bool radial() const override { return base_->radial(); }
    bool constant_laplacian_density(double* out) const override {
        double v;
        if (!base_->constant_laplacian_density(&v)) return false;
        if (out) *out = v / (factor_ * factor_);
        return true;
    }
    std::string describe() const override {
        return "dilated(" + base_->describe() + ",factor=" + std::to_string(factor_) + ")";
    }

private:
    WeightPtr base_;
    double factor_;
};

class BumpedWeight final : public Weight {
public:
    BumpedWeight(WeightPtr base, Complex z0, double eps)
        : base_(std::move(base)), z0_(z0), eps_(eps) {
        if (!base_) throw std::invalid_argument("bumped_weight: null base");
        if (!(eps_ > 0.0))
            throw std::invalid_argument("bumped_weight: eps must be positive");
    }
    double value(Complex z) const override {
        return base_->value(z) + eps_ * std::norm(z - z0_);
    }
    double laplacian_density(Complex z) const override {
        return base_->laplacian_density(z) + 2.0 * eps_;
    }
    WeightDomain domain() const override { return base_->domain(); }
    bool radial() const override {
        return base_->radial() && z0_ == Complex(0.0, 0.0);
    }
    bool constant_laplacian_density(double* out) const override {
        double v;
        if (!base_->constant_laplacian_density(&v)) return false;
        if (out) *out = v + 2.0 * eps_;
        return true;
    }
    std::string describe() const override {
        std::ostringstream os;
        os << "bumped(" << base_->describe() << ",eps=" << eps_ << ",z0=" << z0_.real()
           << (z0_.imag() < 0 ? "" : "+") << z0_.imag() << "i)";
        return os.str();
    }

private:
    WeightPtr base_;
    Complex z0_;
    double eps_;
};

void require_disk_in_domain(const Weight& w, Complex z, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("averaging radius must be positive");
    if (w.domain() == WeightDomain::PuncturedPlane && std::abs(z) <= r)
        throw std::domain_error(
            "averaging disk crosses the puncture; use the cover instead");
}

}  // namespace

WeightPtr quadratic_weight(double a) {
    return std::make_shared<QuadraticWeight>(a);
}

WeightPtr log_squared_weight(double a) {
    return std::make_shared<LogSquaredWeight>(a);
}

WeightPtr radial_poly_weight(std::vector<double> coeffs) {
    return std::make_shared<RadialPolyWeight>(std::move(coeffs));
}

WeightPtr grid_sampled_weight(GridSpec spec, WeightDomain domain) {
    return std::make_shared<GridSampledWeight>(std::move(spec), domain);
}

GridSpec load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_grid: cannot open " + path);
    GridSpec spec;
    if (!(in >> spec.x0 >> spec.y0 >> spec.nx >> spec.ny >> spec.h))
        throw std::invalid_argument("load_grid: malformed header in " + path);
    if (spec.nx <= 0 || spec.ny <= 0)
        throw std::invalid_argument("load_grid: nonpositive grid dimensions");
    spec.values.resize(std::size_t(spec.nx) * std::size_t(spec.ny));
    for (auto& v : spec.values)
        if (!(in >> v))
            throw std::invalid_argument("load_grid: truncated value table in " + path);
    return spec;
}

void save_grid(const GridSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("save_grid: cannot open " + path);
    out.precision(17);
    out << spec.x0 << " " << spec.y0 << " " << spec.nx << " " << spec.ny << " "
        << spec.h << "\n";
    for (int j = 0; j < spec.ny; ++j) {
        for (int i = 0; i < spec.nx; ++i)
            out << spec.values[std::size_t(j) * spec.nx + i] << (i + 1 < spec.nx ? " " : "");
        out << "\n";
    }
}

WeightPtr cover_pullback(WeightPtr base) {
    return std::make_shared<CoverPullbackWeight>(std::move(base));
}

WeightPtr dilated_weight(WeightPtr base, double factor) {
    return std::make_shared<DilatedWeight>(std::move(base), factor);
}

WeightPtr bumped_weight(WeightPtr base, Complex z0, double eps) {
    return std::make_shared<BumpedWeight>(std::move(base), z0, eps);
}

double log_average(const Weight& w, Complex z, double r, double rel_tol,
                   Exec exec) {
    require_disk_in_domain(w, z, r);
    double mass = integrate_log_kernel_disk([&](Complex zeta) { return w.value(zeta); },
                                            z, r, rel_tol, nullptr, exec);
    return mass / (M_PI * r * r);
}

double covered_mean(const Weight& w, Complex zeta, double r, double rel_tol,
                    Exec exec) {
    if (w.domain() != WeightDomain::PuncturedPlane)
        throw std::invalid_argument("covered_mean: weight must live on the punctured plane");
    if (zeta == Complex(0.0, 0.0))
        throw std::domain_error("covered_mean: point at the puncture");
    Complex z = lift(zeta, -M_PI);
    WeightPtr pulled = cover_pullback(
        std::shared_ptr<const Weight>(&w, [](const Weight*) {}));
    return log_average(*pulled, z, r, rel_tol, exec);
}

double kernel_laplacian_mass(const Weight& w, Complex z, double r,
                             double rel_tol, Exec exec) {
    require_disk_in_domain(w, z, r);
    return integrate_log_kernel_disk(
        [&](Complex zeta) { return w.laplacian_density(zeta); }, z, r, rel_tol,
        nullptr, exec);
}

CurvatureBounds curvature_bounds(const Weight& w, const Rectangle& region,
                                 double grid_step) {
    if (!region.valid() || !(grid_step > 0.0))
        throw std::invalid_argument("curvature_bounds: empty grid");
    WeightPtr pulled;
    if (w.domain() == WeightDomain::PuncturedPlane)
        pulled = cover_pullback(std::shared_ptr<const Weight>(&w, [](const Weight*) {}));

    CurvatureBounds b{std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
    int count = 0;
    for (double y = region.y0; y <= region.y1 + 1e-12; y += grid_step) {
        for (double x = region.x0; x <= region.x1 + 1e-12; x += grid_step) {
            Complex z(x, y);
            double d;
            if (pulled)
                d = pulled->laplacian_density(lift(z, -M_PI));
            else
                d = w.laplacian_density(z);
            b.lower = std::min(b.lower, d);
            b.upper = std::max(b.upper, d);
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("curvature_bounds: empty grid");
    return b;
}

double AveragedWeight::value(Complex z) const {
    if (!base) throw std::invalid_argument("averaged weight: null base");
    if (flavor == AverageFlavor::LogAverage) return log_average(*base, z, radius);
    return covered_mean(*base, z, radius);
}

}  // namespace flatlab
