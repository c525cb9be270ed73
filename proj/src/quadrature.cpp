#include "flatlab/quadrature.hpp"

#include <map>
#include <mutex>

namespace flatlab {

namespace {

GLRule compute_gauss_legendre(int n) {
    GLRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        rule.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return rule;
}

}  // namespace

const GLRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
    static std::map<int, GLRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

GLRule gauss_legendre_on(double a, double b, int n) {
    const GLRule& base = gauss_legendre(n);
    GLRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        rule.x[i] = mid + half * base.x[i];
        rule.w[i] = half * base.w[i];
    }
    return rule;
}

RadialLogRule radial_log_rule(double r, int n) {
    if (!(r > 0.0)) throw std::invalid_argument("radial_log_rule: need r > 0");
    const double T = 36.0;
    GLRule t = gauss_legendre_on(0.0, T, n);
    RadialLogRule rule;
    rule.rho.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double ti = t.x[i];
        rule.rho[i] = r * std::exp(-ti);
        rule.w[i] = 2.0 * r * r * ti * std::exp(-2.0 * ti) * t.w[i];
    }
    return rule;
}

namespace {

double tensor_log_kernel(const std::function<double(Complex)>& f, Complex z,
                         double r, int n_rho, int n_theta, Exec exec) {
    RadialLogRule rad = radial_log_rule(r, n_rho);
    std::vector<double> ring(n_rho, 0.0);
    const double dtheta = TWO_PI / n_theta;
    for_each_index(static_cast<std::size_t>(n_rho), exec, [&](std::size_t i) {
        double acc = 0.0;
        for (int j = 0; j < n_theta; ++j) {
            double th = dtheta * j;
            acc += f(z + rad.rho[i] * Complex(std::cos(th), std::sin(th)));
        }
        ring[i] = rad.w[i] * acc * dtheta;
    });
    double total = 0.0;
    for (double v : ring) total += v;
    return total;
}

}  // namespace

double integrate_log_kernel_disk(const std::function<double(Complex)>& f,
                                 Complex center, double r, double rel_tol,
                                 double* error_estimate, Exec exec) {
    if (!(r > 0.0))
        throw std::invalid_argument("integrate_log_kernel_disk: need r > 0");
    int n_rho = 48, n_theta = 64;
    double prev = tensor_log_kernel(f, center, r, n_rho, n_theta, exec);
    for (int level = 0; level < 6; ++level) {
        n_rho *= 2;
        n_theta *= 2;
        double cur = tensor_log_kernel(f, center, r, n_rho, n_theta, exec);
        double err = std::fabs(cur - prev);
        double scale = std::max(1.0, std::fabs(cur));
        if (err <= rel_tol * scale) {
            if (error_estimate) *error_estimate = err;
            return cur;
        }
        prev = cur;
    }
    throw NumericError("integrate_log_kernel_disk",
                       "node doubling did not reach requested tolerance");
}

double circle_average(const std::function<double(Complex)>& f, Complex center,
                      double r, double abs_tol, int max_doublings) {
    if (!(r > 0.0)) throw std::invalid_argument("circle_average: need r > 0");
    int n = 1 << 10;
    auto eval = [&](int nn) {
        double acc = 0.0;
        for (int j = 0; j < nn; ++j) {
            double th = TWO_PI * j / nn;
            acc += f(center + r * Complex(std::cos(th), std::sin(th)));
        }
        return acc / nn;
    };
    double prev = eval(n);
    for (int level = 0; level < max_doublings; ++level) {
        n *= 2;
        double cur = eval(n);
        if (std::fabs(cur - prev) < abs_tol) return cur;
        prev = cur;
    }
    throw NumericError("circle_average",
                       "trapezoid doubling did not reach requested tolerance");
}

}  // namespace flatlab
