#include "flatlab/divisors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flatlab/errors.hpp"
#include "flatlab/quadrature.hpp"

namespace flatlab {

namespace {

void sort_canonical(std::vector<Complex>& pts) {
    std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
}

// int rho log(r/rho) drho
double anti1(double rho, double r) {
    return 0.5 * rho * rho * std::log(r / rho) + 0.25 * rho * rho;
}

// int rho log(rho) log(r/rho) drho
double anti2(double rho, double r) {
    double lr = std::log(rho);
    double a = std::log(r) * (0.5 * rho * rho * lr - 0.25 * rho * rho);
    double b = 0.5 * rho * rho * lr * lr - 0.5 * rho * rho * lr + 0.25 * rho * rho;
    return a - b;
}

// int_{A_r(0)} log|zeta - gamma|^2 log(r^2/|zeta|^2) dA for |gamma| = d:
// the circle mean of log|zeta - gamma| is log(max(rho, d)), so
//   J = 8*pi * int_1^r log(max(rho,d)) log(r/rho) rho drho.
double root_contribution(double d, double r) {
    const double eight_pi = 8.0 * M_PI;
    if (d <= 1.0) return eight_pi * (anti2(r, r) - anti2(1.0, r));
    if (d >= r) return eight_pi * std::log(d) * (anti1(r, r) - anti1(1.0, r));
    return eight_pi * (std::log(d) * (anti1(d, r) - anti1(1.0, r)) +
                       (anti2(r, r) - anti2(d, r)));
}

}  // namespace

LocalDivisor local_divisor(const PointSequence& gamma, Complex z, double r) {
    if (!(r > 1.0)) throw std::invalid_argument("local_divisor: need r > 1");
    LocalDivisor d;
    d.center = z;
    d.radius = r;
    for (const Complex& p : gamma.points)
        if (std::abs(p - z) < r) d.roots.push_back(p);
    sort_canonical(d.roots);
    return d;
}

double c_r(double r) {
    if (!(r > 1.0)) throw std::invalid_argument("c_r: need r > 1");
    return M_PI * (r * r - 1.0 - 2.0 * std::log(r));
}

double lambda_value(const LocalDivisor& d) {
    if (!(d.radius > 1.0)) throw std::invalid_argument("lambda_value: need r > 1");
    double total = 0.0;
    for (const Complex& root : d.roots) {
        double dist = std::abs(root - d.center);
        if (!(dist < d.radius))
            throw std::invalid_argument("lambda_value: root outside D_r(center)");
        total += root_contribution(dist, d.radius);
    }
    return total / c_r(d.radius);
}

double sigma(const PointSequence& gamma, Complex z, double r) {
    LocalDivisor d = local_divisor(gamma, z, r);
    if (d.roots.empty()) return 1.0;
    double log_t2 = 0.0;
    for (const Complex& root : d.roots) {
        double dist = std::abs(root - z);
        if (dist == 0.0) return 0.0; // z is a point of gamma
        log_t2 += 2.0 * std::log(dist);
    }
    return std::exp(log_t2 - lambda_value(d));
}

double s_value(const PointSequence& gamma, Complex gamma_point, double r,
               bool* near_degenerate) {
    bool member = false;
    for (const Complex& p : gamma.points)
        if (p == gamma_point) member = true;
    if (!member)
        throw std::invalid_argument("s_value: point is not a member of the sequence");
    LocalDivisor d = local_divisor(gamma, gamma_point, r);
    double log_dt2 = 0.0;
    bool degenerate = false;
    for (const Complex& root : d.roots) {
        if (root == gamma_point) continue;
        double dist = std::abs(root - gamma_point);
        if (dist < 1e-8) degenerate = true;
        log_dt2 += 2.0 * std::log(dist);
    }
    if (near_degenerate) *near_degenerate = degenerate;
    return std::exp(log_dt2 - lambda_value(d));
}

double upsilon_mass(const PointSequence& gamma, Complex z, double r) {
    if (!(r > 1.0)) throw std::invalid_argument("upsilon_mass: need r > 1");
    std::vector<double> dists;
    for (const Complex& p : gamma.points) {
        double dist = std::abs(p - z);
        if (dist > 1.0 && dist < r) dists.push_back(dist);
    }
    std::sort(dists.begin(), dists.end());
    double total = 0.0;
    for (double dist : dists) total += 2.0 * (std::log(r) - std::log(dist));
    return total;
}

DivisorInvariants invariants_at(const PointSequence& gamma, Complex z, double r) {
    DivisorInvariants inv;
    inv.lambda = lambda_value(local_divisor(gamma, z, r));
    inv.sigma = sigma(gamma, z, r);
    inv.upsilon_mass = upsilon_mass(gamma, z, r);
    for (const Complex& p : gamma.points)
        if (p == z) inv.s_value = s_value(gamma, z, r);
    return inv;
}

Complex Polynomial::eval(Complex z) const {
    Complex v = leading;
    for (const Complex& a : roots) v *= z - a;
    return v;
}

double jensen_residual(const Polynomial& f, const Weight& w, Complex z, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("jensen_residual: need r > 0");
    if (f.leading == Complex(0.0, 0.0))
        throw std::invalid_argument("jensen_residual: zero polynomial");
    for (const Complex& a : f.roots)
        if (std::fabs(std::abs(a - z) - r) < 1e-9)
            throw std::invalid_argument("jensen_residual: root on the boundary circle");
    Complex fz = f.eval(z);
    if (fz == Complex(0.0, 0.0))
        throw std::invalid_argument("jensen_residual: f vanishes at the center");

    double boundary = circle_average(
        [&](Complex zeta) {
            double log_f2 = 2.0 * std::log(std::abs(f.leading));
            for (const Complex& a : f.roots)
                log_f2 += 2.0 * std::log(std::abs(zeta - a));
            return log_f2 - w.value(zeta);
        },
        z, r, 1e-9);

    double interior = 2.0 * std::log(std::abs(fz)) - w.value(z);
    for (const Complex& a : f.roots) {
        double dist = std::abs(a - z);
        if (dist < r) interior += 2.0 * (std::log(r) - std::log(dist));
    }
    interior -= kernel_laplacian_mass(w, z, r, 1e-9) / (2.0 * M_PI);
    return boundary - interior;
}

std::vector<double> sigma_field(const PointSequence& gamma,
                                const std::vector<Complex>& centers, double r,
                                Exec exec) {
    std::vector<double> out(centers.size());
    for_each_index(centers.size(), exec,
                   [&](std::size_t i) { out[i] = sigma(gamma, centers[i], r); });
    return out;
}

}  // namespace flatlab
