#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "flatlab/errors.hpp"
#include "flatlab/geometry.hpp"
#include "flatlab/parallel.hpp"

namespace flatlab {

// Gauss-Legendre rule on [-1, 1].
struct GLRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Nodes by Newton iteration on P_n; cached per n.
const GLRule& gauss_legendre(int n);

// Rule mapped to [a, b].
GLRule gauss_legendre_on(double a, double b, int n);

// Radial rule for integrals  int_0^r 2*log(r/rho) F(rho) rho drho.
// The substitution rho = r*exp(-t) turns the integrand into
// 2 r^2 t e^{-2t} F(r e^{-t}), analytic in t, so plain Gauss-Legendre on
// [0, T] converges geometrically; T = 36 puts the truncated tail below 1e-30.
struct RadialLogRule {
    std::vector<double> rho;
    std::vector<double> w; // includes the kernel, the jacobian and rho drho
};

RadialLogRule radial_log_rule(double r, int n);

// int_{D_r(z)} log(r^2/|zeta-z|^2) F(zeta) dA  by a tensor rule:
// uniform trapezoid in angle, radial_log_rule in radius.  Node counts double
// until successive values agree to rel_tol; NumericError past the cap.
double integrate_log_kernel_disk(const std::function<double(Complex)>& f,
                                 Complex center, double r, double rel_tol,
                                 double* error_estimate = nullptr,
                                 Exec exec = Exec::OpenMP);

// Average of f over the circle |zeta - z| = r: trapezoid starting at 2^10
// nodes, doubling until the change drops below abs_tol.
double circle_average(const std::function<double(Complex)>& f, Complex center,
                      double r, double abs_tol, int max_doublings = 10);

}  // namespace flatlab
