#pragma once

#include <optional>
#include <vector>

#include "flatlab/parallel.hpp"
#include "flatlab/sequences.hpp"
#include "flatlab/weights.hpp"

namespace flatlab {

// T(zeta) = prod (zeta - root) over the points of a configuration inside
// D_r(center).  Roots are kept in canonical (re, im) order so results are
// independent of how the configuration was enumerated.
struct LocalDivisor {
    Complex center;
    double radius = 0.0;
    std::vector<Complex> roots;
};

LocalDivisor local_divisor(const PointSequence& gamma, Complex z, double r);

struct DivisorInvariants {
    double lambda = 0.0;
    double sigma = 0.0;
    std::optional<double> s_value;
    double upsilon_mass = 0.0;
};

// pi*(r^2 - 1 + log(1/r^2)); the annulus kernel mass, r > 1.
double c_r(double r);

// (1/c_r) int_{A_r(z)} log|T|^2 log(r^2/|zeta-z|^2) dA.  The angular integral
// of log|zeta-gamma| over each circle is its exact mean value
// log max(rho, |gamma-z|), which collapses the integral to elementary
// antiderivatives per root.
double lambda_value(const LocalDivisor& d);

// |T(z)|^2 e^{-lambda}; in [0,1], equal to 1 when D_r(z) misses gamma.
double sigma(const PointSequence& gamma, Complex z, double r);

// |dT(gamma)|^2 e^{-lambda(gamma)} at a member point.  Sets the flag when
// another point sits closer than 1e-8 (near-degenerate divisor).
double s_value(const PointSequence& gamma, Complex gamma_point, double r,
               bool* near_degenerate = nullptr);

// sum over points with 1 < |p-z| < r of log(r^2/|p-z|^2)
double upsilon_mass(const PointSequence& gamma, Complex z, double r);

DivisorInvariants invariants_at(const PointSequence& gamma, Complex z, double r);

struct Polynomial {
    Complex leading{1.0, 0.0};
    std::vector<Complex> roots;

    Complex eval(Complex z) const;
};

// Boundary average of log(|f|^2 e^{-phi}) minus the interior side of the
// weighted Jensen identity; should vanish.
double jensen_residual(const Polynomial& f, const Weight& w, Complex z, double r);

// sigma over many centers; parallel kernel with a serial reference lane.
std::vector<double> sigma_field(const PointSequence& gamma,
                                const std::vector<Complex>& centers, double r,
                                Exec exec = Exec::OpenMP);

}  // namespace flatlab
