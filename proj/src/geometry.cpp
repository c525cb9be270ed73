#include "flatlab/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace flatlab {

double euclidean_distance(Complex p, Complex q) {
    return std::abs(p - q);
}

double cylindrical_distance(Complex p, Complex q) {
    if (p == Complex(0.0, 0.0) || q == Complex(0.0, 0.0))
        throw std::domain_error("cylindrical_distance: points must be nonzero");
    // Work with log moduli and arguments separately so wildly scaled inputs
    // never overflow the quotient.
    double dlog = std::log(std::abs(p)) - std::log(std::abs(q));
    double dang = std::arg(p) - std::arg(q); // in (-2*pi, 2*pi)
    if (dang > TWO_PI / 2) dang -= TWO_PI;
    if (dang < -TWO_PI / 2) dang += TWO_PI;
    // antipodal tie: both +pi and -pi represent the same angular gap pi
    return std::hypot(dlog, std::fabs(dang));
}

Complex cover_map(Complex z) {
    return std::exp(z);
}

Complex lift(Complex zeta, double strip_base) {
    if (zeta == Complex(0.0, 0.0))
        throw std::domain_error("lift: point must be nonzero");
    if (!std::isfinite(strip_base))
        throw std::invalid_argument("lift: strip_base must be finite");
    double theta = std::arg(zeta); // (-pi, pi]
    double k = std::floor((theta - strip_base) / TWO_PI);
    theta -= k * TWO_PI;
    // guard rounding at the upper strip edge
    if (theta >= strip_base + TWO_PI) theta -= TWO_PI;
    if (theta < strip_base) theta += TWO_PI;
    return Complex(std::log(std::abs(zeta)), theta);
}

void validate(const SurfaceModel& surface) {
    if (surface.ends.empty())
        throw std::invalid_argument("surface: ends list must be nonempty");
    for (const auto& end : surface.ends) {
        if (!(end.scale > 0.0))
            throw std::invalid_argument("surface: end scale must be positive");
        if (!(end.chart_inner_radius > 0.0))
            throw std::invalid_argument("surface: chart inner radius must be positive");
    }
}

}  // namespace flatlab
