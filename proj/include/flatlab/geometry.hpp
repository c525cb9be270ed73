#pragma once

#include <complex>
#include <string>
#include <vector>

namespace flatlab {

using Complex = std::complex<double>;

inline constexpr double TWO_PI = 6.283185307179586476925286766559;

enum class EndKind { Euclidean, Cylindrical };

// One end of a finitely connected flat surface.  The chart identifies a
// neighborhood of the end with the complement of a disk (Euclidean end) or
// with a punctured-plane end carrying the cylinder metric; `scale` is the
// constant conformal factor of the model metric on that chart.
struct EndDescriptor {
    EndKind kind = EndKind::Euclidean;
    double scale = 1.0;              // > 0
    double chart_inner_radius = 1.0; // chart covers |zeta| > chart_inner_radius
};

struct SurfaceModel {
    std::vector<EndDescriptor> ends; // nonempty
    std::string core_label;
};

// Axis-aligned closed rectangle [x0,x1] x [y0,y1].
struct Rectangle {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

    bool valid() const { return x0 <= x1 && y0 <= y1; }
    bool contains(Complex z) const {
        return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 &&
               z.imag() <= y1;
    }
    // whole closed disk D_r(z) inside the rectangle
    bool contains_disk(Complex z, double r) const {
        return z.real() - r >= x0 && z.real() + r <= x1 && z.imag() - r >= y0 &&
               z.imag() + r <= y1;
    }
};

double euclidean_distance(Complex p, Complex q);

// Distance on the flat cylinder C^*: sqrt(log^2|p/q| + arg^2(p/q)) with the
// angle reduced to [0, pi].  Both points must be nonzero.
double cylindrical_distance(Complex p, Complex q);

// Universal covering map of the cylinder, z -> e^z.
Complex cover_map(Complex z);

// Log lift with imaginary part in [strip_base, strip_base + 2*pi).
Complex lift(Complex zeta, double strip_base);

void validate(const SurfaceModel& surface);

}  // namespace flatlab
