#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flatlab/geometry.hpp"
#include "flatlab/parallel.hpp"

namespace flatlab {

enum class WeightDomain { Plane, PuncturedPlane };

// Subharmonic weight phi with a pointwise Laplacian density.  The density is
// that of i*del*delbar(phi) against the Euclidean area element, so
// phi = |z|^2 has density 2.
class Weight {
public:
    virtual ~Weight() = default;

    virtual double value(Complex z) const = 0;
    virtual double laplacian_density(Complex z) const = 0;
    virtual WeightDomain domain() const = 0;

    // radially symmetric about the origin
    virtual bool radial() const { return false; }

    // density is one constant everywhere; value written through `out`
    virtual bool constant_laplacian_density(double* out = nullptr) const {
        (void)out;
        return false;
    }

    virtual std::string describe() const = 0;
};

using WeightPtr = std::shared_ptr<const Weight>;

WeightPtr quadratic_weight(double a);
WeightPtr log_squared_weight(double a);
WeightPtr radial_poly_weight(std::vector<double> coeffs); // sum c_k |z|^{2k}

struct GridSpec {
    double x0 = 0.0, y0 = 0.0;
    int nx = 0, ny = 0;
    double h = 0.0;
    std::vector<double> values; // row-major: values[j*nx + i] at (x0+i*h, y0+j*h)
};

WeightPtr grid_sampled_weight(GridSpec spec,
                              WeightDomain domain = WeightDomain::Plane);
GridSpec load_grid(const std::string& path);
void save_grid(const GridSpec& spec, const std::string& path);

// phi(e^z) on the cover; exact closed form when the base is LogSquared.
WeightPtr cover_pullback(WeightPtr base);

// phi(z / factor): the coordinate dilation absorbing a constant metric scale.
WeightPtr dilated_weight(WeightPtr base, double factor);

// phi + eps*|z - z0|^2
WeightPtr bumped_weight(WeightPtr base, Complex z0, double eps);

// Logarithmic average phi_r(z) = (1/(pi r^2)) int_{D_r(z)} log(r^2/|zeta-z|^2) phi dA.
double log_average(const Weight& w, Complex z, double r, double rel_tol = 1e-8,
                   Exec exec = Exec::OpenMP);

// Mean through the cover: lift zeta (strip base -pi), pull the weight back and
// take the logarithmic average there.  Branch-independent by periodicity.
double covered_mean(const Weight& w, Complex zeta, double r,
                    double rel_tol = 1e-8, Exec exec = Exec::OpenMP);

// int_{D_r(z)} log(r^2/|zeta-z|^2) * (Laplacian density) dA
double kernel_laplacian_mass(const Weight& w, Complex z, double r,
                             double rel_tol = 1e-8, Exec exec = Exec::OpenMP);

struct CurvatureBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// Extrema of the Laplacian density over a rectangular grid, measured against
// the model metric of the weight's ambient (cylinder weights via the cover).
CurvatureBounds curvature_bounds(const Weight& w, const Rectangle& region,
                                 double grid_step);

enum class AverageFlavor { LogAverage, CoveredMean };

// A weight together with an averaging radius; evaluable wherever the
// averaging disk stays inside the base domain.
struct AveragedWeight {
    WeightPtr base;
    double radius = 1.0;
    AverageFlavor flavor = AverageFlavor::LogAverage;

    double value(Complex z) const;
};

}  // namespace flatlab
