#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "flatlab/parallel.hpp"
#include "flatlab/sequences.hpp"
#include "flatlab/weights.hpp"

namespace flatlab {

// Deterministic center generator for the sup-over-centers sweeps.
struct CenterSampler {
    enum class Kind { FundamentalCell, GridPlusJitter, Explicit };
    Kind kind = Kind::FundamentalCell;

    // FundamentalCell / GridPlusJitter: grid over `cell` at `step`
    Rectangle cell;
    double step = 0.25;

    // GridPlusJitter: extra centers jittered near each point
    int jitter_per_point = 2;
    double jitter_radius = 0.5;
    std::uint64_t seed = 0;

    std::vector<Complex> explicit_centers;

    std::vector<Complex> generate(const PointSequence& gamma) const;
};

CenterSampler cell_sampler(const Rectangle& cell, double step);
CenterSampler jitter_sampler(const Rectangle& window, double step,
                             int jitter_per_point, double jitter_radius,
                             std::uint64_t seed);
CenterSampler explicit_sampler(std::vector<Complex> centers);

struct RadiusEntry {
    double r = 0.0;
    double sup_ratio = 0.0;
    Complex argmax_center{0.0, 0.0};
    std::size_t admissible = 0;
    std::size_t skipped = 0;
};

struct DensityReport {
    std::vector<RadiusEntry> per_radius;
    double extrapolated = 0.0;            // sup over the top ladder tier
    std::vector<double> ladder;
    std::vector<Complex> centers_flagged; // unit disk around center meets gamma
    std::vector<std::tuple<double, Complex, double>> samples; // (r, center, ratio)
    std::vector<DensityReport> end_reports; // surface runs only
};

// 2*pi*upsilon_mass / kernel-weighted Laplacian mass.  Constant-density
// weights use the closed-form denominator (density * pi r^2).
double ratio_at(const PointSequence& gamma, const Weight& w, Complex z, double r,
                double rel_tol = 1e-8);

// Ratio at every center, NaN where D_r(z) leaves the window or meets the
// excluded core disk |z| <= excluded_radius + r.  The parallel kernel.
std::vector<double> density_ratio_field(const PointSequence& gamma,
                                        const Weight& w,
                                        const std::vector<Complex>& centers,
                                        double r, const Rectangle& window,
                                        double excluded_radius = 0.0,
                                        Exec exec = Exec::OpenMP);

DensityReport upper_density_euclidean(const PointSequence& gamma, WeightPtr w,
                                      const std::vector<double>& ladder,
                                      const CenterSampler& sampler,
                                      const Rectangle& window,
                                      double excluded_radius = 0.0,
                                      Exec exec = Exec::OpenMP);

// Lift gamma into the cover window, pull the weight back through the cover,
// then run the Euclidean estimator there (centers: one period strip).
DensityReport cover_density(const PointSequence& gamma, WeightPtr w,
                            const std::vector<double>& ladder,
                            const CenterSampler& sampler,
                            const Rectangle& lift_window,
                            Exec exec = Exec::OpenMP);

struct EndData {
    PointSequence gamma;  // chart coordinates (cover coordinates stay internal)
    WeightPtr weight;
    Rectangle window;     // data window; for cylindrical ends: cover window
    CenterSampler sampler;
};

// Max over ends; per-end sub-reports kept.  End scale acts as the coordinate
// dilation by sqrt(scale) before any kernel evaluation.
DensityReport surface_density(const SurfaceModel& surface,
                              const std::vector<EndData>& ends,
                              const std::vector<double>& ladder,
                              Exec exec = Exec::OpenMP);

// sup over centers of (upsilon_mass/(pi r^2)) / pointwise Laplacian density.
double raw_density(const PointSequence& gamma, const Weight& w, double r,
                   const CenterSampler& sampler, const Rectangle& window,
                   Exec exec = Exec::OpenMP);

}  // namespace flatlab
