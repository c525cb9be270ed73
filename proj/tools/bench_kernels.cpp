// Timing comparison of the parallel kernels against their serial lanes.
// Each kernel writes per-item slots, so the two lanes must agree bitwise;
// the table reports that check alongside the speedup.

#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "flatlab/bergman.hpp"
#include "flatlab/density.hpp"
#include "flatlab/divisors.hpp"
#include "flatlab/sequences.hpp"
#include "flatlab/weights.hpp"

using namespace flatlab;

namespace {

double now() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    return 0.0;
#endif
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool nan_a = std::isnan(a[i]), nan_b = std::isnan(b[i]);
        if (nan_a != nan_b) return std::nan("");
        if (!nan_a) m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

void row(const char* name, std::size_t items, double t_serial, double t_parallel,
         double diff) {
    std::printf("%-22s %8zu %10.3f %10.3f %8.2fx   %s\n", name, items, t_serial,
                t_parallel, t_parallel > 0 ? t_serial / t_parallel : 0.0,
                diff == 0.0 ? "identical" : "DIFFER");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif
    std::printf("%-22s %8s %10s %10s %9s\n", "kernel", "items", "serial_s",
                "parallel_s", "speedup");

    const Rectangle window{-14.0, 14.0, -14.0, 14.0};
    const PointSequence gamma = lattice(1.2, window);
    const WeightPtr w = quadratic_weight(1.0);

    {
        const CenterSampler sampler = cell_sampler(Rectangle{-6, 6, -6, 6}, 0.15);
        const std::vector<Complex> centers = sampler.generate(gamma);
        double t0 = now();
        const std::vector<double> serial =
            density_ratio_field(gamma, *w, centers, 6.0, window, 0.0, Exec::Serial);
        double t1 = now();
        const std::vector<double> parallel =
            density_ratio_field(gamma, *w, centers, 6.0, window, 0.0, Exec::OpenMP);
        double t2 = now();
        row("density_ratio_field", centers.size(), t1 - t0, t2 - t1,
            max_abs_diff(serial, parallel));
    }

    {
        const CenterSampler sampler = cell_sampler(Rectangle{-5, 5, -5, 5}, 0.05);
        const std::vector<Complex> centers = sampler.generate(gamma);
        double t0 = now();
        const std::vector<double> serial =
            sigma_field(gamma, centers, 5.0, Exec::Serial);
        double t1 = now();
        const std::vector<double> parallel =
            sigma_field(gamma, centers, 5.0, Exec::OpenMP);
        double t2 = now();
        row("sigma_field", centers.size(), t1 - t0, t2 - t1,
            max_abs_diff(serial, parallel));
    }

    {
        const TruncatedSpace S = build_space(DiskDomain{10.0}, w, 80);
        std::vector<Complex> grid;
        for (double y = -6.0; y <= 6.0; y += 0.05)
            for (double x = -6.0; x <= 6.0; x += 0.05) grid.emplace_back(x, y);
        double t0 = now();
        const KernelBounds serial = kernel_bound_check(S, grid, Exec::Serial);
        double t1 = now();
        const KernelBounds parallel = kernel_bound_check(S, grid, Exec::OpenMP);
        double t2 = now();
        row("kernel_bound_check", grid.size(), t1 - t0, t2 - t1,
            std::abs(serial.max_value - parallel.max_value) +
                std::abs(serial.min_value - parallel.min_value));
    }

    return 0;
}
