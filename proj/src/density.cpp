#include "flatlab/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "flatlab/divisors.hpp"
#include "flatlab/errors.hpp"

namespace flatlab {

namespace {

void check_ladder(const std::vector<double>& ladder) {
    if (ladder.empty()) throw std::invalid_argument("density: empty radius ladder");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 1.0))
            throw std::invalid_argument("density: ladder radii must exceed 1");
        if (i && !(ladder[i] > ladder[i - 1]))
            throw std::invalid_argument("density: ladder must be strictly increasing");
    }
}

bool admissible(Complex z, double r, const Rectangle& window,
                double excluded_radius) {
    if (!window.contains_disk(z, r)) return false;
    if (excluded_radius > 0.0 && std::abs(z) - r < excluded_radius) return false;
    return true;
}

}  // namespace

std::vector<Complex> CenterSampler::generate(const PointSequence& gamma) const {
    std::vector<Complex> centers;
    switch (kind) {
        case Kind::Explicit:
            centers = explicit_centers;
            break;
        case Kind::FundamentalCell:
        case Kind::GridPlusJitter: {
            if (!cell.valid() || !(step > 0.0))
                throw std::invalid_argument("center sampler: empty grid");
            for (double y = cell.y0; y <= cell.y1 + 1e-12; y += step)
                for (double x = cell.x0; x <= cell.x1 + 1e-12; x += step)
                    centers.emplace_back(x, y);
            if (kind == Kind::GridPlusJitter) {
                std::mt19937_64 rng(seed);
                std::uniform_real_distribution<double> u(-1.0, 1.0);
                for (const Complex& p : gamma.points)
                    for (int k = 0; k < jitter_per_point; ++k)
                        centers.push_back(
                            p + jitter_radius * Complex(u(rng), u(rng)));
            }
            break;
        }
    }
    if (centers.empty())
        throw std::invalid_argument("center sampler: no centers generated");
    return centers;
}

CenterSampler cell_sampler(const Rectangle& cell, double step) {
    CenterSampler s;
    s.kind = CenterSampler::Kind::FundamentalCell;
    s.cell = cell;
    s.step = step;
    return s;
}

CenterSampler jitter_sampler(const Rectangle& window, double step,
                             int jitter_per_point, double jitter_radius,
                             std::uint64_t seed) {
    CenterSampler s;
    s.kind = CenterSampler::Kind::GridPlusJitter;
    s.cell = window;
    s.step = step;
    s.jitter_per_point = jitter_per_point;
    s.jitter_radius = jitter_radius;
    s.seed = seed;
    return s;
}

CenterSampler explicit_sampler(std::vector<Complex> centers) {
    CenterSampler s;
    s.kind = CenterSampler::Kind::Explicit;
    s.explicit_centers = std::move(centers);
    return s;
}

namespace {

// Denominator of the ratio: closed form for constant-density weights,
// quadrature otherwise.
double denominator(const Weight& w, Complex z, double r, double rel_tol) {
    double c;
    double den;
    if (w.constant_laplacian_density(&c))
        den = c * M_PI * r * r;
    else
        den = kernel_laplacian_mass(w, z, r, rel_tol);
    if (!(den > 0.0))
        throw NumericError("kernel_laplacian_mass",
                           "nonpositive kernel-weighted Laplacian mass (weight "
                           "flat in the disk)");
    return den;
}

}  // namespace

double ratio_at(const PointSequence& gamma, const Weight& w, Complex z, double r,
                double rel_tol) {
    double num = 2.0 * M_PI * upsilon_mass(gamma, z, r);
    return num / denominator(w, z, r, rel_tol);
}

std::vector<double> density_ratio_field(const PointSequence& gamma,
                                        const Weight& w,
                                        const std::vector<Complex>& centers,
                                        double r, const Rectangle& window,
                                        double excluded_radius, Exec exec) {
    std::vector<double> out(centers.size(),
                            std::numeric_limits<double>::quiet_NaN());
    // constant-density denominators hoisted; per-center quadrature otherwise
    double cden = 0.0;
    bool constant = w.constant_laplacian_density(&cden);
    if (constant && !(cden > 0.0))
        throw NumericError("kernel_laplacian_mass",
                           "nonpositive kernel-weighted Laplacian mass (weight "
                           "flat in the disk)");
    for_each_index(centers.size(), exec, [&](std::size_t i) {
        Complex z = centers[i];
        if (!admissible(z, r, window, excluded_radius)) return;
        double num = 2.0 * M_PI * upsilon_mass(gamma, z, r);
        double den = constant ? cden * M_PI * r * r
                              : denominator(w, z, r, 1e-8);
        out[i] = num / den;
    });
    return out;
}

DensityReport upper_density_euclidean(const PointSequence& gamma, WeightPtr w,
                                      const std::vector<double>& ladder,
                                      const CenterSampler& sampler,
                                      const Rectangle& window,
                                      double excluded_radius, Exec exec) {
    if (!w) throw std::invalid_argument("upper_density_euclidean: null weight");
    check_ladder(ladder);
    std::vector<Complex> centers = sampler.generate(gamma);

    DensityReport report;
    report.ladder = ladder;

    for (Complex z : centers) {
        bool flagged = false;
        for (const Complex& p : gamma.points)
            if (std::abs(p - z) <= 1.0) flagged = true;
        if (flagged) report.centers_flagged.push_back(z);
    }

    for (double r : ladder) {
        std::vector<double> field =
            density_ratio_field(gamma, *w, centers, r, window, excluded_radius, exec);
        RadiusEntry entry;
        entry.r = r;
        double sup = -1.0;
        for (std::size_t i = 0; i < centers.size(); ++i) {
            if (std::isnan(field[i])) {
                ++entry.skipped;
                continue;
            }
            ++entry.admissible;
            report.samples.emplace_back(r, centers[i], field[i]);
            if (field[i] > sup) {
                sup = field[i];
                entry.argmax_center = centers[i];
            }
        }
        if (r == ladder.back() && entry.admissible == 0)
            throw std::invalid_argument(
                "upper_density_euclidean: window too small for largest ladder radius");
        entry.sup_ratio = std::max(sup, 0.0);
        report.per_radius.push_back(entry);
    }
    report.extrapolated = report.per_radius.back().sup_ratio;
    return report;
}

DensityReport cover_density(const PointSequence& gamma, WeightPtr w,
                            const std::vector<double>& ladder,
                            const CenterSampler& sampler,
                            const Rectangle& lift_window, Exec exec) {
    if (gamma.ambient.kind == Ambient::Kind::Plane)
        throw std::invalid_argument("cover_density: sequence must be on the punctured plane");
    if (!w) throw std::invalid_argument("cover_density: null weight");
    PointSequence lifted = lift_sequence(gamma, lift_window);
    WeightPtr pulled = cover_pullback(std::move(w));
    return upper_density_euclidean(lifted, std::move(pulled), ladder, sampler,
                                   lift_window, 0.0, exec);
}

DensityReport surface_density(const SurfaceModel& surface,
                              const std::vector<EndData>& ends,
                              const std::vector<double>& ladder, Exec exec) {
    validate(surface);
    check_ladder(ladder);
    if (ends.size() != surface.ends.size())
        throw std::invalid_argument("surface_density: one data entry per end required");

    DensityReport report;
    report.ladder = ladder;
    for (double r : ladder) report.per_radius.push_back({r, 0.0, {0, 0}, 0, 0});

    for (std::size_t e = 0; e < ends.size(); ++e) {
        const EndDescriptor& desc = surface.ends[e];
        const EndData& data = ends[e];
        double factor = std::sqrt(desc.scale);

        DensityReport sub;
        if (data.gamma.size() == 0) {
            sub.ladder = ladder;
            for (double r : ladder) sub.per_radius.push_back({r, 0.0, {0, 0}, 0, 0});
            sub.extrapolated = 0.0;
        } else if (desc.kind == EndKind::Euclidean) {
            std::vector<Complex> scaled_pts;
            for (const Complex& p : data.gamma.points) scaled_pts.push_back(factor * p);
            PointSequence scaled(std::move(scaled_pts), Ambient::plane());
            WeightPtr weight = factor == 1.0
                                   ? data.weight
                                   : dilated_weight(data.weight, factor);
            Rectangle win{factor * data.window.x0, factor * data.window.x1,
                          factor * data.window.y0, factor * data.window.y1};
            CenterSampler sampler = data.sampler;
            sampler.cell = Rectangle{factor * sampler.cell.x0, factor * sampler.cell.x1,
                                     factor * sampler.cell.y0, factor * sampler.cell.y1};
            double core = factor * desc.chart_inner_radius;
            sub = upper_density_euclidean(scaled, weight, ladder, sampler, win,
                                          core, exec);
        } else {
            // Cylindrical end: lift to the cover, scale there; the chart inner
            // boundary |zeta| > rho becomes the half plane Re z > log(rho).
            PointSequence lifted = lift_sequence(data.gamma, data.window);
            std::vector<Complex> scaled_pts;
            for (const Complex& p : lifted.points) scaled_pts.push_back(factor * p);
            PointSequence scaled(std::move(scaled_pts), Ambient::plane());
            WeightPtr pulled = cover_pullback(data.weight);
            if (factor != 1.0) pulled = dilated_weight(pulled, factor);
            Rectangle win{factor * data.window.x0, factor * data.window.x1,
                          factor * data.window.y0, factor * data.window.y1};
            win.x0 = std::max(win.x0, factor * std::log(desc.chart_inner_radius));
            CenterSampler sampler = data.sampler;
            sampler.cell = Rectangle{factor * sampler.cell.x0, factor * sampler.cell.x1,
                                     factor * sampler.cell.y0, factor * sampler.cell.y1};
            sub = upper_density_euclidean(scaled, pulled, ladder, sampler, win,
                                          0.0, exec);
        }

        for (std::size_t i = 0; i < ladder.size(); ++i) {
            if (sub.per_radius[i].sup_ratio > report.per_radius[i].sup_ratio) {
                report.per_radius[i].sup_ratio = sub.per_radius[i].sup_ratio;
                report.per_radius[i].argmax_center = sub.per_radius[i].argmax_center;
            }
            report.per_radius[i].admissible += sub.per_radius[i].admissible;
            report.per_radius[i].skipped += sub.per_radius[i].skipped;
        }
        report.end_reports.push_back(std::move(sub));
    }
    report.extrapolated = report.per_radius.back().sup_ratio;
    return report;
}

double raw_density(const PointSequence& gamma, const Weight& w, double r,
                   const CenterSampler& sampler, const Rectangle& window,
                   Exec exec) {
    if (!(r > 1.0)) throw std::invalid_argument("raw_density: need r > 1");
    std::vector<Complex> centers = sampler.generate(gamma);
    std::vector<double> vals(centers.size(),
                             std::numeric_limits<double>::quiet_NaN());
    for_each_index(centers.size(), exec, [&](std::size_t i) {
        Complex z = centers[i];
        if (!admissible(z, r, window, 0.0)) return;
        double lap = w.laplacian_density(z);
        if (!(lap > 0.0))
            throw NumericError("raw_density",
                               "zero Laplacian density at a sampled center");
        vals[i] = upsilon_mass(gamma, z, r) / (M_PI * r * r) / lap;
    });
    double sup = 0.0;
    bool any = false;
    for (double v : vals) {
        if (std::isnan(v)) continue;
        any = true;
        sup = std::max(sup, v);
    }
    if (!any)
        throw std::invalid_argument("raw_density: window too small for radius");
    return sup;
}

}  // namespace flatlab
