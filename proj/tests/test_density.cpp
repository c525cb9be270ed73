#include <cmath>

#include "doctest.h"
#include "flatlab/density.hpp"
#include "flatlab/divisors.hpp"
#include "flatlab/errors.hpp"

using namespace flatlab;
using doctest::Approx;

TEST_CASE("center samplers") {
    PointSequence g = lattice(2.0, {-4.0, 4.0, -4.0, 4.0});

    CenterSampler cell = cell_sampler({0.0, 2.0, 0.0, 2.0}, 1.0);
    CHECK(cell.generate(g).size() == 9);

    CenterSampler jit = jitter_sampler({0.0, 2.0, 0.0, 2.0}, 1.0, 2, 0.3, 7);
    CHECK(jit.generate(g).size() == 9 + 2 * g.size());
    // same seed, same centers
    const auto a = jit.generate(g), b = jit.generate(g);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    CenterSampler ex = explicit_sampler({{1, 1}, {2, 2}});
    CHECK(ex.generate(g).size() == 2);

    CenterSampler bad = cell_sampler({1.0, 0.0, 0.0, 1.0}, 1.0);
    CHECK_THROWS_AS(bad.generate(g), std::invalid_argument);
}

TEST_CASE("ratio at a center matches its two ingredients") {
    PointSequence g = lattice(2.0, {-20.0, 20.0, -20.0, 20.0});
    WeightPtr w = quadratic_weight(0.5); // unit laplacian density
    const Complex z(0.3, -0.7);
    const double r = 8.0;
    const double expect =
        2.0 * M_PI * upsilon_mass(g, z, r) / (1.0 * M_PI * r * r);
    CHECK(ratio_at(g, *w, z, r) == Approx(expect).epsilon(1e-13));
}

TEST_CASE("lattice ratio approaches 2 pi / s^2 for the unit-density weight") {
    const double s = 2.0;
    PointSequence g = lattice(s, {-30.0, 30.0, -30.0, 30.0});
    WeightPtr w = quadratic_weight(0.5);
    const double r = 12.0;
    // finite-r bias: the unit inner disk and the kernel taper shave a few
    // percent off the limit 2 pi / s^2
    CHECK(ratio_at(g, *w, {0, 0}, r) ==
          Approx(TWO_PI / (s * s)).epsilon(0.06));
}

TEST_CASE("ratio field marks inadmissible centers NaN") {
    PointSequence g = lattice(2.0, {-10.0, 10.0, -10.0, 10.0});
    WeightPtr w = quadratic_weight(0.5);
    const Rectangle window{-10.0, 10.0, -10.0, 10.0};
    const std::vector<Complex> centers{{0, 0}, {9.5, 0}, {3, 3}};
    const std::vector<double> field =
        density_ratio_field(g, *w, centers, 4.0, window);
    CHECK(std::isfinite(field[0]));
    CHECK(std::isnan(field[1])); // disk leaves the window
    CHECK(std::isfinite(field[2]));

    // excluded core: the sampling disk may not reach into |z| <= core
    const std::vector<double> cored =
        density_ratio_field(g, *w, centers, 4.0, window, 1.0);
    CHECK(std::isnan(cored[0]));
    CHECK(std::isnan(cored[2])); // |3+3i| - 4 < 1
}

TEST_CASE("ratio field lanes agree bitwise") {
    PointSequence g = lattice(1.5, {-12.0, 12.0, -12.0, 12.0});
    WeightPtr w = radial_poly_weight({0.0, 0.5, 0.01}); // non-constant density
    std::vector<Complex> centers;
    for (double x = -3.0; x <= 3.0; x += 1.0) centers.emplace_back(x, 0.5);
    const Rectangle window{-12.0, 12.0, -12.0, 12.0};
    const auto par = density_ratio_field(g, *w, centers, 5.0, window, 0.0,
                                         Exec::OpenMP);
    const auto ser = density_ratio_field(g, *w, centers, 5.0, window, 0.0,
                                         Exec::Serial);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (std::isnan(ser[i]))
            CHECK(std::isnan(par[i]));
        else
            CHECK(par[i] == ser[i]);
    }
}

TEST_CASE("euclidean density report") {
    const double s = 2.0;
    PointSequence g = lattice(s, {-30.0, 30.0, -30.0, 30.0});
    WeightPtr w = quadratic_weight(0.5);
    DensityReport rep = upper_density_euclidean(
        g, w, {6.0, 12.0}, cell_sampler({0.0, s, 0.0, s}, s / 2.0),
        {-30.0, 30.0, -30.0, 30.0});
    REQUIRE(rep.per_radius.size() == 2);
    CHECK(rep.per_radius[0].r == 6.0);
    CHECK(rep.per_radius[1].admissible > 0);
    CHECK(rep.extrapolated == rep.per_radius[1].sup_ratio);
    CHECK(rep.extrapolated == Approx(TWO_PI / (s * s)).epsilon(0.08));
    // every sampler center sits within 1 of some lattice point here
    CHECK(!rep.centers_flagged.empty());
    CHECK(!rep.samples.empty());

    CHECK_THROWS_AS(upper_density_euclidean(g, w, {}, cell_sampler({0, 1, 0, 1}, 1),
                                            {-30, 30, -30, 30}),
                    std::invalid_argument);
    CHECK_THROWS_AS(upper_density_euclidean(g, w, {6.0, 6.0},
                                            cell_sampler({0, 1, 0, 1}, 1),
                                            {-30, 30, -30, 30}),
                    std::invalid_argument);
    CHECK_THROWS_AS(upper_density_euclidean(g, nullptr, {6.0},
                                            cell_sampler({0, 1, 0, 1}, 1),
                                            {-30, 30, -30, 30}),
                    std::invalid_argument);
    // window that can't fit the top ladder radius anywhere
    CHECK_THROWS_AS(upper_density_euclidean(g, w, {6.0},
                                            cell_sampler({0, 1, 0, 1}, 1),
                                            {-4, 4, -4, 4}),
                    std::invalid_argument);
}

TEST_CASE("flat weight makes the ratio denominator fail loudly") {
    PointSequence g = lattice(2.0, {-10.0, 10.0, -10.0, 10.0});
    WeightPtr flat = radial_poly_weight({1.0}); // constant phi: zero curvature
    try {
        ratio_at(g, *flat, {0, 0}, 4.0);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(e.operation() == "kernel_laplacian_mass");
    }
}

TEST_CASE("cover density of the exponential lattice") {
    // s divides 2 pi, so the lift of exp_lattice is exactly the s-lattice and
    // the pulled-back weight has constant density a = 1; the plateau is
    // 2 pi / s^2
    const double s = TWO_PI / 8.0;
    PointSequence g = exp_lattice(s, {-24.0, 24.0, -4.0, 4.0});
    WeightPtr w = log_squared_weight(1.0);
    DensityReport rep =
        cover_density(g, w, {6.0, 12.0}, cell_sampler({0.0, s, 0.0, s}, s / 2.0),
                      {-24.0, 24.0, -24.0, 24.0});
    CHECK(rep.extrapolated == Approx(TWO_PI / (s * s)).epsilon(0.08));

    PointSequence planar = lattice(1.0, {-2, 2, -2, 2});
    CHECK_THROWS_AS(cover_density(planar, w, {5.0},
                                  cell_sampler({0, 1, 0, 1}, 0.5),
                                  {-24, 24, -24, 24}),
                    std::invalid_argument);
}

TEST_CASE("surface density: a scale-1 euclidean end is the flat estimator") {
    const double s = 2.0;
    PointSequence g = lattice(s, {-30.0, 30.0, -30.0, 30.0});
    WeightPtr w = quadratic_weight(0.5);
    const Rectangle window{-30.0, 30.0, -30.0, 30.0};
    // centers on a ring outside the excluded core at the top radius
    const CenterSampler sampler = cell_sampler({14.0, 16.0, 0.0, 2.0}, 1.0);
    const std::vector<double> ladder{6.0, 12.0};
    const double core = 1.0;

    SurfaceModel surf;
    surf.ends.push_back({EndKind::Euclidean, 1.0, core});
    surf.core_label = "test-core";
    EndData end;
    end.gamma = PointSequence(g.points, Ambient::surface_end(0));
    end.weight = w;
    end.window = window;
    end.sampler = sampler;

    DensityReport direct =
        upper_density_euclidean(g, w, ladder, sampler, window, core);
    DensityReport via_surface = surface_density(surf, {end}, ladder);
    REQUIRE(via_surface.end_reports.size() == 1);
    CHECK(via_surface.extrapolated == direct.extrapolated);
    CHECK(via_surface.end_reports[0].per_radius[0].sup_ratio ==
          direct.per_radius[0].sup_ratio);

    // the overall figure is the max over ends
    SurfaceModel two = surf;
    two.ends.push_back({EndKind::Euclidean, 1.0, core});
    EndData sparse = end;
    sparse.gamma = PointSequence(lattice(2.0 * s, window).points,
                                 Ambient::surface_end(1));
    DensityReport both = surface_density(two, {end, sparse}, ladder);
    REQUIRE(both.end_reports.size() == 2);
    CHECK(both.extrapolated ==
          std::max(both.end_reports[0].extrapolated,
                   both.end_reports[1].extrapolated));

    CHECK_THROWS_AS(surface_density(two, {end}, ladder), std::invalid_argument);
}

TEST_CASE("surface density: a scale-1 cylindrical end is the cover estimator") {
    const double s = TWO_PI / 8.0;
    PointSequence g = exp_lattice(s, {-24.0, 24.0, -4.0, 4.0});
    WeightPtr w = log_squared_weight(1.0);
    const Rectangle window{-24.0, 24.0, -24.0, 24.0};
    const CenterSampler sampler = cell_sampler({0.0, s, 0.0, s}, s / 2.0);
    const std::vector<double> ladder{5.0, 10.0};

    SurfaceModel surf;
    // chart inner radius small enough that the lifted half-plane clamp
    // log(rho) <= window.x0 is inactive
    surf.ends.push_back({EndKind::Cylindrical, 1.0, 1e-14});
    EndData end;
    end.gamma = PointSequence(g.points, Ambient::surface_end(0));
    end.weight = w;
    end.window = window;
    end.sampler = sampler;

    DensityReport direct = cover_density(g, w, ladder, sampler, window);
    DensityReport via_surface = surface_density(surf, {end}, ladder);
    CHECK(via_surface.extrapolated == direct.extrapolated);
}

TEST_CASE("end scale is a pure coordinate dilation") {
    // scale 4 stretches chart data by 2; feeding compensated data (half the
    // spacing, weight value phi(z) = 2|z|^2, half the cell and inner radius)
    // must land on exactly the scale-1 picture
    const std::vector<double> ladder{8.0};

    SurfaceModel baseline;
    baseline.ends.push_back({EndKind::Euclidean, 1.0, 1e-9});
    EndData base_data;
    base_data.gamma = PointSequence(lattice(2.0, {-40.0, 40.0, -40.0, 40.0}).points,
                                    Ambient::surface_end(0));
    base_data.weight = quadratic_weight(0.5);
    base_data.window = {-40.0, 40.0, -40.0, 40.0};
    base_data.sampler = cell_sampler({8.5, 10.5, 0.0, 2.0}, 1.0);

    SurfaceModel scaled;
    scaled.ends.push_back({EndKind::Euclidean, 4.0, 0.5e-9});
    EndData half_data;
    half_data.gamma = PointSequence(lattice(1.0, {-20.0, 20.0, -20.0, 20.0}).points,
                                    Ambient::surface_end(0));
    half_data.weight = quadratic_weight(2.0); // dilation by 2 gives 0.5|z|^2
    half_data.window = {-20.0, 20.0, -20.0, 20.0};
    half_data.sampler = cell_sampler({4.25, 5.25, 0.0, 1.0}, 1.0);

    DensityReport a = surface_density(baseline, {base_data}, ladder);
    DensityReport b = surface_density(scaled, {half_data}, ladder);
    CHECK(b.extrapolated == Approx(a.extrapolated).epsilon(1e-12));
}

TEST_CASE("raw density variant") {
    const double s = 2.0;
    PointSequence g = lattice(s, {-30.0, 30.0, -30.0, 30.0});
    WeightPtr w = quadratic_weight(0.5);
    const double v = raw_density(g, *w, 10.0, cell_sampler({0.0, s, 0.0, s}, s),
                                 {-30.0, 30.0, -30.0, 30.0});
    // upsilon/(pi r^2) over the pointwise density: plateau 1/s^2, kernel taper
    // takes a few percent
    CHECK(v == Approx(1.0 / (s * s)).epsilon(0.12));
    CHECK_THROWS_AS(raw_density(g, *w, 10.0, cell_sampler({0, s, 0, s}, s),
                                {-5.0, 5.0, -5.0, 5.0}),
                    std::invalid_argument);

    WeightPtr flat = radial_poly_weight({1.0});
    CHECK_THROWS_AS(raw_density(g, *flat, 10.0, cell_sampler({0, s, 0, s}, s),
                                {-30.0, 30.0, -30.0, 30.0}),
                    NumericError);
}
