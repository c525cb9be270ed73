#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "flatlab/sequences.hpp"

using namespace flatlab;
using doctest::Approx;

TEST_CASE("lattice fills the window inclusively") {
    PointSequence g = lattice(1.0, {-2.0, 2.0, -1.0, 1.0});
    CHECK(g.size() == 15); // 5 x 3
    bool has_origin = false, has_corner = false;
    for (const Complex& p : g.points) {
        if (p == Complex(0, 0)) has_origin = true;
        if (p == Complex(2, 1)) has_corner = true;
    }
    CHECK(has_origin);
    CHECK(has_corner);

    // punctured ambient drops the origin
    PointSequence pg = lattice(1.0, {-2.0, 2.0, -1.0, 1.0},
                               Ambient::punctured_plane());
    CHECK(pg.size() == 14);

    CHECK_THROWS_AS(lattice(0.0, {-1, 1, -1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(lattice(1.0, {1, -1, 0, 1}), std::invalid_argument);
}

TEST_CASE("scaled lattice lands on multiples of s") {
    const double s = 0.75;
    PointSequence g = lattice(s, {-3.0, 3.0, -3.0, 3.0});
    for (const Complex& p : g.points) {
        CHECK(std::fabs(std::remainder(p.real(), s)) < 1e-12);
        CHECK(std::fabs(std::remainder(p.imag(), s)) < 1e-12);
    }
}

TEST_CASE("exponential lattice stays in one period strip") {
    const double s = TWO_PI / 4.0; // divides the period: 4 angular rays
    PointSequence g = exp_lattice(s, {-2.0, 2.0, -10.0, 10.0});
    CHECK(g.ambient == Ambient::punctured_plane());
    CHECK(!g.points.empty());
    int rays = 0;
    for (const Complex& p : g.points) {
        // moduli are e^{s m}
        const double x = std::log(std::abs(p));
        CHECK(std::fabs(std::remainder(x, s)) < 1e-12);
        if (std::abs(std::abs(p) - 1.0) < 1e-12) ++rays;
    }
    CHECK(rays == 4); // angles -pi, -pi/2, 0, pi/2 at modulus 1
}

TEST_CASE("separation radius") {
    PointSequence g = lattice(2.0, {-4.0, 4.0, -4.0, 4.0});
    SeparationReport rep = separation_radius(g, Metric::Euclidean);
    CHECK(rep.radius == Approx(1.0));
    REQUIRE(rep.witness_pair.has_value());
    const auto [i, j] = *rep.witness_pair;
    CHECK(std::abs(g.points[i] - g.points[j]) == Approx(2.0));

    PointSequence single({{1, 1}}, Ambient::plane());
    CHECK(std::isinf(separation_radius(single, Metric::Euclidean).radius));

    // cylinder metric needs a non-plane ambient
    CHECK_THROWS_AS(separation_radius(g, Metric::Cylindrical),
                    std::invalid_argument);
    PointSequence cyl({{1, 0}, {0, 1}}, Ambient::punctured_plane());
    CHECK(separation_radius(cyl, Metric::Cylindrical).radius ==
          Approx(M_PI / 4.0));
}

TEST_CASE("lifting a cylinder sequence") {
    const double s = TWO_PI / 4.0;
    PointSequence g = exp_lattice(s, {-2.0, 2.0, -10.0, 10.0});

    // one period strip: the lift is exactly the s-lattice intersected with it
    PointSequence one = lift_sequence(g, {-2.0, 2.0, -M_PI, M_PI - 1e-9});
    PointSequence ref = lattice(s, {-2.0, 2.0, -M_PI, M_PI - 1e-9});
    REQUIRE(one.size() == ref.size());

    // a doubled window picks up each deck translate once more
    PointSequence two =
        lift_sequence(g, {-2.0, 2.0, -M_PI, M_PI + TWO_PI - 1e-9});
    CHECK(two.size() == 2 * one.size());
    CHECK(two.ambient == Ambient::plane());

    CHECK_THROWS_AS(lift_sequence(ref, {-1, 1, -1, 1}), std::invalid_argument);
}

TEST_CASE("perturb enforces the offset bound") {
    PointSequence g = lattice(1.0, {0.0, 2.0, 0.0, 0.0});
    std::vector<Complex> offsets(g.size(), Complex(0.05, 0.0));
    PointSequence moved = perturb(g, offsets, 0.1);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(moved.points[i] == g.points[i] + offsets[i]);

    offsets[0] = Complex(0.2, 0.0);
    CHECK_THROWS_AS(perturb(g, offsets, 0.1), std::invalid_argument);
    offsets.pop_back();
    CHECK_THROWS_AS(perturb(g, offsets, 1.0), std::invalid_argument);
}

TEST_CASE("annulus restriction keeps 1 < distance < r") {
    PointSequence g({{0.5, 0}, {1.5, 0}, {3.0, 0}, {5.0, 0}}, Ambient::plane());
    PointSequence kept = restrict_to_annulus(g, {0, 0}, 4.0);
    REQUIRE(kept.size() == 2);
    CHECK(kept.points[0] == Complex(1.5, 0));
    CHECK(kept.points[1] == Complex(3.0, 0));
    CHECK_THROWS_AS(restrict_to_annulus(g, {0, 0}, 1.0), std::invalid_argument);
}

TEST_CASE("sequence validation") {
    CHECK_THROWS_AS(PointSequence({{1, 0}, {1, 0}}, Ambient::plane()),
                    std::invalid_argument); // duplicate
    CHECK_THROWS_AS(PointSequence({{0, 0}}, Ambient::punctured_plane()),
                    std::invalid_argument); // at the puncture
    const double nan = std::nan("");
    CHECK_THROWS_AS(PointSequence({{nan, 0}}, Ambient::plane()),
                    std::invalid_argument);
}

TEST_CASE("sequence file round trip") {
    namespace fs = std::filesystem;
    const std::string path =
        (fs::temp_directory_path() / "flatlab_seq_test.txt").string();

    PointSequence g({{1.25, -0.5}, {0.0, 3.0}}, Ambient::surface_end(2));
    save_sequence(g, path);
    PointSequence back = load_sequence(path);
    CHECK(back.ambient == Ambient::surface_end(2));
    REQUIRE(back.size() == 2);
    CHECK(back.points[0] == g.points[0]);
    CHECK(back.points[1] == g.points[1]);

    // comments and blank lines are tolerated
    {
        std::ofstream out(path);
        out << "plane\n# a comment\n\n0.5 0.5\n";
    }
    CHECK(load_sequence(path).size() == 1);

    {
        std::ofstream out(path);
        out << "klein_bottle\n0 0\n";
    }
    CHECK_THROWS_AS(load_sequence(path), std::invalid_argument);
    {
        std::ofstream out(path);
        out << "plane\n0.5 not_a_number\n";
    }
    CHECK_THROWS_AS(load_sequence(path), std::invalid_argument);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_sequence("/nonexistent/seq.txt"), std::invalid_argument);
}
