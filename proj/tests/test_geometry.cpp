#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "flatlab/geometry.hpp"

using namespace flatlab;
using doctest::Approx;

TEST_CASE("euclidean distance") {
    CHECK(euclidean_distance({0, 0}, {3, 4}) == Approx(5.0));
    CHECK(euclidean_distance({1, 1}, {1, 1}) == 0.0);
}

TEST_CASE("cylindrical distance splits into log modulus and angle") {
    // pure radial move: distance is the log of the modulus ratio
    CHECK(cylindrical_distance({1, 0}, {std::exp(1.0), 0}) == Approx(1.0));
    // pure angular move along the unit circle
    CHECK(cylindrical_distance({1, 0}, {0, 1}) == Approx(M_PI / 2));
    CHECK(cylindrical_distance({1, 0}, {-1, 0}) == Approx(M_PI)); // antipodal
    // the angle is reduced to the short way around
    const Complex a = std::polar(1.0, 0.1);
    const Complex b = std::polar(1.0, TWO_PI - 0.1);
    CHECK(cylindrical_distance(a, b) == Approx(0.2));
    // symmetric
    CHECK(cylindrical_distance(a, b) == cylindrical_distance(b, a));
}

TEST_CASE("cylindrical distance survives extreme scales") {
    // log arithmetic: the quotient 1e300/1e-300 would overflow
    const double d = cylindrical_distance({1e300, 0}, {1e-300, 0});
    CHECK(d == Approx(std::log(1e300) - std::log(1e-300)));
    CHECK_THROWS_AS(cylindrical_distance({0, 0}, {1, 0}), std::domain_error);
    CHECK_THROWS_AS(cylindrical_distance({1, 0}, {0, 0}), std::domain_error);
}

TEST_CASE("cover map and lift invert each other") {
    const Complex z(0.3, 2.0);
    CHECK(std::abs(lift(cover_map(z), -M_PI) - z) < 1e-12);
    // a deck translate projects to the same point and lifts back to the strip
    const Complex translated = z + Complex(0.0, TWO_PI);
    CHECK(std::abs(cover_map(translated) - cover_map(z)) < 1e-12 * std::abs(cover_map(z)));
    CHECK(std::abs(lift(cover_map(translated), -M_PI) - z) < 1e-12);
}

TEST_CASE("lift lands in the requested strip") {
    const Complex zeta(-0.4, 0.7);
    for (double base : {-M_PI, 0.0, 5.0, -20.0}) {
        const Complex l = lift(zeta, base);
        CHECK(l.imag() >= base);
        CHECK(l.imag() < base + TWO_PI);
        CHECK(std::abs(cover_map(l) - zeta) < 1e-12);
    }
    CHECK_THROWS_AS(lift({0, 0}, 0.0), std::domain_error);
    CHECK_THROWS_AS(lift({1, 0}, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("projection from the cover is distance-compatible") {
    // within one strip width the cover is isometric; beyond it the deck
    // translation can only shorten the projected distance
    const Complex z1(0.2, 0.5), z2(-0.3, 2.8);
    CHECK(cylindrical_distance(cover_map(z1), cover_map(z2)) ==
          Approx(std::abs(z1 - z2)));
    const Complex z3 = z2 + Complex(0.0, TWO_PI);
    CHECK(cylindrical_distance(cover_map(z1), cover_map(z3)) <=
          std::abs(z1 - z3) + 1e-12);
}

TEST_CASE("rectangle membership") {
    const Rectangle r{-1.0, 2.0, 0.0, 1.0};
    CHECK(r.valid());
    CHECK(r.contains({0, 0.5}));
    CHECK(r.contains({-1, 0}));   // closed boundary
    CHECK(!r.contains({2.1, 0.5}));
    CHECK(r.contains_disk({0.5, 0.5}, 0.5));
    CHECK(!r.contains_disk({0.5, 0.5}, 0.6)); // sticks out below
    CHECK(!Rectangle{1.0, 0.0, 0.0, 1.0}.valid());
}

TEST_CASE("surface validation") {
    SurfaceModel s;
    CHECK_THROWS_AS(validate(s), std::invalid_argument); // no ends
    s.ends.push_back({EndKind::Euclidean, 1.0, 1.0});
    CHECK_NOTHROW(validate(s));
    s.ends.push_back({EndKind::Cylindrical, 0.0, 1.0});
    CHECK_THROWS_AS(validate(s), std::invalid_argument); // zero scale
    s.ends.back().scale = 2.0;
    s.ends.back().chart_inner_radius = -1.0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);
}
