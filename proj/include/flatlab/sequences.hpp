#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flatlab/geometry.hpp"

namespace flatlab {

// Where a point configuration lives.  SurfaceEnd carries the end index of a
// SurfaceModel; its points are expressed in that end's chart coordinates.
struct Ambient {
    enum class Kind { Plane, PuncturedPlane, SurfaceEnd };
    Kind kind = Kind::Plane;
    int end_index = 0; // meaningful for SurfaceEnd only

    static Ambient plane() { return {Kind::Plane, 0}; }
    static Ambient punctured_plane() { return {Kind::PuncturedPlane, 0}; }
    static Ambient surface_end(int k) { return {Kind::SurfaceEnd, k}; }

    bool operator==(const Ambient&) const = default;
};

// Finite window truncation of a closed discrete configuration.  Points are
// pairwise distinct; on the punctured plane none sits at the origin.
struct PointSequence {
    std::vector<Complex> points;
    Ambient ambient = Ambient::plane();

    PointSequence() = default;
    PointSequence(std::vector<Complex> pts, Ambient amb);

    std::size_t size() const { return points.size(); }
};

enum class Metric { Euclidean, Cylindrical };

struct SeparationReport {
    double radius = 0.0; // +infinity for fewer than 2 points
    std::optional<std::pair<std::size_t, std::size_t>> witness_pair;
};

// s*(Z + iZ) clipped to the window.
PointSequence lattice(double s, const Rectangle& window,
                      Ambient ambient = Ambient::plane());

// Exponentials of the s-lattice restricted to one period strip
// Im in [-pi, pi) of the cover window; a lattice generator for the cylinder.
PointSequence exp_lattice(double s, const Rectangle& cover_window);

// Half the minimum pairwise distance; +infinity below 2 points.
SeparationReport separation_radius(const PointSequence& gamma, Metric metric);

// All deck translates of log lifts landing in the window.
PointSequence lift_sequence(const PointSequence& gamma, const Rectangle& window);

// Pointwise shift by offsets (|offsets[i]| <= bound), pairing kept by index.
PointSequence perturb(const PointSequence& gamma,
                      const std::vector<Complex>& offsets, double bound);

// Points with 1 < |p - z| < r (annulus of inner radius 1).
PointSequence restrict_to_annulus(const PointSequence& gamma, Complex z, double r);

PointSequence load_sequence(const std::string& path);
void save_sequence(const PointSequence& gamma, const std::string& path);

}  // namespace flatlab
