#include "flatlab/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flatlab {

namespace {

void validate(const std::vector<Complex>& pts, Ambient ambient) {
    for (const Complex& p : pts) {
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw std::invalid_argument("sequence: nonfinite point");
        if (ambient.kind == Ambient::Kind::PuncturedPlane && p == Complex(0.0, 0.0))
            throw std::invalid_argument("sequence: point at the puncture");
    }
    // duplicate scan via lexicographic sort; distances stay O(n^2) elsewhere
    std::vector<Complex> sorted = pts;
    std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] == sorted[i - 1])
            throw std::invalid_argument("sequence: duplicate point");
}

long ceil_index(double lo, double s) {
    long k = static_cast<long>(std::ceil(lo / s - 1e-12));
    return k;
}

long floor_index(double hi, double s) {
    long k = static_cast<long>(std::floor(hi / s + 1e-12));
    return k;
}

}  // namespace

PointSequence::PointSequence(std::vector<Complex> pts, Ambient amb)
    : points(std::move(pts)), ambient(amb) {
    validate(points, ambient);
}

PointSequence lattice(double s, const Rectangle& window, Ambient ambient) {
    if (!(s > 0.0)) throw std::invalid_argument("lattice: spacing must be positive");
    if (!window.valid()) throw std::invalid_argument("lattice: empty window");
    std::vector<Complex> pts;
    for (long n = ceil_index(window.y0, s); n <= floor_index(window.y1, s); ++n)
        for (long m = ceil_index(window.x0, s); m <= floor_index(window.x1, s); ++m)
            pts.emplace_back(s * double(m), s * double(n));
    if (ambient.kind == Ambient::Kind::PuncturedPlane)
        std::erase(pts, Complex(0.0, 0.0));
    return PointSequence(std::move(pts), ambient);
}

PointSequence exp_lattice(double s, const Rectangle& cover_window) {
    if (!(s > 0.0)) throw std::invalid_argument("exp_lattice: spacing must be positive");
    if (!cover_window.valid())
        throw std::invalid_argument("exp_lattice: empty window");
    std::vector<Complex> pts;
    for (long n = ceil_index(std::max(cover_window.y0, -M_PI), s);
         n <= floor_index(cover_window.y1, s); ++n) {
        double y = s * double(n);
        if (y < -M_PI || y >= M_PI) continue; // one period strip only
        for (long m = ceil_index(cover_window.x0, s);
             m <= floor_index(cover_window.x1, s); ++m)
            pts.push_back(std::exp(Complex(s * double(m), y)));
    }
    return PointSequence(std::move(pts), Ambient::punctured_plane());
}

SeparationReport separation_radius(const PointSequence& gamma, Metric metric) {
    if (metric == Metric::Cylindrical &&
        gamma.ambient.kind == Ambient::Kind::Plane)
        throw std::invalid_argument(
            "separation_radius: cylindrical metric on a plane sequence");
    SeparationReport report;
    if (gamma.size() < 2) {
        report.radius = std::numeric_limits<double>::infinity();
        return report;
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        for (std::size_t j = i + 1; j < gamma.size(); ++j) {
            double d = metric == Metric::Euclidean
                           ? euclidean_distance(gamma.points[i], gamma.points[j])
                           : cylindrical_distance(gamma.points[i], gamma.points[j]);
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    report.radius = 0.5 * best;
    report.witness_pair = std::make_pair(bi, bj);
    return report;
}

PointSequence lift_sequence(const PointSequence& gamma, const Rectangle& window) {
    if (gamma.ambient.kind == Ambient::Kind::Plane)
        throw std::invalid_argument("lift_sequence: sequence already on the plane");
    if (!window.valid()) throw std::invalid_argument("lift_sequence: empty window");
    std::vector<Complex> lifted;
    for (const Complex& p : gamma.points) {
        double x = std::log(std::abs(p));
        if (x < window.x0 - 1e-12 || x > window.x1 + 1e-12) continue;
        double theta = std::arg(p);
        // deck translates theta + 2*pi*k inside [y0, y1]
        long k_lo = static_cast<long>(std::ceil((window.y0 - theta) / TWO_PI - 1e-12));
        long k_hi = static_cast<long>(std::floor((window.y1 - theta) / TWO_PI + 1e-12));
        for (long k = k_lo; k <= k_hi; ++k)
            lifted.emplace_back(x, theta + TWO_PI * double(k));
    }
    return PointSequence(std::move(lifted), Ambient::plane());
}

PointSequence perturb(const PointSequence& gamma,
                      const std::vector<Complex>& offsets, double bound) {
    if (offsets.size() != gamma.size())
        throw std::invalid_argument("perturb: offsets count mismatch");
    if (bound < 0.0) throw std::invalid_argument("perturb: negative bound");
    for (const Complex& o : offsets)
        if (std::abs(o) > bound)
            throw std::invalid_argument("perturb: offset exceeds bound");
    std::vector<Complex> shifted(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i)
        shifted[i] = gamma.points[i] + offsets[i];
    return PointSequence(std::move(shifted), gamma.ambient);
}

PointSequence restrict_to_annulus(const PointSequence& gamma, Complex z, double r) {
    if (!(r > 1.0)) throw std::invalid_argument("restrict_to_annulus: need r > 1");
    std::vector<Complex> kept;
    for (const Complex& p : gamma.points) {
        double d = std::abs(p - z);
        if (d > 1.0 && d < r) kept.push_back(p);
    }
    return PointSequence(std::move(kept), gamma.ambient);
}

PointSequence load_sequence(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_sequence: cannot open " + path);
    std::string header;
    if (!std::getline(in, header))
        throw std::invalid_argument("load_sequence: missing header in " + path);
    std::istringstream hs(header);
    std::string tag;
    hs >> tag;
    Ambient ambient;
    if (tag == "plane") {
        ambient = Ambient::plane();
    } else if (tag == "punctured_plane") {
        ambient = Ambient::punctured_plane();
    } else if (tag == "end") {
        int idx;
        if (!(hs >> idx))
            throw std::invalid_argument("load_sequence: malformed end header in " + path);
        ambient = Ambient::surface_end(idx);
    } else {
        throw std::invalid_argument("load_sequence: unknown ambient '" + tag + "' in " + path);
    }
    std::vector<Complex> pts;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double re, im;
        if (!(ls >> re >> im))
            throw std::invalid_argument("load_sequence: bad point at " + path + ":" +
                                        std::to_string(line_no));
        pts.emplace_back(re, im);
    }
    return PointSequence(std::move(pts), ambient);
}

void save_sequence(const PointSequence& gamma, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("save_sequence: cannot open " + path);
    switch (gamma.ambient.kind) {
        case Ambient::Kind::Plane: out << "plane\n"; break;
        case Ambient::Kind::PuncturedPlane: out << "punctured_plane\n"; break;
        case Ambient::Kind::SurfaceEnd: out << "end " << gamma.ambient.end_index << "\n"; break;
    }
    out.precision(17);
    for (const Complex& p : gamma.points)
        out << p.real() << " " << p.imag() << "\n";
}

}  // namespace flatlab
