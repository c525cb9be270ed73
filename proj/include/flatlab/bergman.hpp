#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "flatlab/parallel.hpp"
#include "flatlab/sequences.hpp"
#include "flatlab/weights.hpp"

namespace flatlab {

struct DiskDomain {
    double R = 1.0;
};

// Cylinder sections: inner products carry the 1/|zeta|^2 area density.
struct AnnulusDomain {
    double rho = 0.5;
    double R = 2.0;
};

using SpaceDomain = std::variant<DiskDomain, AnnulusDomain>;

struct QuadratureSpec {
    int n_radial = 0;  // 0 = choose from N
    int n_angular = 0; // 0 = choose from N (non-radial weights only)
    double rel_tol = 1e-8;
};

struct GramDiagnostics {
    bool diagonal = false;
    // eigenvalue range of the diagonally scaled gram D^{-1/2} G D^{-1/2};
    // the raw diagonal spans many orders (n! growth), the scaled spectrum is
    // the meaningful conditioning measure
    double smallest_scaled_eigenvalue = 1.0;
    double largest_scaled_eigenvalue = 1.0;
    double log_diag_min = 0.0;
    double log_diag_max = 0.0;
};

// Finite section of a weighted Bergman space: monomials z^n (disk, 0..N) or
// Laurent elements (annulus, -N..N), orthonormalized against the weighted
// area measure.
class TruncatedSpace {
public:
    const SpaceDomain& space_domain() const { return domain_; }
    const WeightPtr& weight() const { return weight_; }
    int max_degree() const { return N_; }
    int dim() const { return static_cast<int>(exponents_.size()); }
    const std::vector<int>& exponents() const { return exponents_; }
    const GramDiagnostics& gram_diagnostics() const { return gram_; }
    const QuadratureSpec& quadrature() const { return quad_; }

    bool contains(Complex z) const;

    // orthonormal basis evaluations e_k(z)
    std::vector<Complex> orthonormal_at(Complex z) const;

    // e_k(z) e^{-phi(z)/2}: rows of the normalized evaluation map
    std::vector<Complex> weighted_row(Complex z) const;

    friend TruncatedSpace build_space(const SpaceDomain& domain, WeightPtr w,
                                      int N, const QuadratureSpec& spec);

private:
    SpaceDomain domain_;
    WeightPtr weight_;
    int N_ = 0;
    QuadratureSpec quad_;
    std::vector<int> exponents_;
    bool diag_ = false;
    std::vector<double> log_diag_; // log G_jj per basis index
    std::vector<Complex> mixer_;   // column-major dim x dim; identity when diagonal
    GramDiagnostics gram_;
};

TruncatedSpace build_space(const SpaceDomain& domain, WeightPtr w, int N,
                           const QuadratureSpec& spec = {});

// Smallest R whose tail contribution to G_NN falls below ~1e-12 (radial
// weights; scan of the log integrand).
double suggest_disk_radius(const Weight& w, int N);

// K(z,z) = sum |e_k(z)|^2
double kernel_diag(const TruncatedSpace& S, Complex z);

struct KernelBounds {
    double min_value = 0.0;
    double max_value = 0.0;
};

// extrema of K(z,z)e^{-phi(z)} over the grid
KernelBounds kernel_bound_check(const TruncatedSpace& S,
                                const std::vector<Complex>& grid,
                                Exec exec = Exec::OpenMP);

struct InterpolationResult {
    std::vector<Complex> coefficients; // orthonormal coordinates
    double space_norm = 0.0;
    std::vector<Complex> achieved_values;
    double residual = 0.0; // max weighted deviation |f(gamma)-target| e^{-phi/2}
    double constant_estimate = 0.0;
};

struct EvaluationDiagnostics {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::optional<std::pair<std::size_t, std::size_t>> closest_pair;
    double closest_distance = 0.0;
};

// Least-norm interpolant through the weighted evaluation system.
InterpolationResult min_norm_interpolant(const TruncatedSpace& S,
                                         const PointSequence& gamma,
                                         const std::vector<Complex>& targets);

// 1 / sigma_min of the normalized evaluation map; 0 for empty gamma;
// +infinity on rank deficiency (diagnostics through the out parameter).
double interpolation_constant(const TruncatedSpace& S, const PointSequence& gamma,
                              EvaluationDiagnostics* diag = nullptr);

// sigma_max of the normalized evaluation map; 0 for empty gamma.
double restriction_norm(const TruncatedSpace& S, const PointSequence& gamma);

// Normalized kernel function at z: |f(z)|^2 e^{-phi(z)} = 1 with squared
// norm 1/(K(z,z)e^{-phi(z)}).
InterpolationResult one_point_interpolant(const TruncatedSpace& S, Complex z);

struct JiggleOutcome {
    double constant_before = 0.0;
    double constant_after = 0.0;
};

// Interpolation constants before/after a pointwise shift bounded by delta^2.
JiggleOutcome jiggle_experiment(const TruncatedSpace& S,
                                const PointSequence& gamma,
                                const std::vector<Complex>& offsets,
                                double delta);

// Constant of gamma + {z} in the space rebuilt with phi + eps|zeta - z|^2.
double add_point_experiment(const TruncatedSpace& S, const PointSequence& gamma,
                            Complex z, double eps);

}  // namespace flatlab
