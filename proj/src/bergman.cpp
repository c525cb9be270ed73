#include "flatlab/bergman.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "flatlab/errors.hpp"
#include "flatlab/quadrature.hpp"

namespace flatlab {

namespace {

constexpr double RANK_TOL = 1e-12;        // relative SVD cutoff
constexpr double GRAM_EIG_TOL = 1e-13;    // relative floor for the scaled gram
constexpr int GENERAL_PATH_MAX_N = 150;   // non-radial gram cost/overflow guard

double log_sum_exp(const std::vector<double>& terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - m);
    return m + std::log(acc);
}

struct DomainInfo {
    double r_lo = 0.0;
    double r_hi = 0.0;
    bool annulus = false;
};

DomainInfo domain_info(const SpaceDomain& d) {
    DomainInfo info;
    if (const auto* disk = std::get_if<DiskDomain>(&d)) {
        if (!(disk->R > 0.0))
            throw std::invalid_argument("disk truncation radius must be positive");
        info.r_hi = disk->R;
    } else {
        const auto& ann = std::get<AnnulusDomain>(d);
        if (!(ann.rho > 0.0) || !(ann.R > ann.rho))
            throw std::invalid_argument("annulus radii must satisfy 0 < rho < R");
        info.r_lo = ann.rho;
        info.r_hi = ann.R;
        info.annulus = true;
    }
    return info;
}

// radial jacobian of the area measure: rho for the disk, 1/rho on the
// annulus where inner products carry the extra 1/|zeta|^2
double log_jacobian(double rho, bool annulus) {
    return annulus ? -std::log(rho) : std::log(rho);
}

int pick_radial_nodes(const QuadratureSpec& spec, int N) {
    if (spec.n_radial > 0) return spec.n_radial;
    return std::max(128, 2 * N + 64);
}

int pick_angular_nodes(const QuadratureSpec& spec, int N) {
    if (spec.n_angular > 0) return spec.n_angular;
    return std::max(256, 4 * N + 64);
}

}  // namespace

bool TruncatedSpace::contains(Complex z) const {
    const DomainInfo info = domain_info(domain_);
    const double r = std::abs(z);
    const double tol = 1e-12 * std::max(1.0, info.r_hi);
    return r >= info.r_lo - tol && r <= info.r_hi + tol;
}

std::vector<Complex> TruncatedSpace::orthonormal_at(Complex z) const {
    const int d = dim();
    const double r = std::abs(z);
    const double arg = (r == 0.0) ? 0.0 : std::arg(z);
    const double logr = (r == 0.0) ? 0.0 : std::log(r);

    // scaled monomials z^{n_j} e^{-log G_jj / 2}
    std::vector<Complex> scaled(d);
    for (int j = 0; j < d; ++j) {
        const int n = exponents_[j];
        if (r == 0.0) {
            if (n < 0)
                throw std::domain_error("negative exponent evaluated at the origin");
            scaled[j] = (n == 0) ? Complex(std::exp(-0.5 * log_diag_[j]), 0.0)
                                 : Complex(0.0, 0.0);
            continue;
        }
        const double mag = n * logr - 0.5 * log_diag_[j];
        scaled[j] = std::polar(std::exp(mag), n * arg);
    }
    if (diag_) return scaled;

    std::vector<Complex> out(d, Complex(0.0, 0.0));
    for (int k = 0; k < d; ++k) {
        Complex acc(0.0, 0.0);
        const Complex* col = mixer_.data() + static_cast<std::size_t>(k) * d;
        for (int j = 0; j < d; ++j) acc += scaled[j] * col[j];
        out[k] = acc;
    }
    return out;
}

std::vector<Complex> TruncatedSpace::weighted_row(Complex z) const {
    const double phi = weight_->value(z);
    const int d = dim();
    const double r = std::abs(z);

    if (diag_) {
        // fold e^{-phi/2} into each log magnitude so huge monomials never form
        std::vector<Complex> row(d);
        const double arg = (r == 0.0) ? 0.0 : std::arg(z);
        const double logr = (r == 0.0) ? 0.0 : std::log(r);
        for (int j = 0; j < d; ++j) {
            const int n = exponents_[j];
            if (r == 0.0) {
                if (n < 0)
                    throw std::domain_error("negative exponent evaluated at the origin");
                row[j] = (n == 0)
                             ? Complex(std::exp(-0.5 * (phi + log_diag_[j])), 0.0)
                             : Complex(0.0, 0.0);
                continue;
            }
            const double mag = n * logr - 0.5 * phi - 0.5 * log_diag_[j];
            row[j] = std::polar(std::exp(mag), n * arg);
        }
        return row;
    }

    std::vector<Complex> row = orthonormal_at(z);
    const double damp = std::exp(-0.5 * phi);
    for (Complex& v : row) v *= damp;
    return row;
}

TruncatedSpace build_space(const SpaceDomain& domain, WeightPtr w, int N,
                           const QuadratureSpec& spec) {
    if (!w) throw std::invalid_argument("build_space: null weight");
    if (N < 0) throw std::invalid_argument("build_space: negative degree");
    const DomainInfo info = domain_info(domain);
    if (info.annulus && w->domain() != WeightDomain::PuncturedPlane)
        throw std::invalid_argument(
            "annulus sections require a weight defined away from the origin");
    if (!info.annulus && w->domain() == WeightDomain::PuncturedPlane)
        throw std::invalid_argument(
            "disk sections contain the origin; weight is singular there");

    TruncatedSpace S;
    S.domain_ = domain;
    S.weight_ = std::move(w);
    S.N_ = N;
    S.quad_ = spec;
    if (info.annulus) {
        for (int n = -N; n <= N; ++n) S.exponents_.push_back(n);
    } else {
        for (int n = 0; n <= N; ++n) S.exponents_.push_back(n);
    }
    const int d = S.dim();
    S.log_diag_.assign(d, 0.0);

    const int n_r = pick_radial_nodes(spec, N);
    const GLRule radial = gauss_legendre_on(info.r_lo, info.r_hi, n_r);

    if (S.weight_->radial()) {
        // Diagonal gram: G_nn = 2 pi * int r^{2n} e^{-phi(r)} jac(r) dr,
        // accumulated in log space so factorial-scale diagonals stay exact.
        S.diag_ = true;
        std::vector<double> log_node(n_r);
        for (int i = 0; i < n_r; ++i) {
            const double rho = radial.x[i];
            log_node[i] = std::log(radial.w[i]) + log_jacobian(rho, info.annulus) -
                          S.weight_->value(Complex(rho, 0.0));
        }
        const double log2pi = std::log(TWO_PI);
        std::vector<double> terms(n_r);
        for (int j = 0; j < d; ++j) {
            const int n = S.exponents_[j];
            for (int i = 0; i < n_r; ++i)
                terms[i] = log_node[i] + 2.0 * n * std::log(radial.x[i]);
            const double lg = log2pi + log_sum_exp(terms);
            if (!std::isfinite(lg))
                throw NumericError("build_space",
                                   "gram diagonal not finite at exponent " +
                                       std::to_string(n));
            S.log_diag_[j] = lg;
        }
        S.gram_.diagonal = true;
        S.gram_.smallest_scaled_eigenvalue = 1.0;
        S.gram_.largest_scaled_eigenvalue = 1.0;
        auto [lo, hi] = std::minmax_element(S.log_diag_.begin(), S.log_diag_.end());
        S.gram_.log_diag_min = *lo;
        S.gram_.log_diag_max = *hi;
        return S;
    }

    if (N > GENERAL_PATH_MAX_N)
        throw std::invalid_argument(
            "non-radial gram assembly supports degrees up to " +
            std::to_string(GENERAL_PATH_MAX_N));

    const int n_a = pick_angular_nodes(spec, N);
    const int m_max = S.exponents_.back() - S.exponents_.front();

    // weight samples on the polar grid, jacobian folded in
    std::vector<double> W(static_cast<std::size_t>(n_r) * n_a);
    std::vector<double> theta(n_a);
    for (int t = 0; t < n_a; ++t) theta[t] = TWO_PI * t / n_a;
    for_each_index(static_cast<std::size_t>(n_r), Exec::OpenMP, [&](std::size_t i) {
        const double rho = radial.x[i];
        const double jac = std::exp(log_jacobian(rho, info.annulus));
        for (int t = 0; t < n_a; ++t) {
            const Complex z = std::polar(rho, theta[t]);
            W[i * n_a + t] = std::exp(-S.weight_->value(z)) * jac;
        }
    });

    // angular harmonics A_m(rho_i) = (2 pi / n_a) sum_t e^{i m theta_t} W;
    // A_{-m} = conj(A_m) since W is real
    std::vector<std::vector<Complex>> A(static_cast<std::size_t>(m_max) + 1,
                                        std::vector<Complex>(n_r));
    for_each_index(static_cast<std::size_t>(m_max) + 1, Exec::OpenMP,
                   [&](std::size_t m) {
                       const double step = TWO_PI / n_a;
                       for (int i = 0; i < n_r; ++i) {
                           Complex acc(0.0, 0.0);
                           for (int t = 0; t < n_a; ++t)
                               acc += std::polar(W[static_cast<std::size_t>(i) * n_a + t],
                                                 static_cast<double>(m) * theta[t]);
                           A[m][i] = acc * step;
                       }
                   });
    for (int i = 0; i < n_r; ++i) {
        if (!(A[0][i].real() > 0.0))
            throw NumericError("build_space",
                               "angular mean of the weight vanished on a ring");
    }

    // diagonal first (log space), then the scaled gram entry by entry
    const double log2pi_correction = 0.0;  // A_m already carries the angular measure
    (void)log2pi_correction;
    std::vector<double> log_w(n_r), log_rho(n_r);
    for (int i = 0; i < n_r; ++i) {
        log_w[i] = std::log(radial.w[i]);
        log_rho[i] = std::log(radial.x[i]);
    }
    std::vector<double> terms(n_r);
    for (int j = 0; j < d; ++j) {
        const int n = S.exponents_[j];
        for (int i = 0; i < n_r; ++i)
            terms[i] = log_w[i] + 2.0 * n * log_rho[i] + std::log(A[0][i].real());
        const double lg = log_sum_exp(terms);
        if (!std::isfinite(lg))
            throw NumericError("build_space", "gram diagonal not finite at exponent " +
                                                  std::to_string(n));
        S.log_diag_[j] = lg;
    }

    Eigen::MatrixXcd scaled(d, d);
    for_each_index(static_cast<std::size_t>(d), Exec::OpenMP, [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int k = 0; k <= j; ++k) {
            const int m = S.exponents_[j] - S.exponents_[k];
            const double shift = 0.5 * (S.log_diag_[j] + S.log_diag_[k]);
            Complex acc(0.0, 0.0);
            for (int i = 0; i < n_r; ++i) {
                const double lmag =
                    log_w[i] + (S.exponents_[j] + S.exponents_[k]) * log_rho[i] - shift;
                acc += std::exp(lmag) * A[m][i];
            }
            scaled(j, k) = acc;
            scaled(k, j) = std::conj(acc);
        }
    });

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(scaled);
    if (es.info() != Eigen::Success)
        throw NumericError("build_space", "gram eigendecomposition failed");
    const Eigen::VectorXd evals = es.eigenvalues();
    const double lam_min = evals(0);
    const double lam_max = evals(d - 1);
    if (!(lam_max > 0.0) || lam_min <= GRAM_EIG_TOL * lam_max)
        throw NumericError(
            "build_space",
            "scaled gram nearly singular: eigenvalue ratio " +
                std::to_string(lam_min / std::max(lam_max, 1e-300)) +
                " at dimension " + std::to_string(d));

    // basis e_k = sum_j c_jk mu_j is orthonormal iff c^T S conj(c) = I,
    // which the conjugated eigenvectors satisfy; plain V orthonormalizes S^T
    Eigen::MatrixXcd mix = es.eigenvectors().conjugate();
    for (int k = 0; k < d; ++k) mix.col(k) /= std::sqrt(evals(k));
    S.mixer_.resize(static_cast<std::size_t>(d) * d);
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j)
            S.mixer_[static_cast<std::size_t>(k) * d + j] = mix(j, k);

    S.gram_.diagonal = false;
    S.gram_.smallest_scaled_eigenvalue = lam_min;
    S.gram_.largest_scaled_eigenvalue = lam_max;
    auto [lo, hi] = std::minmax_element(S.log_diag_.begin(), S.log_diag_.end());
    S.gram_.log_diag_min = *lo;
    S.gram_.log_diag_max = *hi;
    return S;
}

double suggest_disk_radius(const Weight& w, int N) {
    if (!w.radial())
        throw std::invalid_argument("suggest_disk_radius needs a radial weight");
    if (w.domain() != WeightDomain::Plane)
        throw std::invalid_argument("suggest_disk_radius works on plane weights");
    // log integrand of G_NN: (2N+1) log r - phi(r); walk out until it has
    // dropped 40 nats below its running maximum
    auto logf = [&](double r) { return (2.0 * N + 1.0) * std::log(r) - w.value(Complex(r, 0.0)); };
    const double step = 0.05;
    double best = -std::numeric_limits<double>::infinity();
    double r = step;
    for (int i = 0; i < 400000; ++i, r += step) {
        const double v = logf(r);
        best = std::max(best, v);
        if (v < best - 40.0 && best > -std::numeric_limits<double>::infinity())
            return r;
    }
    throw NumericError("suggest_disk_radius", "integrand never decayed");
}

namespace {

Ambient ambient_for(const SpaceDomain& d) {
    return std::holds_alternative<AnnulusDomain>(d) ? Ambient::punctured_plane()
                                                    : Ambient::plane();
}

void require_members(const TruncatedSpace& S, const PointSequence& gamma) {
    for (std::size_t i = 0; i < gamma.size(); ++i)
        if (!S.contains(gamma.points[i]))
            throw std::invalid_argument("point " + std::to_string(i) +
                                        " lies outside the section domain");
}

Eigen::MatrixXcd evaluation_matrix(const TruncatedSpace& S,
                                   const PointSequence& gamma) {
    const int d = S.dim();
    const std::size_t m = gamma.size();
    Eigen::MatrixXcd E(m, d);
    std::vector<std::vector<Complex>> rows(m);
    for_each_index(m, Exec::OpenMP,
                   [&](std::size_t i) { rows[i] = S.weighted_row(gamma.points[i]); });
    for (std::size_t i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) E(static_cast<Eigen::Index>(i), j) = rows[i][j];
    return E;
}

void fill_closest_pair(const PointSequence& gamma, EvaluationDiagnostics& diag) {
    if (gamma.size() < 2) return;
    const SeparationReport sep = separation_radius(gamma, Metric::Euclidean);
    diag.closest_pair = sep.witness_pair;
    diag.closest_distance = 2.0 * sep.radius;
}

}  // namespace

double kernel_diag(const TruncatedSpace& S, Complex z) {
    if (!S.contains(z))
        throw std::domain_error("kernel_diag: point outside the section domain");
    const std::vector<Complex> row = S.weighted_row(z);
    double acc = 0.0;
    for (const Complex& v : row) acc += std::norm(v);
    return acc * std::exp(S.weight()->value(z));
}

KernelBounds kernel_bound_check(const TruncatedSpace& S,
                                const std::vector<Complex>& grid, Exec exec) {
    if (grid.empty())
        throw std::invalid_argument("kernel_bound_check: empty grid");
    std::vector<double> vals(grid.size());
    for_each_index(grid.size(), exec, [&](std::size_t i) {
        if (!S.contains(grid[i]))
            throw std::domain_error("kernel_bound_check: grid point outside domain");
        const std::vector<Complex> row = S.weighted_row(grid[i]);
        double acc = 0.0;
        for (const Complex& v : row) acc += std::norm(v);
        vals[i] = acc;
    });
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    return {*lo, *hi};
}

InterpolationResult min_norm_interpolant(const TruncatedSpace& S,
                                         const PointSequence& gamma,
                                         const std::vector<Complex>& targets) {
    if (targets.size() != gamma.size())
        throw std::invalid_argument("min_norm_interpolant: targets/points mismatch");
    InterpolationResult out;
    out.coefficients.assign(S.dim(), Complex(0.0, 0.0));
    if (gamma.points.empty()) return out;
    require_members(S, gamma);
    if (gamma.size() > static_cast<std::size_t>(S.dim()))
        throw std::invalid_argument(
            "min_norm_interpolant: more points than section dimensions");

    const Eigen::MatrixXcd E = evaluation_matrix(S, gamma);
    Eigen::VectorXcd b(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i)
        b(static_cast<Eigen::Index>(i)) =
            targets[i] * std::exp(-0.5 * S.weight()->value(gamma.points[i]));

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smax > 0.0) || smin < RANK_TOL * smax) {
        EvaluationDiagnostics diag;
        fill_closest_pair(gamma, diag);
        std::string msg = "evaluation matrix rank-deficient";
        if (diag.closest_pair)
            msg += "; nearest points #" + std::to_string(diag.closest_pair->first) +
                   " and #" + std::to_string(diag.closest_pair->second) +
                   " at distance " + std::to_string(diag.closest_distance);
        throw NumericError("min_norm_interpolant", msg);
    }

    const Eigen::VectorXcd y = svd.matrixU().adjoint() * b;
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(S.dim());
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        c += (y(k) / sv(k)) * svd.matrixV().col(k);

    for (int j = 0; j < S.dim(); ++j) out.coefficients[j] = c(j);
    out.space_norm = c.norm();
    out.achieved_values.resize(gamma.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const std::vector<Complex> basis = S.orthonormal_at(gamma.points[i]);
        Complex val(0.0, 0.0);
        for (int j = 0; j < S.dim(); ++j) val += basis[j] * out.coefficients[j];
        out.achieved_values[i] = val;
        const double dev = std::abs(val - targets[i]) *
                           std::exp(-0.5 * S.weight()->value(gamma.points[i]));
        worst = std::max(worst, dev);
    }
    out.residual = worst;
    out.constant_estimate = 1.0 / smin;
    return out;
}

double interpolation_constant(const TruncatedSpace& S, const PointSequence& gamma,
                              EvaluationDiagnostics* diag) {
    if (gamma.points.empty()) {
        if (diag) *diag = {};
        return 0.0;
    }
    require_members(S, gamma);
    if (gamma.size() > static_cast<std::size_t>(S.dim()))
        throw std::invalid_argument(
            "interpolation_constant: more points than section dimensions");
    const Eigen::MatrixXcd E = evaluation_matrix(S, gamma);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(E);
    const Eigen::VectorXd sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (diag) {
        diag->sigma_min = smin;
        diag->sigma_max = smax;
        diag->rows = gamma.size();
        diag->cols = static_cast<std::size_t>(S.dim());
        fill_closest_pair(gamma, *diag);
    }
    if (!(smax > 0.0) || smin < RANK_TOL * smax)
        return std::numeric_limits<double>::infinity();
    return 1.0 / smin;
}

double restriction_norm(const TruncatedSpace& S, const PointSequence& gamma) {
    if (gamma.points.empty()) return 0.0;
    require_members(S, gamma);
    const Eigen::MatrixXcd E = evaluation_matrix(S, gamma);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(E);
    return svd.singularValues()(0);
}

InterpolationResult one_point_interpolant(const TruncatedSpace& S, Complex z) {
    PointSequence single({z}, ambient_for(S.space_domain()));
    const Complex target(std::exp(0.5 * S.weight()->value(z)), 0.0);
    return min_norm_interpolant(S, single, {target});
}

JiggleOutcome jiggle_experiment(const TruncatedSpace& S, const PointSequence& gamma,
                                const std::vector<Complex>& offsets, double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("jiggle_experiment: delta must be positive");
    JiggleOutcome out;
    out.constant_before = interpolation_constant(S, gamma);
    const double sep = separation_radius(gamma, Metric::Euclidean).radius;
    const double cap = std::min(1.0 / out.constant_before, sep);
    if (!(delta < cap))
        throw std::invalid_argument(
            "jiggle_experiment: delta must stay below min(1/constant, separation)");
    const PointSequence moved = perturb(gamma, offsets, delta * delta);
    out.constant_after = interpolation_constant(S, moved);
    return out;
}

double add_point_experiment(const TruncatedSpace& S, const PointSequence& gamma,
                            Complex z, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("add_point_experiment: eps must be positive");
    for (std::size_t i = 0; i < gamma.size(); ++i)
        if (std::abs(gamma.points[i] - z) < 1e-12)
            throw std::invalid_argument(
                "add_point_experiment: new point coincides with member " +
                std::to_string(i));
    if (!S.contains(z))
        throw std::invalid_argument("add_point_experiment: point outside domain");

    const WeightPtr bumped = bumped_weight(S.weight(), z, eps);
    const TruncatedSpace bumped_space =
        build_space(S.space_domain(), bumped, S.max_degree(), S.quadrature());

    std::vector<Complex> pts(gamma.points);
    pts.push_back(z);
    const PointSequence extended(pts, gamma.ambient);
    return interpolation_constant(bumped_space, extended);
}

}  // namespace flatlab
