#include "flatlab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "flatlab/bergman.hpp"
#include "flatlab/density.hpp"
#include "flatlab/divisors.hpp"
#include "flatlab/errors.hpp"
#include "flatlab/report.hpp"
#include "flatlab/sequences.hpp"
#include "flatlab/weights.hpp"

namespace flatlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- schema ----

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

const json& need(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(where + ": missing key '" + key + "'");
    return obj.at(key);
}

double num(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return v.get<int>();
}

std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
    return v.get<std::string>();
}

Complex cplx(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2)
        throw ConfigError(where + ": expected [re, im]");
    return {num(v[0], where), num(v[1], where)};
}

Rectangle rect(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 4)
        throw ConfigError(where + ": expected [x0, x1, y0, y1]");
    Rectangle r{num(v[0], where), num(v[1], where), num(v[2], where),
                num(v[3], where)};
    if (!r.valid()) throw ConfigError(where + ": rectangle has negative extent");
    return r;
}

std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(num(e, where));
    return out;
}

std::vector<Complex> point_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of [re, im]");
    std::vector<Complex> out;
    for (const auto& e : v) out.push_back(cplx(e, where));
    return out;
}

// ---------------------------------------------------------------- builders --

enum class GeometryKind { Plane, PuncturedPlane, Surface };

struct GeometryCfg {
    GeometryKind kind = GeometryKind::Plane;
    SurfaceModel surface;
};

GeometryCfg build_geometry(const json& cfg) {
    const std::string where = "geometry";
    check_keys(cfg, where, {"kind", "ends", "core_label"});
    const std::string kind = text(need(cfg, "kind", where), where + ".kind");
    GeometryCfg out;
    if (kind == "plane") {
        out.kind = GeometryKind::Plane;
    } else if (kind == "punctured_plane") {
        out.kind = GeometryKind::PuncturedPlane;
    } else if (kind == "surface") {
        out.kind = GeometryKind::Surface;
        const json& ends = need(cfg, "ends", where);
        if (!ends.is_array() || ends.empty())
            throw ConfigError(where + ".ends: expected a nonempty array");
        for (std::size_t i = 0; i < ends.size(); ++i) {
            const std::string ew = where + ".ends[" + std::to_string(i) + "]";
            check_keys(ends[i], ew, {"kind", "scale", "chart_inner_radius"});
            EndDescriptor d;
            const std::string ek = text(need(ends[i], "kind", ew), ew + ".kind");
            if (ek == "euclidean") d.kind = EndKind::Euclidean;
            else if (ek == "cylindrical") d.kind = EndKind::Cylindrical;
            else throw ConfigError(ew + ".kind: unknown end kind '" + ek + "'");
            if (ends[i].contains("scale")) d.scale = num(ends[i]["scale"], ew);
            if (ends[i].contains("chart_inner_radius"))
                d.chart_inner_radius = num(ends[i]["chart_inner_radius"], ew);
            out.surface.ends.push_back(d);
        }
        if (cfg.contains("core_label"))
            out.surface.core_label = text(cfg["core_label"], where + ".core_label");
        validate(out.surface);
    } else {
        throw ConfigError(where + ".kind: unknown geometry '" + kind + "'");
    }
    return out;
}

WeightPtr build_weight(const json& cfg, WeightDomain dom, const std::string& where) {
    const std::string kind = text(need(cfg, "kind", where), where + ".kind");
    if (kind == "quadratic") {
        check_keys(cfg, where, {"kind", "a"});
        return quadratic_weight(num(need(cfg, "a", where), where + ".a"));
    }
    if (kind == "log_squared") {
        check_keys(cfg, where, {"kind", "a"});
        return log_squared_weight(num(need(cfg, "a", where), where + ".a"));
    }
    if (kind == "radial_poly") {
        check_keys(cfg, where, {"kind", "coeffs"});
        return radial_poly_weight(number_list(need(cfg, "coeffs", where), where));
    }
    if (kind == "grid") {
        check_keys(cfg, where, {"kind", "file"});
        const std::string path = text(need(cfg, "file", where), where + ".file");
        if (!fs::exists(path))
            throw ConfigError(where + ".file: no such file '" + path + "'");
        try {
            return grid_sampled_weight(load_grid(path), dom);
        } catch (const std::runtime_error& e) {
            throw ConfigError(where + ".file: " + e.what());
        }
    }
    if (kind == "dilated") {
        check_keys(cfg, where, {"kind", "base", "factor"});
        return dilated_weight(build_weight(need(cfg, "base", where), dom, where + ".base"),
                              num(need(cfg, "factor", where), where + ".factor"));
    }
    if (kind == "bumped") {
        check_keys(cfg, where, {"kind", "base", "z0", "eps"});
        return bumped_weight(build_weight(need(cfg, "base", where), dom, where + ".base"),
                             cplx(need(cfg, "z0", where), where + ".z0"),
                             num(need(cfg, "eps", where), where + ".eps"));
    }
    throw ConfigError(where + ".kind: unknown weight '" + kind + "'");
}

PointSequence build_sequence(const json& cfg, Ambient ambient,
                             const std::string& where) {
    const std::string kind = text(need(cfg, "kind", where), where + ".kind");
    if (kind == "lattice") {
        check_keys(cfg, where, {"kind", "s", "window"});
        return lattice(num(need(cfg, "s", where), where + ".s"),
                       rect(need(cfg, "window", where), where + ".window"), ambient);
    }
    if (kind == "exp_lattice") {
        check_keys(cfg, where, {"kind", "s", "window"});
        return exp_lattice(num(need(cfg, "s", where), where + ".s"),
                           rect(need(cfg, "window", where), where + ".window"));
    }
    if (kind == "file") {
        check_keys(cfg, where, {"kind", "path"});
        const std::string path = text(need(cfg, "path", where), where + ".path");
        if (!fs::exists(path))
            throw ConfigError(where + ".path: no such file '" + path + "'");
        try {
            return load_sequence(path);
        } catch (const std::runtime_error& e) {
            throw ConfigError(where + ".path: " + e.what());
        }
    }
    if (kind == "points") {
        check_keys(cfg, where, {"kind", "list"});
        return PointSequence(point_list(need(cfg, "list", where), where + ".list"),
                             ambient);
    }
    throw ConfigError(where + ".kind: unknown sequence '" + kind + "'");
}

CenterSampler build_sampler(const json& cfg, std::uint64_t seed,
                            const std::string& where) {
    const std::string kind = text(need(cfg, "kind", where), where + ".kind");
    if (kind == "cell") {
        check_keys(cfg, where, {"kind", "cell", "step"});
        return cell_sampler(rect(need(cfg, "cell", where), where + ".cell"),
                            num(need(cfg, "step", where), where + ".step"));
    }
    if (kind == "jitter") {
        check_keys(cfg, where, {"kind", "window", "step", "per_point", "radius"});
        return jitter_sampler(rect(need(cfg, "window", where), where + ".window"),
                              num(need(cfg, "step", where), where + ".step"),
                              integer(need(cfg, "per_point", where), where),
                              num(need(cfg, "radius", where), where + ".radius"),
                              seed);
    }
    if (kind == "explicit") {
        check_keys(cfg, where, {"kind", "centers"});
        return explicit_sampler(point_list(need(cfg, "centers", where), where));
    }
    throw ConfigError(where + ".kind: unknown sampler '" + kind + "'");
}

SpaceDomain build_domain(const json& cfg, const std::string& where) {
    const std::string kind = text(need(cfg, "kind", where), where + ".kind");
    if (kind == "disk") {
        check_keys(cfg, where, {"kind", "R"});
        return DiskDomain{num(need(cfg, "R", where), where + ".R")};
    }
    if (kind == "annulus") {
        check_keys(cfg, where, {"kind", "rho", "R"});
        return AnnulusDomain{num(need(cfg, "rho", where), where + ".rho"),
                             num(need(cfg, "R", where), where + ".R")};
    }
    throw ConfigError(where + ".kind: unknown domain '" + kind + "'");
}

QuadratureSpec build_quadrature(const json& cfg, const std::string& where) {
    QuadratureSpec spec;
    if (!cfg.is_object()) throw ConfigError(where + ": expected an object");
    check_keys(cfg, where, {"n_radial", "n_angular", "rel_tol"});
    if (cfg.contains("n_radial")) spec.n_radial = integer(cfg["n_radial"], where);
    if (cfg.contains("n_angular")) spec.n_angular = integer(cfg["n_angular"], where);
    if (cfg.contains("rel_tol")) spec.rel_tol = num(cfg["rel_tol"], where);
    return spec;
}

// ---------------------------------------------------------------- scenario --

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    GeometryCfg geometry;
    json weight_cfg;    // may be null
    json sequence_cfg;  // may be null
    json task;
    json echo;  // full parsed config for the manifest
};

Scenario parse_scenario(const std::string& config_path) {
    if (!fs::exists(config_path))
        throw ConfigError("config: no such file '" + config_path + "'");
    std::ifstream in(config_path);
    json cfg;
    try {
        cfg = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    check_keys(cfg, "config", {"name", "seed", "geometry", "weight", "sequence", "task"});

    Scenario sc;
    sc.echo = cfg;
    sc.name = text(need(cfg, "name", "config"), "config.name");
    if (sc.name.empty() ||
        sc.name.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                                  "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
            std::string::npos)
        throw ConfigError("config.name: use letters, digits, '_' or '-'");
    if (cfg.contains("seed")) {
        if (!cfg["seed"].is_number_integer() || cfg["seed"].get<long long>() < 0)
            throw ConfigError("config.seed: expected a nonnegative integer");
        sc.seed = cfg["seed"].get<std::uint64_t>();
    }
    sc.geometry = build_geometry(need(cfg, "geometry", "config"));
    if (cfg.contains("weight")) sc.weight_cfg = cfg["weight"];
    if (cfg.contains("sequence")) sc.sequence_cfg = cfg["sequence"];
    sc.task = need(cfg, "task", "config");
    if (!sc.task.is_object()) throw ConfigError("config.task: expected an object");
    return sc;
}

WeightDomain weight_domain_for(const GeometryCfg& g) {
    return g.kind == GeometryKind::PuncturedPlane ? WeightDomain::PuncturedPlane
                                                  : WeightDomain::Plane;
}

Ambient ambient_for(const GeometryCfg& g) {
    return g.kind == GeometryKind::PuncturedPlane ? Ambient::punctured_plane()
                                                  : Ambient::plane();
}

// ------------------------------------------------------------ task results --

struct TaskOutput {
    json report;  // task-specific payload for report.json
    std::vector<std::pair<std::string, std::string>> files;  // extra CSV files
    json diagnostics;  // quadrature/section settings for the manifest
    // flattened scalar row for sweep tables, in a fixed column order
    std::vector<std::pair<std::string, std::string>> row;
};

std::vector<Complex> jiggle_offsets(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x6a09e667f3bcc908ULL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Complex> out;
    out.reserve(n);
    while (out.size() < n) {
        const double x = unit(rng), y = unit(rng);
        if (x * x + y * y <= 1.0) out.emplace_back(x, y);
    }
    return out;
}

TaskOutput run_density_task(const Scenario& sc) {
    const json& t = sc.task;
    check_keys(t, "task", {"kind", "ladder", "window", "sampler", "excluded_radius", "ends"});
    const std::vector<double> ladder =
        number_list(need(t, "ladder", "task"), "task.ladder");

    DensityReport rep;
    if (sc.geometry.kind == GeometryKind::Surface) {
        const json& ends_cfg = need(t, "ends", "task");
        if (!ends_cfg.is_array())
            throw ConfigError("task.ends: expected an array of per-end blocks");
        std::vector<EndData> ends;
        for (std::size_t i = 0; i < ends_cfg.size(); ++i) {
            const std::string ew = "task.ends[" + std::to_string(i) + "]";
            check_keys(ends_cfg[i], ew, {"sequence", "weight", "window", "sampler"});
            EndData d;
            const bool cylindrical =
                i < sc.geometry.surface.ends.size() &&
                sc.geometry.surface.ends[i].kind == EndKind::Cylindrical;
            const Ambient amb = cylindrical ? Ambient::punctured_plane()
                                            : Ambient::plane();
            d.gamma = build_sequence(need(ends_cfg[i], "sequence", ew), amb,
                                     ew + ".sequence");
            d.weight = build_weight(need(ends_cfg[i], "weight", ew),
                                    cylindrical ? WeightDomain::PuncturedPlane
                                                : WeightDomain::Plane,
                                    ew + ".weight");
            d.window = rect(need(ends_cfg[i], "window", ew), ew + ".window");
            d.sampler = build_sampler(need(ends_cfg[i], "sampler", ew), sc.seed,
                                      ew + ".sampler");
            ends.push_back(std::move(d));
        }
        rep = surface_density(sc.geometry.surface, ends, ladder);
    } else {
        const WeightPtr w = build_weight(need(sc.echo, "weight", "config"),
                                         weight_domain_for(sc.geometry), "weight");
        const PointSequence gamma = build_sequence(
            need(sc.echo, "sequence", "config"), ambient_for(sc.geometry), "sequence");
        const Rectangle window = rect(need(t, "window", "task"), "task.window");
        const CenterSampler sampler =
            build_sampler(need(t, "sampler", "task"), sc.seed, "task.sampler");
        if (sc.geometry.kind == GeometryKind::Plane) {
            double excluded = 0.0;
            if (t.contains("excluded_radius"))
                excluded = num(t["excluded_radius"], "task.excluded_radius");
            rep = upper_density_euclidean(gamma, w, ladder, sampler, window, excluded);
        } else {
            rep = cover_density(gamma, w, ladder, sampler, window);
        }
    }

    TaskOutput out;
    out.report = to_json(rep);
    out.files.emplace_back("ratios.csv", density_ratios_csv(rep));
    out.files.emplace_back("samples.csv", density_samples_csv(rep));
    out.diagnostics = json{{"ladder", rep.ladder}};
    const RadiusEntry& top = rep.per_radius.back();
    out.row = {{"extrapolated", format_double(rep.extrapolated)},
               {"top_sup_ratio", format_double(top.sup_ratio)},
               {"top_admissible", std::to_string(top.admissible)}};
    return out;
}

TaskOutput run_interp_task(const Scenario& sc) {
    const json& t = sc.task;
    check_keys(t, "task", {"kind", "N", "domain", "quadrature", "targets", "experiment",
                           "probe", "n_ladder"});
    const int N = integer(need(t, "N", "task"), "task.N");
    bool ladder = true;
    if (t.contains("n_ladder")) {
        if (!t["n_ladder"].is_boolean())
            throw ConfigError("task.n_ladder: expected a boolean");
        ladder = t["n_ladder"].get<bool>();
    }
    const SpaceDomain domain = build_domain(need(t, "domain", "task"), "task.domain");
    QuadratureSpec quad;
    if (t.contains("quadrature")) quad = build_quadrature(t["quadrature"], "task.quadrature");

    const WeightPtr w = build_weight(need(sc.echo, "weight", "config"),
                                     weight_domain_for(sc.geometry), "weight");
    const PointSequence gamma = build_sequence(need(sc.echo, "sequence", "config"),
                                               ambient_for(sc.geometry), "sequence");

    const TruncatedSpace S = build_space(domain, w, N, quad);

    EvaluationDiagnostics diag;
    const double constant = interpolation_constant(S, gamma, &diag);
    const double rnorm = restriction_norm(S, gamma);

    std::string targets_kind = "ones";
    if (t.contains("targets")) {
        check_keys(t["targets"], "task.targets", {"kind"});
        targets_kind = text(need(t["targets"], "kind", "task.targets"),
                            "task.targets.kind");
    }
    std::vector<Complex> targets(gamma.size());
    if (targets_kind == "ones") {
        for (auto& v : targets) v = Complex(1.0, 0.0);
    } else if (targets_kind == "random") {
        // unit-norm weighted data spread over the points
        std::mt19937_64 rng(sc.seed ^ 0xbb67ae8584caa73bULL);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<Complex> b(gamma.size());
        double nrm = 0.0;
        for (auto& v : b) {
            v = Complex(g(rng), g(rng));
            nrm += std::norm(v);
        }
        nrm = std::sqrt(std::max(nrm, 1e-300));
        for (std::size_t i = 0; i < gamma.size(); ++i)
            targets[i] = b[i] / nrm * std::exp(0.5 * w->value(gamma.points[i]));
    } else {
        throw ConfigError("task.targets.kind: unknown kind '" + targets_kind + "'");
    }
    InterpolationResult mn;
    if (!gamma.points.empty() && std::isfinite(constant))
        mn = min_norm_interpolant(S, gamma, targets);

    TaskOutput out;
    out.report = json{{"count", gamma.size()},
                      {"constant", constant},
                      {"restriction_norm", rnorm},
                      {"evaluation", to_json(diag)},
                      {"targets", targets_kind},
                      {"min_norm", to_json(mn)}};
    out.diagnostics = json{{"gram", to_json(S.gram_diagnostics())},
                           {"dim", S.dim()},
                           {"N", N}};
    out.row = {{"count", std::to_string(gamma.size())},
               {"constant", format_double(constant)},
               {"restriction_norm", format_double(rnorm)},
               {"sigma_min", format_double(diag.sigma_min)},
               {"sigma_max", format_double(diag.sigma_max)},
               {"residual", format_double(mn.residual)},
               {"space_norm", format_double(mn.space_norm)}};

    if (t.contains("probe")) {
        const Complex z = cplx(t["probe"], "task.probe");
        const InterpolationResult one = one_point_interpolant(S, z);
        out.report["probe"] = json{{"at", to_json(z)},
                                   {"space_norm", one.space_norm},
                                   {"residual", one.residual}};
        out.row.emplace_back("probe_norm", format_double(one.space_norm));
    }

    if (t.contains("experiment")) {
        const json& ex = t["experiment"];
        const std::string ekind = text(need(ex, "kind", "task.experiment"),
                                       "task.experiment.kind");
        if (ekind == "jiggle") {
            check_keys(ex, "task.experiment", {"kind", "delta"});
            const double delta = num(need(ex, "delta", "task.experiment"),
                                     "task.experiment.delta");
            std::vector<Complex> offsets = jiggle_offsets(gamma.size(), sc.seed);
            for (Complex& o : offsets) o *= delta * delta;
            const JiggleOutcome jo = jiggle_experiment(S, gamma, offsets, delta);
            out.report["jiggle"] = json{{"delta", delta},
                                        {"constant_before", jo.constant_before},
                                        {"constant_after", jo.constant_after}};
            out.row.emplace_back("constant_before", format_double(jo.constant_before));
            out.row.emplace_back("constant_after", format_double(jo.constant_after));
        } else if (ekind == "add_point") {
            check_keys(ex, "task.experiment", {"kind", "z", "eps"});
            const Complex z = cplx(need(ex, "z", "task.experiment"), "task.experiment.z");
            const double eps = num(need(ex, "eps", "task.experiment"),
                                   "task.experiment.eps");
            const double augmented = add_point_experiment(S, gamma, z, eps);
            out.report["add_point"] = json{{"z", to_json(z)},
                                           {"eps", eps},
                                           {"augmented_constant", augmented}};
            out.row.emplace_back("augmented_constant", format_double(augmented));
        } else {
            throw ConfigError("task.experiment.kind: unknown kind '" + ekind + "'");
        }
    }

    if (ladder && !gamma.points.empty()) {
        // same discretization with 20 extra modes: flags section-truncation
        // artifacts (constant far from its refined value means N is too small
        // for this configuration's extent)
        try {
            const TruncatedSpace S2 = build_space(domain, w, N + 20, quad);
            const double c2 = interpolation_constant(S2, gamma);
            out.report["constant_at_N_plus_20"] = c2;
            out.row.emplace_back("constant_N20", format_double(c2));
        } catch (const std::invalid_argument&) {
            // refinement exceeds the non-radial degree cap; omit the column
        }
    }

    std::string csv = csv_line({"count", "constant", "restriction_norm", "sigma_min",
                                "sigma_max", "residual", "space_norm"});
    csv += csv_line({std::to_string(gamma.size()), format_double(constant),
                     format_double(rnorm), format_double(diag.sigma_min),
                     format_double(diag.sigma_max), format_double(mn.residual),
                     format_double(mn.space_norm)});
    out.files.emplace_back("constants.csv", csv);
    return out;
}

TaskOutput run_kernel_task(const Scenario& sc) {
    const json& t = sc.task;
    check_keys(t, "task", {"kind", "N", "domain", "quadrature", "grid", "probe"});
    const int N = integer(need(t, "N", "task"), "task.N");
    const SpaceDomain domain = build_domain(need(t, "domain", "task"), "task.domain");
    QuadratureSpec quad;
    if (t.contains("quadrature")) quad = build_quadrature(t["quadrature"], "task.quadrature");
    const WeightPtr w = build_weight(need(sc.echo, "weight", "config"),
                                     weight_domain_for(sc.geometry), "weight");
    const TruncatedSpace S = build_space(domain, w, N, quad);

    const json& g = need(t, "grid", "task");
    check_keys(g, "task.grid", {"window", "step"});
    const Rectangle win = rect(need(g, "window", "task.grid"), "task.grid.window");
    const double step = num(need(g, "step", "task.grid"), "task.grid.step");
    if (!(step > 0.0)) throw ConfigError("task.grid.step: must be positive");
    std::vector<Complex> grid;
    for (double y = win.y0; y <= win.y1 + 1e-12; y += step)
        for (double x = win.x0; x <= win.x1 + 1e-12; x += step) {
            const Complex z(x, y);
            if (S.contains(z)) grid.push_back(z);
        }
    if (grid.empty())
        throw ConfigError("task.grid: no grid point lies in the section domain");

    const KernelBounds kb = kernel_bound_check(S, grid);

    TaskOutput out;
    out.report = json{{"grid_points", grid.size()}, {"bounds", to_json(kb)}};
    out.diagnostics = json{{"gram", to_json(S.gram_diagnostics())},
                           {"dim", S.dim()},
                           {"N", N}};
    out.row = {{"kernel_min", format_double(kb.min_value)},
               {"kernel_max", format_double(kb.max_value)}};
    std::string csv = csv_line({"kernel_min", "kernel_max", "grid_points"});
    csv += csv_line({format_double(kb.min_value), format_double(kb.max_value),
                     std::to_string(grid.size())});
    out.files.emplace_back("kernel.csv", csv);

    if (t.contains("probe")) {
        const Complex z = cplx(t["probe"], "task.probe");
        const InterpolationResult one = one_point_interpolant(S, z);
        out.report["probe"] = json{{"at", to_json(z)},
                                   {"space_norm", one.space_norm},
                                   {"residual", one.residual}};
        out.row.emplace_back("probe_norm", format_double(one.space_norm));
    }
    return out;
}

TaskOutput run_jensen_task(const Scenario& sc) {
    const json& t = sc.task;
    check_keys(t, "task", {"kind", "polynomial", "z", "r"});
    const json& p = need(t, "polynomial", "task");
    check_keys(p, "task.polynomial", {"leading", "roots"});
    Polynomial f;
    f.leading = cplx(need(p, "leading", "task.polynomial"), "task.polynomial.leading");
    f.roots = point_list(need(p, "roots", "task.polynomial"), "task.polynomial.roots");
    const Complex z = cplx(need(t, "z", "task"), "task.z");
    const double r = num(need(t, "r", "task"), "task.r");

    const WeightPtr w = build_weight(need(sc.echo, "weight", "config"),
                                     weight_domain_for(sc.geometry), "weight");
    const double residual = jensen_residual(f, *w, z, r);

    TaskOutput out;
    out.report = json{{"residual", residual},
                      {"z", to_json(z)},
                      {"r", r},
                      {"root_count", f.roots.size()}};
    out.diagnostics = json{{"r", r}};
    out.row = {{"residual", format_double(residual)}};

    // divisor statistics when the roots form a valid configuration
    try {
        const PointSequence roots(f.roots, Ambient::plane());
        const DivisorInvariants inv = invariants_at(roots, z, r);
        out.report["invariants"] = to_json(inv);
        out.row.emplace_back("lambda", format_double(inv.lambda));
        out.row.emplace_back("sigma", format_double(inv.sigma));
        out.row.emplace_back("upsilon_mass", format_double(inv.upsilon_mass));
    } catch (const std::invalid_argument&) {
        // repeated roots: Jensen residual still stands, pointwise stats don't
    }

    std::string csv = csv_line({"residual", "z_re", "z_im", "r"});
    csv += csv_line({format_double(residual), format_double(z.real()),
                     format_double(z.imag()), format_double(r)});
    out.files.emplace_back("jensen.csv", csv);
    return out;
}

TaskOutput run_task(const Scenario& sc);

// ---------------------------------------------------------------- sweep -----

struct SweepRow {
    double value = 0.0;
    bool failed = false;
    std::string error;
    TaskOutput output;
};

Scenario scenario_for_value(const Scenario& base, const std::string& variable,
                            double value) {
    Scenario sc = base;
    json inner = need(base.task, "inner", "task");
    if (variable == "s") {
        if (sc.sequence_cfg.is_null())
            throw ConfigError("sweep over s needs a sequence block");
        const std::string kind = text(need(sc.sequence_cfg, "kind", "sequence"),
                                      "sequence.kind");
        if (kind != "lattice" && kind != "exp_lattice")
            throw ConfigError("sweep over s needs a lattice or exp_lattice sequence");
        sc.sequence_cfg["s"] = value;
        sc.echo["sequence"] = sc.sequence_cfg;
    } else if (variable == "N") {
        inner["N"] = static_cast<int>(std::llround(value));
    } else if (variable == "r") {
        const std::string ikind = text(need(inner, "kind", "task.inner"),
                                       "task.inner.kind");
        if (ikind == "density") inner["ladder"] = json::array({value});
        else if (ikind == "jensen") inner["r"] = value;
        else throw ConfigError("sweep over r applies to density or jensen tasks");
    } else if (variable == "eps") {
        if (!inner.contains("experiment"))
            throw ConfigError("sweep over eps needs an add_point experiment block");
        inner["experiment"]["eps"] = value;
    } else if (variable == "delta") {
        if (!inner.contains("experiment"))
            throw ConfigError("sweep over delta needs a jiggle experiment block");
        inner["experiment"]["delta"] = value;
    } else {
        throw ConfigError("task.variable: unknown sweep variable '" + variable + "'");
    }
    sc.task = inner;
    return sc;
}

TaskOutput run_sweep_task(const Scenario& sc, int jobs) {
    const json& t = sc.task;
    check_keys(t, "task", {"kind", "variable", "values", "inner"});
    const std::string variable =
        text(need(t, "variable", "task"), "task.variable");
    const std::vector<double> values =
        number_list(need(t, "values", "task"), "task.values");
    if (values.empty()) throw ConfigError("task.values: sweep range is empty");
    const json& inner = need(t, "inner", "task");
    if (!inner.is_object() || !inner.contains("kind"))
        throw ConfigError("task.inner: expected a task object");
    if (inner["kind"] == "sweep") throw ConfigError("task.inner: nested sweeps");

    // validate the substitution once up front so typos fail fast
    (void)scenario_for_value(sc, variable, values.front());

    std::vector<SweepRow> rows(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) rows[i].value = values[i];

    const int workers =
        std::max(1, std::min<int>(jobs > 0 ? jobs : 1, static_cast<int>(values.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) return;
            try {
                const Scenario row_sc = scenario_for_value(sc, variable, rows[i].value);
                rows[i].output = run_task(row_sc);
            } catch (const std::exception& e) {
                rows[i].failed = true;
                rows[i].error = e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // serialized assembly: fixed column set from the first successful row
    std::vector<std::string> columns;
    for (const auto& row : rows) {
        if (!row.failed) {
            for (const auto& [key, _] : row.output.row) columns.push_back(key);
            break;
        }
    }
    std::string csv;
    {
        std::vector<std::string> header{variable, "status"};
        header.insert(header.end(), columns.begin(), columns.end());
        csv += csv_line(header);
    }
    json jrows = json::array();
    for (const auto& row : rows) {
        std::vector<std::string> fields{format_double(row.value),
                                        row.failed ? "failed" : "ok"};
        json jr{{"value", row.value}, {"status", row.failed ? "failed" : "ok"}};
        if (row.failed) {
            fields.insert(fields.end(), columns.size(), "");
            jr["error"] = row.error;
        } else {
            for (const auto& col : columns) {
                std::string cell;
                for (const auto& [key, val] : row.output.row)
                    if (key == col) {
                        cell = val;
                        break;
                    }
                fields.push_back(cell);
            }
            jr["outputs"] = row.output.report;
        }
        csv += csv_line(fields);
        jrows.push_back(std::move(jr));
    }

    TaskOutput out;
    out.report = json{{"variable", variable}, {"rows", jrows}};
    out.diagnostics = json{{"variable", variable}, {"row_count", rows.size()}};
    out.files.emplace_back("sweep.csv", csv);
    return out;
}

TaskOutput run_task(const Scenario& sc) {
    const std::string kind = text(need(sc.task, "kind", "task"), "task.kind");
    if (kind == "density") return run_density_task(sc);
    if (kind == "interp") return run_interp_task(sc);
    if (kind == "kernel") return run_kernel_task(sc);
    if (kind == "jensen") return run_jensen_task(sc);
    throw ConfigError("task.kind: unknown task '" + kind + "'");
}

// ------------------------------------------------------------ run plumbing --

std::string timestamp(const char* fmt) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[64];
    std::strftime(buf, sizeof(buf), fmt, &tm);
    return buf;
}

fs::path make_run_dir(const std::string& out_root, const Scenario& sc) {
    fs::create_directories(out_root);
    const std::string base =
        sc.name + "-" + timestamp("%Y%m%d-%H%M%S") + "-" + std::to_string(sc.seed);
    fs::path dir = fs::path(out_root) / base;
    for (int k = 2; fs::exists(dir); ++k)
        dir = fs::path(out_root) / (base + "-" + std::to_string(k));
    fs::create_directory(dir);
    return dir;
}

int resolve_jobs(int flag_jobs) {
    if (const char* env = std::getenv("FLATLAB_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    if (flag_jobs > 0) return flag_jobs;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int execute_run(const std::string& config_path, const std::string& out_root,
                int flag_jobs, bool expect_sweep) {
    const Scenario sc = parse_scenario(config_path);
    const std::string kind = text(need(sc.task, "kind", "task"), "task.kind");
    if (expect_sweep && kind != "sweep")
        throw ConfigError("task.kind: the sweep subcommand needs a sweep task");
    if (!expect_sweep && kind == "sweep")
        throw ConfigError("task.kind: use the sweep subcommand for sweep tasks");

    const int jobs = resolve_jobs(flag_jobs);
#ifdef _OPENMP
    omp_set_num_threads(jobs);
#endif

    const std::string started = timestamp("%Y-%m-%dT%H:%M:%SZ");
    const TaskOutput result =
        kind == "sweep" ? run_sweep_task(sc, jobs) : run_task(sc);

    const fs::path dir = make_run_dir(out_root, sc);

    json report{{"name", sc.name},
                {"task", kind},
                {"seed", sc.seed},
                {"outputs", result.report}};
    write_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");
    for (const auto& [fname, content] : result.files)
        write_file_atomic((dir / fname).string(), content);

    // manifest last, with the complete inventory
    json files = json::array();
    std::vector<fs::directory_entry> entries;
    for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.path() < b.path(); });
    for (const auto& e : entries)
        files.push_back(json{{"name", e.path().filename().string()},
                             {"bytes", fs::file_size(e.path())}});
    files.push_back(json{{"name", "manifest.json"}});
    json manifest{{"name", sc.name},
                  {"version", FLATLAB_VERSION},
                  {"scenario", sc.echo},
                  {"started", started},
                  {"finished", timestamp("%Y-%m-%dT%H:%M:%SZ")},
                  {"jobs", jobs},
                  {"diagnostics", result.diagnostics},
                  {"files", files}};
    write_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cout << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- compare ---

struct DiffEntry {
    std::string path;
    std::string a, b;
    double delta = 0.0;
};

// returns false on schema mismatch
bool diff_json(const json& a, const json& b, const std::string& path, double tol,
               std::vector<DiffEntry>& diffs) {
    if (a.is_object() && b.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!b.contains(it.key())) return false;
        for (auto it = b.begin(); it != b.end(); ++it)
            if (!a.contains(it.key())) return false;
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!diff_json(it.value(), b.at(it.key()), path + "." + it.key(), tol,
                           diffs))
                return false;
        return true;
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!diff_json(a[i], b[i], path + "[" + std::to_string(i) + "]", tol,
                           diffs))
                return false;
        return true;
    }
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>(), y = b.get<double>();
        if (x == y) return true;  // covers matching infinities
        const double d = std::abs(x - y);
        if (!(d <= tol))
            diffs.push_back({path, format_double(x), format_double(y), d});
        return true;
    }
    // NaN serializes as null; treat a matching pair as equal
    if (a.is_null() && b.is_null()) return true;
    if (a.type() != b.type()) return false;
    if (a != b) diffs.push_back({path, a.dump(), b.dump(), 0.0});
    return true;
}

int execute_compare(const std::string& dir_a, const std::string& dir_b, double tol) {
    auto load = [](const std::string& dir, const char* file) {
        const fs::path p = fs::path(dir) / file;
        if (!fs::exists(p))
            throw ConfigError("compare: missing " + p.string());
        std::ifstream in(p);
        try {
            return json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("compare: " + p.string() + ": " + e.what());
        }
    };
    // manifests must at least parse; the numeric diff runs on the reports
    (void)load(dir_a, "manifest.json");
    (void)load(dir_b, "manifest.json");
    const json ra = load(dir_a, "report.json");
    const json rb = load(dir_b, "report.json");

    std::vector<DiffEntry> diffs;
    if (!diff_json(ra, rb, "report", tol, diffs)) {
        std::cerr << "schema mismatch between reports\n";
        return 2;
    }
    if (diffs.empty()) {
        std::cout << "empty diff\n";
        return 0;
    }
    for (const auto& d : diffs) {
        std::cout << d.path << ": " << d.a << " vs " << d.b;
        if (d.delta > 0.0) std::cout << " (delta " << format_double(d.delta) << ")";
        std::cout << "\n";
    }
    return 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"interpolation laboratory for flat model geometries"};
    app.set_version_flag("--version", std::string("flatlab ") + FLATLAB_VERSION);
    app.require_subcommand(0, 1);

    std::string run_config, run_out = "runs";
    int run_jobs = 0;
    CLI::App* cmd_run = app.add_subcommand("run", "execute one scenario");
    cmd_run->add_option("config", run_config, "scenario config file")->required();
    cmd_run->add_option("--out", run_out, "run directory root");
    cmd_run->add_option("--jobs", run_jobs, "worker threads");

    std::string sweep_config, sweep_out = "runs";
    int sweep_jobs = 0;
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "execute a parameter sweep");
    cmd_sweep->add_option("config", sweep_config, "sweep config file")->required();
    cmd_sweep->add_option("--out", sweep_out, "run directory root");
    cmd_sweep->add_option("--jobs", sweep_jobs, "worker threads");

    std::string cmp_a, cmp_b;
    double cmp_tol = 1e-9;
    CLI::App* cmd_cmp = app.add_subcommand("compare", "diff two run reports");
    cmd_cmp->add_option("dirA", cmp_a, "first run directory")->required();
    cmd_cmp->add_option("dirB", cmp_b, "second run directory")->required();
    cmd_cmp->add_option("--tol", cmp_tol, "numeric tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // help/version exit cleanly, misuse is a config error
    }

    try {
        if (cmd_run->parsed())
            return execute_run(run_config, run_out, run_jobs, false);
        if (cmd_sweep->parsed())
            return execute_run(sweep_config, sweep_out, sweep_jobs, true);
        if (cmd_cmp->parsed()) return execute_compare(cmp_a, cmp_b, cmp_tol);
        std::cerr << app.help();
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error in " << e.operation() << ": " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace flatlab
