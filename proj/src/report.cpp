#include "flatlab/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace flatlab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& raw) {
    const bool needs_quote = raw.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quote) return raw;
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    out += '\n';
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed for " + path);
}

nlohmann::json to_json(Complex z) {
    return nlohmann::json{{"re", z.real()}, {"im", z.imag()}};
}

nlohmann::json to_json(const RadiusEntry& e) {
    return nlohmann::json{{"r", e.r},
                          {"sup_ratio", e.sup_ratio},
                          {"argmax_center", to_json(e.argmax_center)},
                          {"admissible", e.admissible},
                          {"skipped", e.skipped}};
}

nlohmann::json to_json(const DensityReport& rep) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& e : rep.per_radius) per.push_back(to_json(e));
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& c : rep.centers_flagged) flagged.push_back(to_json(c));
    nlohmann::json ends = nlohmann::json::array();
    for (const auto& sub : rep.end_reports) ends.push_back(to_json(sub));
    nlohmann::json j{{"per_radius", per},
                     {"extrapolated", rep.extrapolated},
                     {"ladder", rep.ladder},
                     {"centers_flagged", flagged},
                     {"sample_count", rep.samples.size()}};
    if (!ends.empty()) j["end_reports"] = ends;
    return j;
}

nlohmann::json to_json(const InterpolationResult& res) {
    return nlohmann::json{{"space_norm", res.space_norm},
                          {"residual", res.residual},
                          {"constant_estimate", res.constant_estimate},
                          {"coefficient_count", res.coefficients.size()}};
}

nlohmann::json to_json(const EvaluationDiagnostics& diag) {
    nlohmann::json j{{"sigma_min", diag.sigma_min},
                     {"sigma_max", diag.sigma_max},
                     {"rows", diag.rows},
                     {"cols", diag.cols}};
    if (diag.closest_pair) {
        j["closest_pair"] = {diag.closest_pair->first, diag.closest_pair->second};
        j["closest_distance"] = diag.closest_distance;
    }
    return j;
}

nlohmann::json to_json(const KernelBounds& kb) {
    return nlohmann::json{{"min", kb.min_value}, {"max", kb.max_value}};
}

nlohmann::json to_json(const DivisorInvariants& inv) {
    nlohmann::json j{{"lambda", inv.lambda},
                     {"sigma", inv.sigma},
                     {"upsilon_mass", inv.upsilon_mass}};
    if (inv.s_value) j["s_value"] = *inv.s_value;
    return j;
}

nlohmann::json to_json(const GramDiagnostics& g) {
    return nlohmann::json{{"diagonal", g.diagonal},
                          {"smallest_scaled_eigenvalue", g.smallest_scaled_eigenvalue},
                          {"largest_scaled_eigenvalue", g.largest_scaled_eigenvalue},
                          {"log_diag_min", g.log_diag_min},
                          {"log_diag_max", g.log_diag_max}};
}

std::string density_ratios_csv(const DensityReport& rep) {
    std::string out = csv_line(
        {"r", "sup_ratio", "argmax_re", "argmax_im", "admissible", "skipped"});
    for (const auto& e : rep.per_radius)
        out += csv_line({format_double(e.r), format_double(e.sup_ratio),
                         format_double(e.argmax_center.real()),
                         format_double(e.argmax_center.imag()),
                         std::to_string(e.admissible), std::to_string(e.skipped)});
    return out;
}

std::string density_samples_csv(const DensityReport& rep) {
    std::string out = csv_line({"r", "center_re", "center_im", "ratio"});
    for (const auto& [r, c, ratio] : rep.samples)
        out += csv_line({format_double(r), format_double(c.real()),
                         format_double(c.imag()), format_double(ratio)});
    return out;
}

}  // namespace flatlab
