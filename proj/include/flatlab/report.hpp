#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "flatlab/bergman.hpp"
#include "flatlab/density.hpp"
#include "flatlab/divisors.hpp"

namespace flatlab {

// Shortest round-trip decimal form; "inf"/"-inf"/"nan" spelled out.
std::string format_double(double v);

// RFC 4180 quoting: fields with commas, quotes, or newlines get wrapped,
// embedded quotes doubled.
std::string csv_field(const std::string& raw);

std::string csv_line(const std::vector<std::string>& fields);

// Write via a sibling temp file and rename, so readers never see a partial
// file.
void write_file_atomic(const std::string& path, const std::string& content);

nlohmann::json to_json(Complex z);
nlohmann::json to_json(const RadiusEntry& e);
nlohmann::json to_json(const DensityReport& rep);
nlohmann::json to_json(const InterpolationResult& res);
nlohmann::json to_json(const EvaluationDiagnostics& diag);
nlohmann::json to_json(const KernelBounds& kb);
nlohmann::json to_json(const DivisorInvariants& inv);
nlohmann::json to_json(const GramDiagnostics& g);

std::string density_ratios_csv(const DensityReport& rep);
std::string density_samples_csv(const DensityReport& rep);

}  // namespace flatlab
