#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "anisolab/deficits.hpp"

namespace anisolab {

using json = nlohmann::ordered_json;

// integrand spec: {"kind": ..., "dim": ..., "params": {...}}
Integrand load_integrand(const json& j);
Integrand load_integrand_file(const std::string& path);
json integrand_to_json(const Integrand& f);

// domain spec: {"type": ..., ...}
ShapeSpec load_shape(const json& j);
ShapeSpec load_shape_file(const std::string& path);
json shape_to_json(const ShapeSpec& s);

// potential spec: {"type": "constant"|"linear"|"quadratic-well", ...}
Potential load_potential(const json& j);
json potential_to_json(const Potential& g);

// raw grid import: header json {dims, spacing, origin, data, dtype, endianness}
Grid load_raw_grid(const std::string& headerPath);

// solution container: magic + header json + binary64 nodes (little-endian)
void save_solution(const std::string& path, const Grid& u);
Grid load_solution(const std::string& path);

json deficit_report_to_json(const DeficitReport& rep);
// lightweight structural validation of an emitted report
bool validate_deficit_report(const json& j, std::string* err = nullptr);

std::string deficit_csv_header();
std::string deficit_csv_row(const std::string& label, const DeficitReport& rep);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
void write_text_file(const std::string& path, const std::string& text);

// FNV-1a of the canonical dump (provenance hash)
std::string json_hash(const json& j);

}  // namespace anisolab
