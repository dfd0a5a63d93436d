#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "expray/dynamics.hpp"
#include "expray/param.hpp"
#include "expray/ray.hpp"

namespace expray {

// CSV, with header rows; fields printed with %.17g so re-reading is exact.
void write_ray_trace_csv(const RayTrace& trace, std::ostream& out);
RayTrace read_ray_trace_csv(std::istream& in);

void write_param_trace_csv(const ParamTrace& trace, std::ostream& out);
ParamTrace read_param_trace_csv(std::istream& in);

void write_orbit_csv(const OrbitRecord& orbit, std::ostream& out);

// JSON documents, schema_version 1.
std::string ray_trace_to_json(const RayTrace& trace, const RayTraceConfig* config = nullptr);
RayTrace ray_trace_from_json(const std::string& text);

std::string param_trace_to_json(const ParamTrace& trace, const VerifyReport* report = nullptr,
                                const ParamTraceConfig* config = nullptr);
ParamTrace param_trace_from_json(const std::string& text);

std::string verify_report_to_json(const VerifyReport& report);
std::string variation_report_to_json(const struct RayVariationReport& report);

/// Config file: one key=value per line, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_config_file(const std::string& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

}  // namespace expray
