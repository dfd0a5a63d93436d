#include "expray/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "expray/variation.hpp"

namespace expray {

namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

double to_double(const std::string& text) {
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        raise(Errc::ParseError, "bad numeric field '" + text + "'");
    }
}

json address_json(const ExternalAddress& s) { return format_address(s); }

}  // namespace

void write_ray_trace_csv(const RayTrace& trace, std::ostream& out) {
    out << "t,re,im,residual,depth\n";
    for (const RaySample& smp : trace.samples)
        out << num(smp.t) << ',' << num(smp.z.real()) << ',' << num(smp.z.imag()) << ','
            << num(smp.residual.value_or(0.0)) << ',' << smp.depth_used << '\n';
}

RayTrace read_ray_trace_csv(std::istream& in) {
    RayTrace trace;
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,re,im", 0) != 0)
        raise(Errc::ParseError, "missing ray trace CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) raise(Errc::ParseError, "expected 5 CSV fields");
        RaySample smp;
        smp.t = to_double(fields[0]);
        smp.z = {to_double(fields[1]), to_double(fields[2])};
        smp.residual = to_double(fields[3]);
        smp.depth_used = static_cast<int>(to_double(fields[4]));
        trace.samples.push_back(smp);
    }
    return trace;
}

void write_param_trace_csv(const ParamTrace& trace, std::ostream& out) {
    out << "t,re_kappa,im_kappa,residual,iters\n";
    for (const ParamSample& smp : trace.samples)
        out << num(smp.t) << ',' << num(smp.kappa.real()) << ',' << num(smp.kappa.imag()) << ','
            << num(smp.residual) << ',' << smp.newton_iters << '\n';
}

ParamTrace read_param_trace_csv(std::istream& in) {
    ParamTrace trace;
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,re_kappa", 0) != 0)
        raise(Errc::ParseError, "missing parameter trace CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) raise(Errc::ParseError, "expected 5 CSV fields");
        ParamSample smp;
        smp.t = to_double(fields[0]);
        smp.kappa = {to_double(fields[1]), to_double(fields[2])};
        smp.residual = to_double(fields[3]);
        smp.newton_iters = static_cast<int>(to_double(fields[4]));
        trace.samples.push_back(smp);
    }
    return trace;
}

void write_orbit_csv(const OrbitRecord& orbit, std::ostream& out) {
    out << "n,re,im\n";
    for (size_t n = 0; n < orbit.points.size(); ++n)
        out << n << ',' << num(orbit.points[n].real()) << ',' << num(orbit.points[n].imag())
            << '\n';
}

std::string ray_trace_to_json(const RayTrace& trace, const RayTraceConfig* config) {
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "dynamic_ray";
    doc["address"] = address_json(trace.address);
    if (trace.kappa) doc["kappa"] = {trace.kappa->real(), trace.kappa->imag()};
    if (config)
        doc["config"] = {{"max_spatial_step", config->max_spatial_step},
                         {"min_dt", config->min_dt},
                         {"seed_h", config->H}};
    json samples = json::array();
    for (const RaySample& smp : trace.samples) {
        json row;
        row["t"] = smp.t;
        row["re"] = smp.z.real();
        row["im"] = smp.z.imag();
        if (smp.residual) row["residual"] = *smp.residual;
        row["depth"] = smp.depth_used;
        if (smp.dz_dt) row["dz_dt"] = {smp.dz_dt->real(), smp.dz_dt->imag()};
        if (smp.dz_dkappa) row["dz_dkappa"] = {smp.dz_dkappa->real(), smp.dz_dkappa->imag()};
        samples.push_back(std::move(row));
    }
    doc["samples"] = std::move(samples);
    doc["diagnostics"] = {{"refinement_steps", trace.refinement_steps},
                          {"max_residual_bound_ratio", trace.max_residual_bound_ratio}};
    if (trace.failure)
        doc["failure"] = {{"t", trace.failure->t}, {"message", trace.failure->message}};
    return doc.dump(2);
}

RayTrace ray_trace_from_json(const std::string& text) {
    RayTrace trace;
    const json doc = json::parse(text);
    if (doc.value("schema_version", 0) != 1)
        raise(Errc::ParseError, "unsupported schema_version");
    trace.address = parse_address(doc.at("address").get<std::string>());
    if (doc.contains("kappa"))
        trace.kappa = Complex{doc["kappa"][0].get<double>(), doc["kappa"][1].get<double>()};
    for (const json& row : doc.at("samples")) {
        RaySample smp;
        smp.t = row.at("t").get<double>();
        smp.z = {row.at("re").get<double>(), row.at("im").get<double>()};
        if (row.contains("residual")) smp.residual = row["residual"].get<double>();
        smp.depth_used = row.value("depth", 0);
        trace.samples.push_back(smp);
    }
    return trace;
}

std::string verify_report_to_json(const VerifyReport& report) {
    json doc;
    doc["samples_checked"] = report.samples_checked;
    doc["informational_radius_misses"] = report.informational_radius_misses;
    doc["pass"] = report.pass();
    json v = json::array();
    for (const VerifyViolation& violation : report.violations)
        v.push_back({{"sample", violation.sample_index},
                     {"check", std::string(1, violation.check)},
                     {"detail", violation.detail}});
    doc["violations"] = std::move(v);
    return doc.dump(2);
}

std::string param_trace_to_json(const ParamTrace& trace, const VerifyReport* report,
                                const ParamTraceConfig* config) {
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "parameter_ray";
    doc["address"] = address_json(trace.address);
    if (config)
        doc["config"] = {{"residual_tol", config->newton.residual_tol},
                         {"max_iters", config->newton.max_iters},
                         {"max_kappa_step", config->max_kappa_step},
                         {"min_dt", config->min_dt}};
    json samples = json::array();
    for (const ParamSample& smp : trace.samples)
        samples.push_back({{"t", smp.t},
                           {"re_kappa", smp.kappa.real()},
                           {"im_kappa", smp.kappa.imag()},
                           {"residual", smp.residual},
                           {"iters", smp.newton_iters},
                           {"tail_bound_ok", smp.tail_bound_ok},
                           {"radius_bound_ok", smp.radius_bound_ok}});
    doc["samples"] = std::move(samples);
    doc["stopped_early"] = trace.stopped_early;
    if (trace.stopped_early) doc["stop_reason"] = trace.stop_reason;
    if (report) doc["verify"] = json::parse(verify_report_to_json(*report));
    return doc.dump(2);
}

ParamTrace param_trace_from_json(const std::string& text) {
    ParamTrace trace;
    const json doc = json::parse(text);
    if (doc.value("schema_version", 0) != 1)
        raise(Errc::ParseError, "unsupported schema_version");
    trace.address = parse_address(doc.at("address").get<std::string>());
    for (const json& row : doc.at("samples")) {
        ParamSample smp;
        smp.t = row.at("t").get<double>();
        smp.kappa = {row.at("re_kappa").get<double>(), row.at("im_kappa").get<double>()};
        smp.residual = row.at("residual").get<double>();
        smp.newton_iters = row.value("iters", 0);
        smp.tail_bound_ok = row.value("tail_bound_ok", true);
        smp.radius_bound_ok = row.value("radius_bound_ok", true);
        trace.samples.push_back(smp);
    }
    trace.stopped_early = doc.value("stopped_early", false);
    trace.stop_reason = doc.value("stop_reason", "");
    return trace;
}

std::string variation_report_to_json(const RayVariationReport& report) {
    json doc;
    doc["alpha"] = report.alpha;
    doc["contraction_level"] = report.contraction_level;
    doc["bound"] = report.bound;
    doc["verified_from"] = report.verified_from;
    doc["verified_to"] = report.verified_to;
    return doc.dump(2);
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    auto trim = [](std::string v) {
        const auto a = v.find_first_not_of(" \t\r");
        const auto b = v.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            raise(Errc::ParseError, "config line without '=': " + line);
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::ParseError, "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace expray
