// Command-line front end: ray evaluation, tracing, verification, variation
// numbers, and escape-time renderings of both planes.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "expray/address.hpp"
#include "expray/dynamics.hpp"
#include "expray/io.hpp"
#include "expray/param.hpp"
#include "expray/ray.hpp"
#include "expray/render.hpp"
#include "expray/selfcheck.hpp"
#include "expray/variation.hpp"

namespace {

using namespace expray;

struct Settings {
    std::string address;
    std::string kappa = "0,0";
    double t = 25.0;
    std::string t_range;
    std::string out;
    std::string format;  // csv | json | ppm (defaults per subcommand)
    double seed_h = 50.0;

    NewtonConfig newton;
    ParamTraceConfig trace;
    RayTraceConfig ray_trace;

    std::string center = "0,0";
    double width = 4.0;
    std::string size = "400x400";
    int max_iter = 256;
    double escape_re = 50.0;

    double t_cap = 28.0;
    SelfcheckOptions selfcheck;
};

Complex parse_complex(const std::string& text, const char* flag) {
    const auto comma = text.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(text), 0.0};
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "expected re,im but got '" + text + "'");
    }
}

std::pair<double, double> parse_range(const std::string& text, const char* flag) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError(flag, "expected lo:hi but got '" + text + "'");
    try {
        const double lo = std::stod(text.substr(0, colon));
        const double hi = std::stod(text.substr(colon + 1));
        if (!(lo < hi)) throw CLI::ValidationError(flag, "range must satisfy lo < hi");
        return {lo, hi};
    } catch (const CLI::ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "expected lo:hi but got '" + text + "'");
    }
}

std::pair<int, int> parse_size(const std::string& text, const char* flag) {
    const auto x = text.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument(text);
        const int w = std::stoi(text.substr(0, x));
        const int h = std::stoi(text.substr(x + 1));
        if (w < 1 || h < 1) throw std::invalid_argument(text);
        return {w, h};
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "expected WxH but got '" + text + "'");
    }
}

ExternalAddress address_arg(const Settings& st) {
    if (st.address.empty())
        throw CLI::ValidationError("--address", "an address literal is required");
    try {
        return parse_address(st.address);
    } catch (const Error& e) {
        throw CLI::ValidationError("--address", e.what());
    }
}

void write_text(const std::string& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::DomainError, "cannot open '" + path + "' for writing");
    out << body;
}

// Config file keys override built-in defaults; command-line flags override both.
void apply_config(Settings& st, const std::string& path) {
    const auto kv = parse_config_file(path);
    for (const auto& [key, value] : kv) {
        auto num = [&] { return std::stod(value); };
        try {
            if (key == "ray.h") st.seed_h = num();
            else if (key == "ray.spatial_step") st.ray_trace.max_spatial_step = num();
            else if (key == "newton.residual_tol") st.newton.residual_tol = num();
            else if (key == "newton.max_iters") st.newton.max_iters = static_cast<int>(num());
            else if (key == "newton.min_derivative") st.newton.min_derivative = num();
            else if (key == "trace.max_kappa_step") st.trace.max_kappa_step = num();
            else if (key == "trace.min_dt") st.trace.min_dt = num();
            else if (key == "trace.initial_dt") st.trace.initial_dt = num();
            else if (key == "render.max_iter") st.max_iter = static_cast<int>(num());
            else if (key == "render.escape_re") st.escape_re = num();
            else if (key == "variation.t_cap") st.t_cap = num();
            else if (key == "verify.samples") st.selfcheck.samples = static_cast<int>(num());
            else if (key == "verify.seed") st.selfcheck.seed = static_cast<uint64_t>(num());
            else if (key == "address") st.address = value;
            else if (key == "kappa") st.kappa = value;
            else if (key == "format") st.format = value;
            else throw CLI::ValidationError("--config", "unknown key '" + key + "'");
        } catch (const CLI::ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw CLI::ValidationError("--config", "bad value for '" + key + "'");
        }
    }
}

std::string format_or(const Settings& st, const char* fallback) {
    return st.format.empty() ? fallback : st.format;
}

int cmd_eval(const Settings& st) {
    const ExternalAddress s = address_arg(st);
    const Complex kappa = parse_complex(st.kappa, "--kappa");
    const RaySample smp = eval_ray(kappa, s, st.t, st.seed_h);
    std::printf("t=%.17g re=%.17g im=%.17g residual=%.17g depth=%d\n", smp.t, smp.z.real(),
                smp.z.imag(), smp.residual.value_or(0.0), smp.depth_used);
    return 0;
}

int cmd_trace_dyn(const Settings& st) {
    const ExternalAddress s = address_arg(st);
    const Complex kappa = parse_complex(st.kappa, "--kappa");
    const auto [lo, hi] = parse_range(st.t_range, "--t-range");
    RayTraceConfig cfg = st.ray_trace;
    cfg.H = st.seed_h;
    const RayTrace trace = trace_ray(kappa, s, lo, hi, cfg);
    const std::string fmt = format_or(st, "csv");
    if (fmt == "json") {
        write_text(st.out, ray_trace_to_json(trace, &cfg));
    } else if (fmt == "csv") {
        std::ostringstream body;
        write_ray_trace_csv(trace, body);
        write_text(st.out, body.str());
    } else {
        throw CLI::ValidationError("--format", "trace-dyn writes csv or json");
    }
    return trace.failure ? 1 : 0;
}

int cmd_trace_param(const Settings& st) {
    const ExternalAddress s = address_arg(st);
    const auto [lo, hi] = parse_range(st.t_range, "--t-range");
    ParamTraceConfig cfg = st.trace;
    cfg.newton = st.newton;
    cfg.newton.H = st.seed_h;
    const ParamTrace trace = trace_parameter_ray(s, hi, lo, cfg);
    const std::string fmt = format_or(st, "csv");
    if (fmt == "json") {
        const VerifyReport report = verify_trace(trace);
        write_text(st.out, param_trace_to_json(trace, &report, &cfg));
    } else if (fmt == "csv") {
        std::ostringstream body;
        write_param_trace_csv(trace, body);
        write_text(st.out, body.str());
    } else {
        throw CLI::ValidationError("--format", "trace-param writes csv or json");
    }
    return trace.stopped_early ? 1 : 0;
}

int cmd_verify(const Settings& st) {
    return run_selfcheck(st.selfcheck, std::cout) == 0 ? 0 : 1;
}

int cmd_variation(const Settings& st) {
    const ExternalAddress s = address_arg(st);
    const Complex kappa = parse_complex(st.kappa, "--kappa");
    const RayVariationReport report =
        dynamic_ray_variation(kappa, s, st.t, st.t_cap, st.seed_h);
    std::printf("alpha=%.12g N=%d bound=%g verified_from=%.6g verified_to=%.6g\n", report.alpha,
                report.contraction_level, report.bound, report.verified_from,
                report.verified_to);
    if (!st.out.empty()) write_text(st.out, variation_report_to_json(report));
    return report.alpha <= report.bound ? 0 : 1;
}

ImageSpec image_spec(const Settings& st) {
    ImageSpec spec;
    spec.center = parse_complex(st.center, "--center");
    spec.width_units = st.width;
    std::tie(spec.width_px, spec.height_px) = parse_size(st.size, "--size");
    spec.max_iter = st.max_iter;
    spec.escape_re = st.escape_re;
    return spec;
}

int cmd_render_param(const Settings& st) {
    if (!st.format.empty() && st.format != "ppm")
        throw CLI::ValidationError("--format", "renders write ppm");
    const ImageSpec spec = image_spec(st);
    std::vector<ParamTrace> overlays;
    if (!st.address.empty()) {
        const ExternalAddress s = address_arg(st);
        const auto [lo, hi] = parse_range(st.t_range.empty() ? "1:40" : st.t_range, "--t-range");
        ParamTraceConfig cfg = st.trace;
        cfg.newton = st.newton;
        overlays.push_back(trace_parameter_ray(s, hi, lo, cfg));
    }
    write_ppm(render_parameter_plane(spec, overlays), st.out.empty() ? "param.ppm" : st.out);
    return 0;
}

int cmd_render_dyn(const Settings& st) {
    if (!st.format.empty() && st.format != "ppm")
        throw CLI::ValidationError("--format", "renders write ppm");
    const Complex kappa = parse_complex(st.kappa, "--kappa");
    const ImageSpec spec = image_spec(st);
    std::vector<RayTrace> overlays;
    if (!st.address.empty()) {
        const ExternalAddress s = address_arg(st);
        const auto [lo, hi] = parse_range(st.t_range.empty() ? "1:30" : st.t_range, "--t-range");
        RayTraceConfig cfg = st.ray_trace;
        cfg.H = st.seed_h;
        overlays.push_back(trace_ray(kappa, s, lo, hi, cfg));
    }
    write_ppm(render_dynamic_plane(kappa, spec, overlays), st.out.empty() ? "dyn.ppm" : st.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Settings st;

    // --config is applied before regular parsing so flags can override it.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                apply_config(st, argv[i + 1]);
            } catch (const CLI::ValidationError& e) {
                std::cerr << e.what() << "\n";
                return 2;
            } catch (const Error& e) {
                std::cerr << "--config: " << e.what() << "\n";
                return 2;
            }
        }
    }

    CLI::App app{"dynamic and parameter rays of the exponential family exp(z + kappa)"};
    app.require_subcommand(1);
    std::string config_path;

    auto add_common = [&](CLI::App* cmd, bool with_kappa) {
        cmd->add_option("--address", st.address, "address literal, e.g. \"|0\" or \"1|2 0\"");
        if (with_kappa) cmd->add_option("--kappa", st.kappa, "parameter, re,im");
        cmd->add_option("--out", st.out, "output path ('-' for stdout)");
        cmd->add_option("--format", st.format, "csv | json | ppm");
        cmd->add_option("--seed-h", st.seed_h, "seeding height for the pullback");
        cmd->add_option("--config", config_path, "key=value config file");
    };

    CLI::App* eval = app.add_subcommand("eval", "evaluate one dynamic ray point");
    add_common(eval, true);
    eval->add_option("--t", st.t, "potential");

    CLI::App* tdyn = app.add_subcommand("trace-dyn", "trace a dynamic ray");
    add_common(tdyn, true);
    tdyn->add_option("--t-range", st.t_range, "potential range lo:hi")->required();
    tdyn->add_option("--step", st.ray_trace.max_spatial_step, "max spatial step");

    CLI::App* tpar = app.add_subcommand("trace-param", "trace a parameter ray");
    add_common(tpar, false);
    tpar->add_option("--t-range", st.t_range, "potential range lo:hi")->required();
    tpar->add_option("--kappa-step", st.trace.max_kappa_step, "max kappa step");
    tpar->add_option("--residual-tol", st.newton.residual_tol, "newton residual tolerance");

    CLI::App* verify = app.add_subcommand("verify", "run the invariant battery");
    verify->add_option("--config", config_path, "key=value config file");
    verify->add_option("--samples", st.selfcheck.samples, "cases per suite");
    verify->add_option("--seed", st.selfcheck.seed, "random seed");

    CLI::App* var = app.add_subcommand("variation", "variation number of a dynamic ray");
    add_common(var, true);
    var->add_option("--t", st.t, "lower potential t0");
    var->add_option("--t-cap", st.t_cap, "upper sampling potential");

    auto add_view = [&](CLI::App* cmd) {
        cmd->add_option("--t-range", st.t_range, "overlay ray potential range lo:hi");
        cmd->add_option("--center", st.center, "view center, re,im");
        cmd->add_option("--width", st.width, "view width in plane units");
        cmd->add_option("--size", st.size, "pixels, WxH");
        cmd->add_option("--max-iter", st.max_iter, "iteration budget");
        cmd->add_option("--escape-re", st.escape_re, "escape threshold on Re");
    };

    CLI::App* rpar = app.add_subcommand("render-param", "escape-time image of the parameter plane");
    add_common(rpar, false);
    add_view(rpar);

    CLI::App* rdyn = app.add_subcommand("render-dyn", "escape-time image of a dynamical plane");
    add_common(rdyn, true);
    add_view(rdyn);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (eval->parsed()) return cmd_eval(st);
        if (tdyn->parsed()) return cmd_trace_dyn(st);
        if (tpar->parsed()) return cmd_trace_param(st);
        if (verify->parsed()) return cmd_verify(st);
        if (var->parsed()) return cmd_variation(st);
        if (rpar->parsed()) return cmd_render_param(st);
        if (rdyn->parsed()) return cmd_render_dyn(st);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
