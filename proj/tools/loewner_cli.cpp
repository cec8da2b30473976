#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "loewner/analysis.hpp"
#include "loewner/driver_spec.hpp"
#include "loewner/errors.hpp"
#include "loewner/io.hpp"
#include "loewner/parallel.hpp"
#include "loewner/solver.hpp"
#include "loewner/stochastic.hpp"

namespace fs = std::filesystem;
using namespace loewner;

namespace {

enum Exit { ok = 0, check_failed = 1, input_error = 2, numerical_error = 3 };

struct Options {
    std::string driver;
    std::optional<double> T;
    std::optional<std::size_t> steps;
    double eps = 1e-6;
    std::string window;
    std::string res;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool svg = false;
    std::vector<std::string> names;
    std::size_t jobs = 0;
    std::optional<double> refine;
    std::size_t stride = 1;
    double dense_tail = 0.0;
    bool no_trace = false;

    std::optional<double> k;
    std::optional<double> a;
    std::optional<double> r;
    std::optional<double> delta;
    double t0 = 0.0;
    std::size_t samples = 100;
    double tol = 1e-9;
    double tail = 0.001;
    double max_angle = 0.1;

    double alpha = 0.7;
    std::size_t n_t = 4096;
    double du = 0.0;

    std::string sweep_a;
    std::string sweep_r;
    std::string sweep_k;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    std::size_t pos = 0;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError("invalid number '" + item + "' in " + flag, pos);
        }
        pos += item.size() + 1;
    }
    return out;
}

Window parse_window(const std::string& text) {
    const auto v = parse_list(text, "--window");
    if (v.size() != 4) throw ParseError("--window needs x0,x1,y0,y1", 0);
    return {v[0], v[1], v[2], v[3]};
}

Resolution parse_resolution(const std::string& text) {
    const auto v = parse_list(text, "--res");
    if (v.size() != 2 || v[0] < 2 || v[1] < 2 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1])) {
        throw ParseError("--res needs two integers nx,ny >= 2", 0);
    }
    return {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1])};
}

SolverConfig solver_config(const Options& o) {
    SolverConfig c;
    c.n_steps = o.steps.value_or(1000);
    c.blowup_eps = o.eps;
    c.threads = o.jobs;
    c.refine_threshold = o.refine.value_or(0.0);
    c.sample_stride = o.stride;
    c.dense_tail = o.dense_tail;
    c.validate();
    return c;
}

DrivingFunction load_driver(const Options& o, const std::string& fallback = "") {
    const std::string spec = o.driver.empty() ? fallback : o.driver;
    if (spec.empty()) throw ParameterError("--driver is required");
    DrivingFunction d = parse_driver_spec(spec);
    if (o.T) {
        if (!(*o.T > 0.0) || *o.T > d.horizon() * (1.0 + 1e-12)) {
            throw DomainError("--T must lie in (0, horizon of the driver]");
        }
        if (*o.T < d.horizon()) d = transform(d, TransformSpec::restrict_to(*o.T)).with_label(spec);
    }
    return d;
}

void emit(const Options& o, const std::string& file, const std::string& content) {
    if (o.out.empty()) {
        std::cout << content;
    } else {
        atomic_write(fs::path(o.out) / file, content);
    }
}

std::string stem(const Options& o, const std::string& fallback) {
    return o.names.empty() ? fallback : o.names.front();
}

int run_trace(const Options& o) {
    const DrivingFunction d = load_driver(o);
    const TracePath trace = compute_trace(d, solver_config(o));
    const std::string base = stem(o, "trace");
    emit(o, base + ".csv", trace_csv(trace));
    if (o.svg) atomic_write(fs::path(o.out.empty() ? "." : o.out) / (base + ".svg"), trace_svg(trace));
    return ok;
}

int run_hull(const Options& o) {
    const DrivingFunction d = load_driver(o);
    const SolverConfig c = solver_config(o);
    const Window w = o.window.empty() ? Window{-1.0, 1.0, 0.0, 2.0} : parse_window(o.window);
    const Resolution res = o.res.empty() ? Resolution{200, 100} : parse_resolution(o.res);
    const HullRaster raster = hull_raster(d, d.horizon(), w, res, c, !o.no_trace);
    const std::string base = stem(o, "hull");
    emit(o, base + ".json", raster_json(raster));
    if (o.svg) atomic_write(fs::path(o.out.empty() ? "." : o.out) / (base + ".svg"), raster_svg(raster));
    return ok;
}

std::string power_spec(double a, double r) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "power:a=%.17g,r=%.17g,T=1", a, r);
    return buf;
}

CheckReport run_one_check(const std::string& name, const Options& o) {
    const SolverConfig c = solver_config(o);
    if (name == "capture") return check_capture_interval(o.k.value_or(4.0), c);
    if (name == "height") {
        const double k = o.k.value_or(20.0);
        char buf[64];
        std::snprintf(buf, sizeof buf, "sqrt:k=%.17g,T=1", k);
        return check_height_bound(load_driver(o, buf), k, c);
    }
    if (name == "tangential") {
        const double a = o.a.value_or(4.0);
        const double r = o.r.value_or(1.0 / 3.0);
        return fit_tangential_exponent(load_driver(o, power_spec(a, r)), r, c).report;
    }
    if (name == "simple") {
        const DrivingFunction d = load_driver(o, "sqrt:k=3,T=1");
        return check_simple_curve(compute_trace(d, c), o.tol);
    }
    if (name == "comparison") {
        return check_curvature_comparison(load_driver(o, power_spec(o.a.value_or(9.0), o.r.value_or(1.0 / 3.0))),
                                          o.t0, c);
    }
    if (name == "hypotheses") {
        const double r = o.r.value_or(1.0 / 3.0);
        const double a = o.a.value_or(3.0 * std::sqrt(1.0 - r) / r);
        const DrivingFunction d = load_driver(o, power_spec(a, r));
        return check_proposition_hypotheses(d, o.delta.value_or(a * r / (1.0 - r)), c);
    }
    if (name == "angle") {
        const DrivingFunction d = load_driver(o, power_spec(o.a.value_or(4.0), o.r.value_or(1.0 / 3.0)));
        // the terminal approach needs resolution near t = 1
        SolverConfig ca = c;
        ca.n_steps = o.steps.value_or(10000);
        ca.refine_threshold = o.refine.value_or(1.0);
        const TracePath trace = compute_trace(d, ca);
        CheckReport rep;
        rep.check = "angle";
        rep.params = {{"driver", d.describe()}, {"tail_fraction", o.tail}};
        rep.measured = {{"angle", approach_angle(trace, o.tail)}, {"terminal_height", trace.points.back().imag()}};
        rep.criteria = {{"angle", Criterion::Op::at_most, o.max_angle}};
        rep.solver_metadata = describe_config(ca);
        rep.finalize();
        return rep;
    }
    throw ParameterError("unknown check '" + name + "'");
}

int run_check(const Options& o) {
    if (o.names.empty()) throw ParameterError("--name is required");
    std::vector<CheckReport> reports;
    for (const auto& n : o.names) reports.push_back(run_one_check(n, o));
    const std::string doc = reports_json(reports);
    if (o.out.empty()) {
        std::cout << doc;
    } else {
        atomic_write(fs::path(o.out) / "checks.json", doc);
    }
    for (const auto& r : reports) {
        if (!r.pass) return check_failed;
    }
    return ok;
}

int run_curvature(const Options& o) {
    const DrivingFunction d = load_driver(o);
    if (o.samples < 1) throw ParameterError("--samples must be positive");
    std::vector<double> t(o.samples);
    std::vector<double> lc(o.samples);
    for (std::size_t i = 0; i < o.samples; ++i) {
        t[i] = d.horizon() * static_cast<double>(i) / static_cast<double>(o.samples);
        lc[i] = loewner_curvature(d, t[i]);
    }
    emit(o, stem(o, "curvature") + ".csv", curvature_csv(t, lc));
    return ok;
}

int run_subordinate(const Options& o) {
    if (!o.seed) throw ParameterError("--seed is required for stochastic paths");
    const double T = o.T.value_or(1.0);
    const double du = o.du > 0.0 ? o.du : default_du(o.alpha, T, o.n_t);
    const SubordinatorPath s = sample_subordinator_covering(o.alpha, T, du, *o.seed, 1.0);
    const InversePath e = invert_path(s, T, o.n_t);
    const std::string base = stem(o, "subordinator");
    if (o.out.empty()) {
        std::cout << inverse_csv(e);
    } else {
        atomic_write(fs::path(o.out) / (base + "_S.csv"), subordinator_csv(s));
        atomic_write(fs::path(o.out) / (base + "_E.csv"), inverse_csv(e));
    }
    nlohmann::ordered_json summary{{"alpha", o.alpha},   {"seed", *o.seed},
                                   {"du", du},           {"u_max", s.u_grid.back()},
                                   {"S_max", s.S_values.back()}, {"flat_fraction", flat_fraction(e)}};
    std::cerr << summary.dump() << "\n";
    return ok;
}

int run_sweep(const Options& o) {
    if (o.names.size() != 1) throw ParameterError("sweep needs exactly one --name");
    const std::string name = o.names.front();
    std::vector<Options> jobs;
    if (!o.sweep_k.empty()) {
        for (double k : parse_list(o.sweep_k, "--ks")) {
            Options j = o;
            j.k = k;
            jobs.push_back(j);
        }
    } else {
        const auto as = o.sweep_a.empty() ? std::vector<double>{o.a.value_or(4.0)} : parse_list(o.sweep_a, "--as");
        const auto rs = o.sweep_r.empty() ? std::vector<double>{o.r.value_or(1.0 / 3.0)} : parse_list(o.sweep_r, "--rs");
        for (double a : as) {
            for (double r : rs) {
                Options j = o;
                j.a = a;
                j.r = r;
                jobs.push_back(j);
            }
        }
    }
    std::vector<CheckReport> reports(jobs.size());
    // grid points run concurrently, each solver single-threaded
    parallel_for(jobs.size(), o.jobs, [&](std::size_t i) {
        jobs[i].jobs = 1;
        reports[i] = run_one_check(name, jobs[i]);
        if (!o.out.empty()) {
            atomic_write(fs::path(o.out) / ("sweep_" + name + "_" + std::to_string(i) + ".json"),
                         report_json(reports[i]));
        }
    });
    std::cout << reports_json(reports);
    for (const auto& r : reports) {
        if (!r.pass) return check_failed;
    }
    return ok;
}

void report_error(const std::string& kind, const std::string& message, std::optional<std::size_t> position = {}) {
    nlohmann::ordered_json j{{"error", kind}, {"message", message}};
    if (position) j["position"] = *position;
    std::cerr << j.dump() << "\n";
}

std::string help_footer() {
    std::string s = "\nDriver families (--driver):\n";
    for (const auto& h : driver_family_help()) s += "  " + h.usage + "\n";
    s += "Transforms (append to a driver spec):\n";
    for (const auto& h : transform_help()) s += "  " + h.usage + "\n";
    s += "Checks (--name): ";
    for (std::size_t i = 0; i < check_names().size(); ++i) s += (i ? ", " : "") + check_names()[i];
    s += "\nExit codes: 0 pass, 1 check failure, 2 input error, 3 numerical failure\n";
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chordal Loewner evolution toolkit"};
    app.footer(help_footer());
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* s) {
        s->add_option("--driver", o.driver, "Driver spec, e.g. power:a=4,r=0.3333,T=1");
        s->add_option("--T", o.T, "Final time (defaults to the driver horizon)");
        s->add_option("--steps", o.steps, "Trace steps / initial ODE resolution")->check(CLI::PositiveNumber);
        s->add_option("--eps", o.eps, "Swallow threshold")->check(CLI::PositiveNumber);
        s->add_option("--out", o.out, "Output directory (stdout when omitted)");
        s->add_option("--name", o.names, "Output stem, or check name(s) for check/sweep")->delimiter(',');
        s->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
        s->add_flag("--svg", o.svg, "Also write an SVG plot");
    };

    auto* trace = app.add_subcommand("trace", "Trace by slit-map composition, CSV t,re,im");
    common(trace);
    trace->add_option("--refine", o.refine, "Split steps with |dlambda|/sqrt(dt) above this");
    trace->add_option("--stride", o.stride, "Keep every n-th tip")->check(CLI::PositiveNumber);
    trace->add_option("--dense-tail", o.dense_tail, "Keep every tip in this final fraction")->check(CLI::Range(0.0, 1.0));

    auto* hull = app.add_subcommand("hull", "Raster of the hull at time T, JSON");
    common(hull);
    hull->add_option("--window", o.window, "x0,x1,y0,y1");
    hull->add_option("--res", o.res, "nx,ny");
    hull->add_flag("--no-trace", o.no_trace, "Do not add trace cells to the raster");

    auto check_opts = [&](CLI::App* s) {
        s->add_option("--k", o.k, "k for capture/height checks");
        s->add_option("--a", o.a, "Amplitude a of power drivers");
        s->add_option("--r", o.r, "Exponent r of power drivers");
        s->add_option("--delta", o.delta, "delta for the hypotheses check");
        s->add_option("--t0", o.t0, "Start time for the comparison check");
        s->add_option("--tol", o.tol, "Intersection tolerance for the simple check");
        s->add_option("--tail", o.tail, "Tail fraction for the angle check");
        s->add_option("--max-angle", o.max_angle, "Angle threshold (radians) for the angle check");
        s->add_option("--refine", o.refine, "Trace refinement threshold");
    };
    auto* check = app.add_subcommand("check", "Run named checks, JSON reports");
    common(check);
    check_opts(check);

    auto* curvature = app.add_subcommand("curvature", "Loewner curvature samples, CSV t,LC");
    common(curvature);
    curvature->add_option("--samples", o.samples, "Number of sample times on [0, T)");

    auto* sub = app.add_subcommand("subordinate", "Sample an alpha-stable subordinator and its inverse");
    common(sub);
    sub->add_option("--alpha", o.alpha, "Stability index in (0, 1)");
    sub->add_option("--seed", o.seed, "RNG seed (required)");
    sub->add_option("--n", o.n_t, "t-grid size")->check(CLI::PositiveNumber);
    sub->add_option("--du", o.du, "u step (default (4 T / n)^alpha)");

    auto* sweep = app.add_subcommand("sweep", "Run one check over a grid of (a, r) or k");
    common(sweep);
    check_opts(sweep);
    sweep->add_option("--as", o.sweep_a, "Comma-separated a values");
    sweep->add_option("--rs", o.sweep_r, "Comma-separated r values");
    sweep->add_option("--ks", o.sweep_k, "Comma-separated k values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        return input_error;
    }

    try {
        if (*trace) return run_trace(o);
        if (*hull) return run_hull(o);
        if (*check) return run_check(o);
        if (*curvature) return run_curvature(o);
        if (*sub) return run_subordinate(o);
        if (*sweep) return run_sweep(o);
    } catch (const ParseError& e) {
        report_error("parse", e.what(), e.position());
        return input_error;
    } catch (const InputError& e) {
        report_error("input", e.what());
        return input_error;
    } catch (const AmbiguousSwallowError& e) {
        report_error("ambiguous_swallow", e.what());
        return numerical_error;
    } catch (const NumericalError& e) {
        report_error("numerical", e.what());
        return numerical_error;
    }
    return input_error;
}
