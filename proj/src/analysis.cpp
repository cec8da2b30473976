#include "loewner/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "loewner/errors.hpp"
#include "loewner/parallel.hpp"

namespace loewner {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

CheckReport new_report(std::string name, const SolverConfig& config) {
    CheckReport r;
    r.check = std::move(name);
    r.solver_metadata = describe_config(config);
    return r;
}

}  // namespace

bool CheckReport::evaluate() const {
    for (const auto& c : criteria) {
        const auto it = measured.find(c.quantity);
        if (it == measured.end() || std::isnan(it->second) || !c.holds(it->second)) return false;
    }
    return true;
}

bool CheckReport::finalize() {
    pass = evaluate();
    return pass;
}

std::map<std::string, ParamValue> describe_config(const SolverConfig& config) {
    return {
        {"n_steps", static_cast<double>(config.n_steps)},
        {"blowup_eps", config.blowup_eps},
        {"ode_substeps", static_cast<double>(config.ode_substeps)},
        {"max_step", config.max_step},
        {"rtol", config.rtol},
        {"tau_max", config.tau_max},
        {"tau_max_bisection", config.tau_max_bisection},
        {"interval_tol", config.interval_tol},
        {"refine_threshold", config.refine_threshold},
        {"refine_max_depth", static_cast<double>(config.refine_max_depth)},
    };
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"capture", "height",     "tangential", "simple",
                                                "comparison", "hypotheses", "angle"};
    return names;
}

// ---------------------------------------------------------------- capture

CheckReport check_capture_interval(double k, const SolverConfig& config, const CaptureOptions& options) {
    config.validate();
    if (!(k >= 4.0)) throw ParameterError("capture interval needs k >= 4");
    if (!(options.resolution > 0.0) || !(options.margin >= 0.0)) throw ParameterError("invalid capture grid");

    const DrivingFunction driver = DrivingFunction::sqrt_end(k, 1.0);
    const double left = 0.5 * (k - std::sqrt(k * k - 16.0));
    const double lo = left + options.margin;
    const double hi = k - options.margin;
    const auto n = hi > lo ? static_cast<std::size_t>(std::floor((hi - lo) / options.resolution)) + 1 : 0;

    std::vector<std::uint8_t> state(n, 0);  // 0 swallowed, 1 survived, 2 ambiguous
    parallel_for(n, config.threads, [&](std::size_t i) {
        const double x = lo + static_cast<double>(i) * options.resolution;
        try {
            state[i] = classify_point(Complex(x), driver, config).swallowed ? 0 : 1;
        } catch (const AmbiguousSwallowError&) {
            state[i] = 2;
        }
    });
    const auto survivors = std::count(state.begin(), state.end(), std::uint8_t{1});
    const auto ambiguous = std::count(state.begin(), state.end(), std::uint8_t{2});

    const RealInterval measured = locate_real_interval(driver, config);

    CheckReport r = new_report("capture", config);
    r.params = {{"driver", driver.describe()},
                {"k", k},
                {"resolution", options.resolution},
                {"margin", options.margin}};
    r.measured = {{"predicted_left", left},
                  {"predicted_right", k},
                  {"grid_points", static_cast<double>(n)},
                  {"unswallowed_points", static_cast<double>(survivors)},
                  {"ambiguous_points", static_cast<double>(ambiguous)},
                  {"left_endpoint", measured.left},
                  {"right_endpoint", measured.right},
                  {"left_endpoint_error", std::abs(measured.left - left)}};
    r.criteria = {{"unswallowed_points", Criterion::Op::at_most, 0.0},
                  {"ambiguous_points", Criterion::Op::at_most, 0.0}};
    if (ambiguous > 0) r.notes.push_back(std::to_string(ambiguous) + " grid points could not be classified");
    if (survivors > 0) {
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i] == 1) {
                r.notes.push_back("first surviving point x = " + fmt(lo + static_cast<double>(i) * options.resolution));
                break;
            }
        }
    }
    r.finalize();
    return r;
}

// ----------------------------------------------------------------- height

void verify_height_hypotheses(const DrivingFunction& driver, double k, std::size_t points) {
    if (points < 2) throw ParameterError("verification grid needs at least two points");
    const double T = driver.horizon();
    if (std::abs(T - 1.0) > 1e-12) throw PreconditionError("height bound is stated for drivers on [0, 1]");
    const double end = driver.eval(1.0);
    if (std::abs(end) > 1e-12) throw PreconditionError("driver must end at 0, found lambda(1) = " + fmt(end));
    for (std::size_t i = 0; i + 1 < points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points - 1);
        const double value = driver.eval(t);
        const double bound = k * std::sqrt(1.0 - t);
        if (value < bound - 1e-12 * (1.0 + std::abs(bound))) {
            throw PreconditionError("lambda(t) < k sqrt(1 - t) at t = " + fmt(t));
        }
    }
}

CheckReport check_height_bound(const DrivingFunction& driver, double k, const SolverConfig& config,
                               const HeightOptions& options) {
    config.validate();
    if (!(k > 0.0)) throw ParameterError("k must be positive");
    verify_height_hypotheses(driver, k, options.verification_points);

    const double bound = 26.0 / k;
    const Window window{-options.window_left, 2.0, bound, std::max(options.height, bound + 1.0)};
    const HullRaster raster = hull_raster(driver, 1.0, window, options.resolution, config, true);

    CheckReport r = new_report("height", config);
    r.params = {{"driver", driver.describe()},
                {"k", k},
                {"window_x0", window.x0},
                {"window_x1", window.x1},
                {"window_y0", window.y0},
                {"window_y1", window.y1},
                {"nx", static_cast<double>(options.resolution.nx)},
                {"ny", static_cast<double>(options.resolution.ny)}};
    r.measured = {{"height_bound", bound},
                  {"member_cells", static_cast<double>(raster.member_count())},
                  {"unknown_cells", static_cast<double>(raster.unknown_cells)}};
    r.criteria = {{"member_cells", Criterion::Op::at_most, 0.0}, {"unknown_cells", Criterion::Op::at_most, 0.0}};
    if (bound >= 2.0) r.notes.push_back("trivially satisfied: the bound is at least 2, the largest possible hull height at t = 1");
    r.finalize();
    return r;
}

// ------------------------------------------------------------- tangential

EnvelopeFit fit_envelope(const std::vector<EnvelopeSample>& samples, double p, double theory_exponent,
                         double window_lo, double window_hi) {
    EnvelopeFit fit;
    fit.p = p;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    for (const auto& s : samples) {
        const double d = s.x - p;
        if (d > 0.0 && d >= window_lo && d <= window_hi && s.y > 0.0) fit.samples.push_back(s);
    }
    const std::size_t n = fit.samples.size();
    if (n < 2) throw InsufficientDataError("envelope fit needs at least two samples");

    double mx = 0.0;
    double my = 0.0;
    for (const auto& s : fit.samples) {
        mx += std::log(s.x - p);
        my += std::log(s.y);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : fit.samples) {
        const double dx = std::log(s.x - p) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(s.y) - my);
    }
    if (!(sxx > 0.0)) throw InsufficientDataError("envelope samples share a single abscissa");
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.coefficient = std::exp(intercept);
    double ss = 0.0;
    for (const auto& s : fit.samples) {
        const double e = std::log(s.y) - (intercept + fit.exponent * std::log(s.x - p));
        ss += e * e;
        fit.envelope_constant = std::max(fit.envelope_constant, s.y / std::pow(s.x - p, theory_exponent));
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

double hull_boundary_height(const DrivingFunction& driver, double x, const SolverConfig& config,
                            double y_tolerance) {
    if (!classify_point(Complex(x), driver, config).swallowed) return 0.0;
    double lo = 0.0;
    double hi = 2.01 * std::sqrt(driver.horizon());
    for (int it = 0; it < 400 && hi - lo > y_tolerance * hi && hi > 1e-300; ++it) {
        const double mid = 0.5 * (lo + hi);
        (classify_point(Complex(x, mid), driver, config).swallowed ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

TangentialResult fit_tangential_exponent(const DrivingFunction& driver, double r, const SolverConfig& config,
                                         const TangentialOptions& options) {
    config.validate();
    if (!(r > 0.0 && r < 0.5)) throw ParameterError("r must lie in (0, 1/2)");
    if (options.levels < 1) throw ParameterError("levels must be positive");

    const double T = driver.horizon();
    if (std::abs(T - 1.0) > 1e-12) throw PreconditionError("tangential bound is stated for drivers on [0, 1]");
    if (std::abs(driver.eval(1.0)) > 1e-12) throw PreconditionError("driver must end at 0");
    double a_eff = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < options.verification_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(options.verification_points - 1);
        a_eff = std::min(a_eff, driver.eval(t) / std::pow(1.0 - t, r));
    }
    if (a_eff < 4.0 - 1e-9) {
        throw PreconditionError("lambda(t) >= a (1 - t)^r fails for every a >= 4; best a = " + fmt(a_eff));
    }

    const double p = locate_real_interval(driver, config).left;
    const double width = options.width > 0.0 ? options.width : 0.25 * (driver.eval(0.0) - p);
    std::vector<EnvelopeSample> ladder(static_cast<std::size_t>(options.levels));
    parallel_for(ladder.size(), config.threads, [&](std::size_t j) {
        const double x = p + std::ldexp(width, -static_cast<int>(j));
        ladder[j] = {x, hull_boundary_height(driver, x, config, options.y_tolerance)};
    });
    std::vector<EnvelopeSample> usable;
    for (const auto& s : ladder) {
        if (s.y >= options.y_floor) usable.push_back(s);
    }
    if (usable.size() < 4) {
        throw InsufficientDataError("only " + std::to_string(usable.size()) + " usable boundary samples near p");
    }
    const double theory = 2.0 - 2.0 * r;
    EnvelopeFit fit = fit_envelope(usable, p, theory);

    std::size_t violations = 0;
    for (const auto& s : fit.samples) {
        const double predicted = std::log(fit.coefficient) + fit.exponent * std::log(s.x - p);
        if (std::log(s.y) - predicted > 3.0 * fit.residual + 1e-9) ++violations;
    }

    CheckReport rep = new_report("tangential", config);
    rep.params = {{"driver", driver.describe()},
                  {"r", r},
                  {"width", width},
                  {"levels", static_cast<double>(options.levels)},
                  {"y_tolerance", options.y_tolerance},
                  {"y_floor", options.y_floor}};
    rep.measured = {{"p", p},
                    {"a_effective", a_eff},
                    {"exponent", fit.exponent},
                    {"theory_exponent", theory},
                    {"exponent_deficit", theory - fit.exponent},
                    {"coefficient", fit.coefficient},
                    {"envelope_constant", fit.envelope_constant},
                    {"residual", fit.residual},
                    {"samples", static_cast<double>(fit.samples.size())},
                    {"envelope_violations", static_cast<double>(violations)}};
    rep.criteria = {{"exponent_deficit", Criterion::Op::at_most, options.exponent_tolerance},
                    {"envelope_violations", Criterion::Op::at_most, 0.0}};
    rep.notes.push_back("exponent tolerance " + fmt(options.exponent_tolerance));
    rep.finalize();
    return {std::move(fit), std::move(rep)};
}

// ----------------------------------------------------------------- simple

namespace {

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

int orientation(Complex a, Complex b, Complex c) {
    const double v = cross(b - a, c - a);
    const double scale = std::abs(b - a) * std::abs(c - a);
    if (std::abs(v) <= 1e-14 * scale) return 0;
    return v > 0.0 ? 1 : -1;
}

bool on_segment(Complex a, Complex b, Complex c) {
    return std::min(a.real(), b.real()) <= c.real() && c.real() <= std::max(a.real(), b.real()) &&
           std::min(a.imag(), b.imag()) <= c.imag() && c.imag() <= std::max(a.imag(), b.imag());
}

bool segments_cross(Complex a, Complex b, Complex c, Complex d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

double point_segment_distance(Complex p, Complex a, Complex b) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    const double s = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + s * ab));
}

double segment_distance(Complex a, Complex b, Complex c, Complex d) {
    if (segments_cross(a, b, c, d)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d), point_segment_distance(c, a, b),
                     point_segment_distance(d, a, b)});
}

}  // namespace

CheckReport check_simple_curve(const TracePath& trace, double tolerance) {
    if (trace.points.empty()) throw InsufficientDataError("trace is empty");
    if (tolerance < 0.0) throw ParameterError("tolerance must be nonnegative");
    const auto& z = trace.points;
    const std::size_t segs = z.size() > 1 ? z.size() - 1 : 0;

    std::vector<double> arc(z.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 1; i < z.size(); ++i) {
        total += std::abs(z[i] - z[i - 1]);
        arc[i] = total;
    }
    const double mean = segs > 0 ? total / segs : 0.0;
    const double cell = std::max({tolerance, 2.0 * mean, 1e-12});

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    auto key = [](std::int64_t i, std::int64_t j) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
    };
    auto cell_range = [&](std::size_t s, std::int64_t& i0, std::int64_t& i1, std::int64_t& j0, std::int64_t& j1) {
        const Complex a = z[s];
        const Complex b = z[s + 1];
        i0 = static_cast<std::int64_t>(std::floor((std::min(a.real(), b.real()) - tolerance) / cell));
        i1 = static_cast<std::int64_t>(std::floor((std::max(a.real(), b.real()) + tolerance) / cell));
        j0 = static_cast<std::int64_t>(std::floor((std::min(a.imag(), b.imag()) - tolerance) / cell));
        j1 = static_cast<std::int64_t>(std::floor((std::max(a.imag(), b.imag()) + tolerance) / cell));
    };

    std::size_t hits = 0;
    std::size_t first_i = 0;
    std::size_t first_j = 0;
    std::unordered_set<std::uint64_t> tested;
    for (std::size_t s = 0; s < segs; ++s) {
        std::int64_t i0, i1, j0, j1;
        cell_range(s, i0, i1, j0, j1);
        if ((i1 - i0 + 1) * (j1 - j0 + 1) > 1'000'000) throw InsufficientDataError("trace segment too long to scan");
        tested.clear();
        bool hit = false;
        for (std::int64_t i = i0; i <= i1 && !hit; ++i) {
            for (std::int64_t j = j0; j <= j1 && !hit; ++j) {
                const auto it = grid.find(key(i, j));
                if (it == grid.end()) continue;
                for (const std::size_t o : it->second) {
                    if (o + 1 >= s || !tested.insert(o).second) continue;
                    const bool crosses = segments_cross(z[o], z[o + 1], z[s], z[s + 1]);
                    const bool near = tolerance > 0.0 && arc[s] - arc[o + 1] > 2.0 * tolerance &&
                                      segment_distance(z[o], z[o + 1], z[s], z[s + 1]) < tolerance;
                    if (crosses || near) {
                        if (hits == 0) {
                            first_i = o;
                            first_j = s;
                        }
                        ++hits;
                        hit = true;
                        break;
                    }
                }
            }
        }
        for (std::int64_t i = i0; i <= i1; ++i) {
            for (std::int64_t j = j0; j <= j1; ++j) grid[key(i, j)].push_back(s);
        }
    }

    const double end_height = z.back().imag();
    CheckReport r;
    r.check = "simple";
    r.params = {{"tolerance", tolerance},
                {"samples", static_cast<double>(z.size())},
                {"refine_threshold", trace.refine_threshold}};
    r.measured = {{"intersections", static_cast<double>(hits)},
                  {"terminal_height", end_height},
                  {"terminates_on_real", end_height <= tolerance ? 1.0 : 0.0}};
    r.criteria = {{"intersections", Criterion::Op::at_most, 0.0}};
    if (hits > 0) {
        r.measured["first_intersection_t0"] = trace.times[first_i];
        r.measured["first_intersection_t1"] = trace.times[first_j];
        r.notes.push_back("segment starting at t = " + fmt(trace.times[first_j]) + " meets the curve near t = " +
                          fmt(trace.times[first_i]));
    }
    if (end_height <= tolerance) r.notes.push_back("trace terminates on the real line");
    r.solver_metadata = {{"composed_steps", static_cast<double>(trace.composed_steps)}};
    r.finalize();
    return r;
}

// ------------------------------------------------------------- comparison

ComparisonDriver comparison_driver(const DrivingFunction& driver, double t0, std::size_t verification_points) {
    const double T = driver.horizon();
    if (!(t0 >= 0.0 && t0 < T)) throw DomainError("t0 must lie in [0, T)");
    if (verification_points < 1) throw ParameterError("verification grid is empty");
    ComparisonDriver out;
    out.inf_curvature = std::numeric_limits<double>::infinity();
    double worst_t = t0;
    for (std::size_t i = 0; i < verification_points; ++i) {
        const double t = t0 + (T - t0) * static_cast<double>(i) / static_cast<double>(verification_points);
        const double lc = loewner_curvature(driver, t);
        if (std::isnan(lc) || lc < out.inf_curvature) {
            out.inf_curvature = std::isnan(lc) ? -std::numeric_limits<double>::infinity() : lc;
            worst_t = t;
        }
    }
    if (!(out.inf_curvature >= 9.0)) {
        throw PreconditionError("Loewner curvature " + fmt(out.inf_curvature) + " below 9 at t = " + fmt(worst_t));
    }
    const double slope = driver.derivative(t0, 1);
    if (slope == 0.0) throw PreconditionError("lambda'(t0) = 0 leaves the comparison time undetermined");
    out.c = std::sqrt(2.0 * out.inf_curvature);
    out.tau = out.c * out.c / (4.0 * slope * slope);
    out.reflected = slope > 0.0;
    const double lam = driver.eval(t0);
    out.alpha = out.reflected ? lam + out.c * std::sqrt(out.tau) : lam - out.c * std::sqrt(out.tau);
    return out;
}

CheckReport check_curvature_comparison(const DrivingFunction& driver, double t0, const SolverConfig& config,
                                       const ComparisonOptions& options) {
    config.validate();
    const ComparisonDriver cd = comparison_driver(driver, t0, options.verification_points);
    DrivingFunction mu = DrivingFunction::sqrt_end(cd.c, cd.tau);
    if (cd.reflected) mu = transform(mu, TransformSpec::reflect());
    mu = transform(mu, TransformSpec::translate(cd.alpha));

    const double st = std::sqrt(cd.tau);
    Window window{cd.alpha - st, cd.alpha + cd.c * st + st, 0.0, 2.2 * st};
    if (cd.reflected) window = {cd.alpha - cd.c * st - st, cd.alpha + st, 0.0, 2.2 * st};
    const HullRaster raster = hull_raster(mu, cd.tau, window, options.resolution, config, true);

    const auto nx = raster.resolution.nx;
    const auto ny = raster.resolution.ny;
    auto interior = [&](std::size_t i, std::size_t j) {
        if (i == 0 || j == 0 || i + 1 >= nx || j + 1 >= ny) return false;
        for (std::size_t b = j - 1; b <= j + 1; ++b) {
            for (std::size_t a = i - 1; a <= i + 1; ++a) {
                if (!raster.member(a, b)) return false;
            }
        }
        return true;
    };

    const DrivingFunction shifted = t0 > 0.0 ? transform(driver, TransformSpec::concatenate_from(t0)) : driver;
    const TracePath trace = compute_trace(shifted, config);
    std::size_t violations = 0;
    double first_violation = -1.0;
    for (std::size_t k = 0; k + 1 < trace.points.size(); ++k) {
        const Complex z = trace.points[k];
        const double fi = (z.real() - window.x0) / raster.cell_width();
        const double fj = (z.imag() - window.y0) / raster.cell_height();
        if (fi < 0.0 || fj < 0.0 || fi > nx - 1.0 || fj > ny - 1.0) continue;
        const auto i = static_cast<std::size_t>(std::lround(fi));
        const auto j = static_cast<std::size_t>(std::lround(fj));
        if (interior(i, j)) {
            if (violations == 0) first_violation = trace.times[k] + t0;
            ++violations;
        }
    }

    const double footprint = raster.real_interval ? raster.real_interval->right - raster.real_interval->left : 0.0;
    const double footprint_bound = 0.5 * cd.c * st;

    CheckReport r = new_report("comparison", config);
    r.params = {{"driver", driver.describe()},
                {"t0", t0},
                {"nx", static_cast<double>(options.resolution.nx)},
                {"ny", static_cast<double>(options.resolution.ny)}};
    r.measured = {{"inf_curvature", cd.inf_curvature},
                  {"c", cd.c},
                  {"tau", cd.tau},
                  {"alpha", cd.alpha},
                  {"reflected", cd.reflected ? 1.0 : 0.0},
                  {"interior_violations", static_cast<double>(violations)},
                  {"footprint_length", footprint},
                  {"footprint_lower_bound", footprint_bound},
                  {"footprint_excess", footprint - footprint_bound},
                  {"unknown_cells", static_cast<double>(raster.unknown_cells)}};
    r.criteria = {{"interior_violations", Criterion::Op::at_most, 0.0},
                  {"footprint_excess", Criterion::Op::at_least, 0.0}};
    if (violations > 0) r.notes.push_back("trace enters the comparison hull interior at t = " + fmt(first_violation));
    r.finalize();
    return r;
}

// ------------------------------------------------------------- hypotheses

HypothesisMargins proposition_margins(const DrivingFunction& driver, std::size_t grid_points) {
    if (grid_points < 1) throw ParameterError("grid must be nonempty");
    const double T = driver.horizon();
    const double lam_T = driver.eval(T);
    std::vector<double> s(grid_points);
    std::vector<double> lc(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        s[i] = T * static_cast<double>(i) / static_cast<double>(grid_points);
        lc[i] = loewner_curvature(driver, s[i]);
        if (std::isnan(lc[i])) lc[i] = -std::numeric_limits<double>::infinity();
    }
    HypothesisMargins m;
    m.min_curvature = *std::min_element(lc.begin(), lc.end());
    m.delta_margin = std::numeric_limits<double>::infinity();
    m.gap_ratio = std::numeric_limits<double>::infinity();
    double suffix = std::numeric_limits<double>::infinity();
    for (std::size_t i = grid_points; i-- > 0;) {
        suffix = std::min(suffix, lc[i]);
        const double u = T - s[i];
        const double slope = std::abs(driver.derivative(s[i], 1));
        if (slope > 0.0) m.delta_margin = std::min(m.delta_margin, suffix / (std::sqrt(u) * slope));
        m.gap_ratio = std::min(m.gap_ratio, std::abs(lam_T - driver.eval(s[i])) / std::sqrt(u));
    }
    return m;
}

CheckReport check_proposition_hypotheses(const DrivingFunction& driver, double delta, const SolverConfig& config,
                                         std::size_t grid_points) {
    const HypothesisMargins m = proposition_margins(driver, grid_points);
    CheckReport r = new_report("hypotheses", config);
    r.params = {{"driver", driver.describe()},
                {"delta", delta},
                {"grid_points", static_cast<double>(grid_points)},
                {"derivative_mode",
                 std::string(driver.derivative_mode() == DerivativeMode::analytic ? "analytic" : "finite_difference")}};
    r.measured = {{"min_curvature", m.min_curvature}, {"delta_margin", m.delta_margin}, {"gap_ratio", m.gap_ratio}};
    // boundary cases hit the thresholds exactly, so allow for rounding
    constexpr double slack = 1.0 - 1e-12;
    r.criteria = {{"min_curvature", Criterion::Op::at_least, 9.0 * slack},
                  {"delta_margin", Criterion::Op::at_least, delta * slack},
                  {"gap_ratio", Criterion::Op::at_least, 4.0}};
    r.notes.push_back("hypotheses are reported only; no conclusion about the trace is drawn");
    r.finalize();
    return r;
}

// ------------------------------------------------------------------ angle

double approach_angle(const TracePath& trace, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) throw ParameterError("tail_fraction must lie in (0, 1)");
    const auto& z = trace.points;
    const std::size_t n = z.size();
    if (n < 3) throw InsufficientDataError("trace too short for an approach angle");
    auto start = static_cast<std::size_t>(std::floor((1.0 - tail_fraction) * static_cast<double>(n - 1)));
    start = std::min(start, n - 2);
    const Complex end = z[n - 1];
    const Complex secant = end - z[start];
    if (std::abs(secant) == 0.0) throw InsufficientDataError("terminal secant has zero length");

    // nearest point on the curve before the tail
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_seg = 0;
    for (std::size_t i = 0; i + 1 <= start && i + 1 < n; ++i) {
        const double d = point_segment_distance(end, z[i], z[i + 1]);
        if (d < best) {
            best = d;
            best_seg = i;
        }
    }
    auto line_angle = [](Complex a, Complex b) {
        double ang = std::abs(std::arg(a) - std::arg(b));
        ang = std::fmod(ang, M_PI);
        return std::min(ang, M_PI - ang);
    };
    const bool self_approach = best < end.imag() && best < 0.25 * std::abs(secant);
    if (self_approach) {
        const Complex tangent = z[best_seg + 1] - z[best_seg];
        if (std::abs(tangent) > 0.0) return line_angle(secant, tangent);
    }
    return std::atan2(std::abs(secant.imag()), std::abs(secant.real()));
}

}  // namespace loewner
