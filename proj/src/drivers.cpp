#include "loewner/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

#include "loewner/errors.hpp"

namespace loewner {

namespace {

struct ConstantData {
    double a;
};
struct LinearData {
    double slope;
};
struct SqrtEndData {
    double k;
};
struct PowerEndData {
    double a;
    double r;
};
struct WeierstrassData {
    double b;
    double r;
    double k;
    int n_terms;
};

// One dyadic level: plateau on [start, knee], then linear to `end`.
struct NoTraceLevel {
    double start;
    double knee;
    double end;
    double high;
    double low;
};

struct NoTraceData {
    double a;
    double r;
    std::vector<NoTraceLevel> levels;
    double tail_start;
};

struct TimeChangedData {
    double k;
    SampledPath path;
};

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace

struct DrivingFunction::Node {
    using Data = std::variant<ConstantData, LinearData, SqrtEndData, PowerEndData, WeierstrassData,
                              NoTraceData, TimeChangedData, std::monostate>;
    Data data;
    double horizon = 1.0;
    DerivativeMode mode = DerivativeMode::analytic;
    double fd_step = 0.0;
    std::string label;

    // composite only
    std::shared_ptr<const Node> base;
    TransformSpec spec;
};

namespace {

using Node = DrivingFunction::Node;

double eval_node(const Node& n, double t);
double increment_node(const Node& n, double u);
double analytic_derivative(const Node& n, double t, int order);

double no_trace_eval(const NoTraceData& d, double t) {
    if (t >= d.tail_start) return d.a * std::pow(std::max(0.0, 1.0 - t), d.r);
    for (const auto& lv : d.levels) {
        if (t < lv.end) {
            if (t <= lv.knee) return lv.high;
            return lv.high + (lv.low - lv.high) * (t - lv.knee) / (lv.end - lv.knee);
        }
    }
    return d.a * std::pow(std::max(0.0, 1.0 - t), d.r);
}

double weierstrass_sum(const WeierstrassData& d, double t, int derivative_order) {
    double sum = 0.0;
    double freq = 1.0;
    for (int n = 0; n < d.n_terms; ++n) {
        const double amp = std::pow(d.b, -d.r * n) * std::pow(freq, derivative_order);
        const double arg = freq * t;
        switch (derivative_order) {
            case 0: sum += amp * std::cos(arg); break;
            case 1: sum -= amp * std::sin(arg); break;
            default: sum -= amp * std::cos(arg); break;
        }
        freq *= d.b;
    }
    return d.k * sum;
}

double eval_node(const Node& n, double t) {
    const double T = n.horizon;
    return std::visit(
        [&](const auto& d) -> double {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ConstantData>) {
                return d.a;
            } else if constexpr (std::is_same_v<D, LinearData>) {
                return d.slope * t;
            } else if constexpr (std::is_same_v<D, SqrtEndData>) {
                return d.k * std::sqrt(std::max(0.0, T - t));
            } else if constexpr (std::is_same_v<D, PowerEndData>) {
                return d.a * std::pow(std::max(0.0, T - t), d.r);
            } else if constexpr (std::is_same_v<D, WeierstrassData>) {
                return weierstrass_sum(d, t, 0);
            } else if constexpr (std::is_same_v<D, NoTraceData>) {
                return no_trace_eval(d, t);
            } else if constexpr (std::is_same_v<D, TimeChangedData>) {
                const double e = std::min(1.0, d.path.at(t));
                return d.k * std::sqrt(std::max(0.0, 1.0 - e));
            } else {
                const Node& b = *n.base;
                const double p = n.spec.parameter;
                switch (n.spec.kind) {
                    case TransformSpec::Kind::translate: return eval_node(b, t) + p;
                    case TransformSpec::Kind::scale: return p * eval_node(b, std::min(b.horizon, t / (p * p)));
                    case TransformSpec::Kind::reflect: return -eval_node(b, t);
                    case TransformSpec::Kind::concatenate_from: return eval_node(b, std::min(b.horizon, p + t));
                    case TransformSpec::Kind::restrict_to: return eval_node(b, t);
                }
                return 0.0;
            }
        },
        n.data);
}

double increment_node(const Node& n, double u) {
    const double T = n.horizon;
    return std::visit(
        [&](const auto& d) -> double {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ConstantData>) {
                return 0.0;
            } else if constexpr (std::is_same_v<D, LinearData>) {
                return -d.slope * u;
            } else if constexpr (std::is_same_v<D, SqrtEndData>) {
                return d.k * std::sqrt(u);
            } else if constexpr (std::is_same_v<D, PowerEndData>) {
                return d.a * std::pow(u, d.r);
            } else if constexpr (std::is_same_v<D, NoTraceData>) {
                if (1.0 - u >= d.tail_start) return d.a * std::pow(u, d.r);
                return no_trace_eval(d, 1.0 - u);
            } else if constexpr (std::is_same_v<D, std::monostate>) {
                const Node& b = *n.base;
                const double p = n.spec.parameter;
                switch (n.spec.kind) {
                    case TransformSpec::Kind::translate: return increment_node(b, u);
                    case TransformSpec::Kind::scale: return p * increment_node(b, u / (p * p));
                    case TransformSpec::Kind::reflect: return -increment_node(b, u);
                    case TransformSpec::Kind::concatenate_from: return increment_node(b, u);
                    case TransformSpec::Kind::restrict_to: return eval_node(b, T - u) - eval_node(b, T);
                }
                return 0.0;
            } else {
                return eval_node(n, T - u) - eval_node(n, T);
            }
        },
        n.data);
}

double profile_node(const Node& n, double tau) {
    const double T = n.horizon;
    const double log_u = std::log(T) - tau;
    return std::visit(
        [&](const auto& d) -> double {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ConstantData>) {
                return 0.0;
            } else if constexpr (std::is_same_v<D, LinearData>) {
                return -d.slope * std::exp(0.5 * log_u);
            } else if constexpr (std::is_same_v<D, SqrtEndData>) {
                return d.k;
            } else if constexpr (std::is_same_v<D, PowerEndData>) {
                return d.a * std::exp((d.r - 0.5) * log_u);
            } else if constexpr (std::is_same_v<D, NoTraceData>) {
                if (1.0 - std::exp(log_u) >= d.tail_start) return d.a * std::exp((d.r - 0.5) * log_u);
                const double u = std::exp(log_u);
                return no_trace_eval(d, 1.0 - u) / std::sqrt(u);
            } else if constexpr (std::is_same_v<D, std::monostate>) {
                const Node& b = *n.base;
                switch (n.spec.kind) {
                    case TransformSpec::Kind::translate:
                    case TransformSpec::Kind::scale: return profile_node(b, tau);
                    case TransformSpec::Kind::reflect: return -profile_node(b, tau);
                    case TransformSpec::Kind::concatenate_from: return profile_node(b, tau + std::log(b.horizon / T));
                    case TransformSpec::Kind::restrict_to: break;
                }
            }
            // generic: direct differences, with u kept away from underflow
            const double u = std::max(std::exp(log_u), 1e-290);
            return increment_node(n, u) / std::sqrt(u);
        },
        n.data);
}

double analytic_derivative(const Node& n, double t, int order) {
    const double T = n.horizon;
    const double u = T - t;
    return std::visit(
        [&](const auto& d) -> double {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ConstantData>) {
                return 0.0;
            } else if constexpr (std::is_same_v<D, LinearData>) {
                return order == 1 ? d.slope : 0.0;
            } else if constexpr (std::is_same_v<D, SqrtEndData>) {
                return order == 1 ? -d.k / (2.0 * std::sqrt(u)) : -d.k / (4.0 * u * std::sqrt(u));
            } else if constexpr (std::is_same_v<D, PowerEndData>) {
                if (order == 1) return -d.a * d.r * std::pow(u, d.r - 1.0);
                return d.a * d.r * (d.r - 1.0) * std::pow(u, d.r - 2.0);
            } else if constexpr (std::is_same_v<D, WeierstrassData>) {
                // the differentiated series converges only for r > order
                if (d.r <= order) {
                    throw UnsupportedError("Weierstrass driver with r = " + format_number(d.r) +
                                           " has no analytic derivative of order " + std::to_string(order));
                }
                return weierstrass_sum(d, t, order);
            } else if constexpr (std::is_same_v<D, NoTraceData>) {
                if (t >= d.tail_start) {
                    if (order == 1) return -d.a * d.r * std::pow(u, d.r - 1.0);
                    return d.a * d.r * (d.r - 1.0) * std::pow(u, d.r - 2.0);
                }
                for (const auto& lv : d.levels) {
                    if (t < lv.end) {
                        if (t < lv.knee || order == 2) return 0.0;
                        return (lv.low - lv.high) / (lv.end - lv.knee);
                    }
                }
                return 0.0;
            } else if constexpr (std::is_same_v<D, TimeChangedData>) {
                throw UnsupportedError("time-changed drivers have no analytic derivative");
            } else {
                const Node& b = *n.base;
                const double p = n.spec.parameter;
                switch (n.spec.kind) {
                    case TransformSpec::Kind::translate:
                    case TransformSpec::Kind::restrict_to: return analytic_derivative(b, t, order);
                    case TransformSpec::Kind::scale: {
                        const double inner = analytic_derivative(b, t / (p * p), order);
                        return order == 1 ? inner / p : inner / (p * p * p);
                    }
                    case TransformSpec::Kind::reflect: return -analytic_derivative(b, t, order);
                    case TransformSpec::Kind::concatenate_from: return analytic_derivative(b, p + t, order);
                }
                return 0.0;
            }
        },
        n.data);
}

void require_finite_positive(double x, const char* what) {
    if (!(std::isfinite(x) && x > 0.0)) {
        throw ParameterError(std::string(what) + " must be finite and positive, got " + format_number(x));
    }
}

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ParameterError(std::string(what) + " must be finite");
}

std::shared_ptr<Node> make_node(Node::Data data, double horizon, std::string label) {
    require_finite_positive(horizon, "horizon T");
    auto n = std::make_shared<Node>();
    n->data = std::move(data);
    n->horizon = horizon;
    n->label = std::move(label);
    return n;
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::constant: return "constant";
        case Family::linear: return "linear";
        case Family::sqrt_end: return "sqrt_end";
        case Family::power_end: return "power_end";
        case Family::weierstrass: return "weierstrass";
        case Family::piecewise_no_trace: return "piecewise_no_trace";
        case Family::time_changed: return "time_changed";
        case Family::composite: return "composite";
    }
    return "unknown";
}

double SampledPath::at(double t) const {
    if (times.empty()) throw CoverageError("empty sample path");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return values.front();
    return values[static_cast<std::size_t>(std::distance(times.begin(), it) - 1)];
}

DrivingFunction DrivingFunction::constant(double a, double horizon) {
    require_finite(a, "a");
    return DrivingFunction(make_node(ConstantData{a}, horizon,
                                     "const:a=" + format_number(a) + ",T=" + format_number(horizon)));
}

DrivingFunction DrivingFunction::linear(double slope, double horizon) {
    require_finite(slope, "slope");
    return DrivingFunction(make_node(LinearData{slope}, horizon,
                                     "linear:m=" + format_number(slope) + ",T=" + format_number(horizon)));
}

DrivingFunction DrivingFunction::sqrt_end(double k, double horizon) {
    require_finite(k, "k");
    return DrivingFunction(
        make_node(SqrtEndData{k}, horizon, "sqrt:k=" + format_number(k) + ",T=" + format_number(horizon)));
}

DrivingFunction DrivingFunction::power_end(double a, double r, double horizon) {
    require_finite(a, "a");
    require_finite_positive(r, "r");
    return DrivingFunction(make_node(PowerEndData{a, r}, horizon,
                                     "power:a=" + format_number(a) + ",r=" + format_number(r) +
                                         ",T=" + format_number(horizon)));
}

double weierstrass_tail_bound(double b, double r, double k, int n_terms) {
    const double q = std::pow(b, -r);
    return std::abs(k) * std::pow(q, n_terms) / (1.0 - q);
}

DrivingFunction DrivingFunction::weierstrass(double b, double r, double k, int n_terms, double horizon) {
    if (!(b > 1.0) || !std::isfinite(b)) throw ParameterError("Weierstrass base b must exceed 1");
    require_finite_positive(r, "r");
    require_finite(k, "k");
    if (n_terms < 0) throw ParameterError("n_terms must be nonnegative");
    if (n_terms == 0) {
        const double q = std::pow(b, -r);
        const double needed = std::log(1e-10 * (1.0 - q) / std::max(std::abs(k), 1e-300)) / std::log(q);
        n_terms = std::max(1, static_cast<int>(std::ceil(needed)));
    }
    return DrivingFunction(make_node(WeierstrassData{b, r, k, n_terms}, horizon,
                                     "weier:b=" + format_number(b) + ",r=" + format_number(r) +
                                         ",k=" + format_number(k) + ",n=" + std::to_string(n_terms) +
                                         ",T=" + format_number(horizon)));
}

DrivingFunction DrivingFunction::time_changed(double k, SampledPath path, bool clip) {
    require_finite(k, "k");
    if (path.times.size() < 2 || path.times.size() != path.values.size()) {
        throw ParameterError("time-changed driver needs a sample path with at least two points");
    }
    if (path.times.front() != 0.0) throw ParameterError("sample path must start at t = 0");
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        if (path.values[i] < 0.0) throw RangeError("time change must be nonnegative");
        if (!clip && path.values[i] > 1.0) {
            throw RangeError("time change exceeds 1 at t = " + format_number(path.times[i]) +
                             " and clipping is disabled");
        }
    }
    const double horizon = path.times.back();
    return DrivingFunction(make_node(TimeChangedData{k, std::move(path)}, horizon,
                                     "timechange:k=" + format_number(k)));
}

double DrivingFunction::horizon() const { return node_->horizon; }

Family DrivingFunction::family() const {
    switch (node_->data.index()) {
        case 0: return Family::constant;
        case 1: return Family::linear;
        case 2: return Family::sqrt_end;
        case 3: return Family::power_end;
        case 4: return Family::weierstrass;
        case 5: return Family::piecewise_no_trace;
        case 6: return Family::time_changed;
        default: return Family::composite;
    }
}

DerivativeMode DrivingFunction::derivative_mode() const { return node_->mode; }

double DrivingFunction::fd_step() const {
    return node_->fd_step > 0.0 ? node_->fd_step : 1e-5 * node_->horizon;
}

DrivingFunction DrivingFunction::with_derivative_mode(DerivativeMode mode, double fd_step) const {
    auto n = std::make_shared<Node>(*node_);
    n->mode = mode;
    n->fd_step = fd_step > 0.0 ? fd_step : 0.0;
    return DrivingFunction(std::move(n));
}

DrivingFunction DrivingFunction::with_label(std::string label) const {
    auto n = std::make_shared<Node>(*node_);
    n->label = std::move(label);
    return DrivingFunction(std::move(n));
}

std::string DrivingFunction::describe() const { return node_->label; }

double DrivingFunction::eval(double t) const {
    const double T = node_->horizon;
    const double slack = 1e-12 * T;
    if (!(t >= -slack && t <= T + slack)) {
        throw DomainError("t = " + format_number(t) + " outside [0, " + format_number(T) + "]");
    }
    return eval_node(*node_, std::clamp(t, 0.0, T));
}

double DrivingFunction::terminal_increment(double u) const {
    const double T = node_->horizon;
    if (!(u >= 0.0 && u <= T * (1.0 + 1e-12))) {
        throw DomainError("remaining time u = " + format_number(u) + " outside [0, T]");
    }
    return increment_node(*node_, std::min(u, T));
}

double DrivingFunction::terminal_profile(double tau) const {
    if (!(tau >= 0.0)) throw DomainError("terminal profile needs tau >= 0");
    return profile_node(*node_, tau);
}

double DrivingFunction::derivative(double t, int order) const {
    if (order != 1 && order != 2) throw ParameterError("derivative order must be 1 or 2");
    const double T = node_->horizon;
    if (!(t >= 0.0 && t < T)) {
        throw DomainError("derivative requested at t = " + format_number(t) + " outside [0, T)");
    }
    if (node_->mode == DerivativeMode::analytic) return analytic_derivative(*node_, t, order);

    // Central stencils; one-sided second-order stencils within h of an end.
    // Second derivatives take a wider step against round-off, shrunk towards
    // the horizon where the closed-form families blow up.
    const double h = (order == 1 ? 1.0 : 10.0) * fd_step() * std::clamp((T - t) / T, 1e-6, 1.0);
    const auto f = [&](double s) { return eval_node(*node_, s); };
    if (t - h < 0.0) {
        if (order == 1) return (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2 * h)) / (2.0 * h);
        return (2.0 * f(t) - 5.0 * f(t + h) + 4.0 * f(t + 2 * h) - f(t + 3 * h)) / (h * h);
    }
    if (t + h > T) {
        if (order == 1) return (3.0 * f(t) - 4.0 * f(t - h) + f(t - 2 * h)) / (2.0 * h);
        return (2.0 * f(t) - 5.0 * f(t - h) + 4.0 * f(t - 2 * h) - f(t - 3 * h)) / (h * h);
    }
    if (order == 1) return (f(t + h) - f(t - h)) / (2.0 * h);
    return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
}

double loewner_curvature(const DrivingFunction& driver, double t) {
    const double d1 = driver.derivative(t, 1);
    if (d1 == 0.0) return 0.0;
    const double d2 = driver.derivative(t, 2);
    if (d2 == 0.0) {
        // sign of lambda'^3 / 0+
        return d1 > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return d1 * d1 * d1 / d2;
}

double half_norm(const DrivingFunction& driver, std::size_t grid_size) {
    if (grid_size < 2) throw ParameterError("half_norm needs at least two grid points");
    constexpr std::size_t max_points = 4096;
    const double T = driver.horizon();
    const std::size_t intervals = grid_size - 1;
    const std::size_t stride = (intervals + max_points - 2) / (max_points - 1);
    std::vector<double> ts;
    for (std::size_t i = 0; i <= intervals; i += stride) ts.push_back(T * static_cast<double>(i) / intervals);
    if (ts.back() != T) ts.push_back(T);

    std::vector<double> vals(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) vals[i] = driver.eval(ts[i]);

    double best = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
            best = std::max(best, std::abs(vals[j] - vals[i]) / std::sqrt(ts[j] - ts[i]));
        }
    }
    return best;
}

DrivingFunction transform(const DrivingFunction& driver, const TransformSpec& spec) {
    const double T = driver.horizon();
    double horizon = T;
    std::string suffix;
    switch (spec.kind) {
        case TransformSpec::Kind::translate:
            require_finite(spec.parameter, "translation");
            suffix = "|translate:a=" + format_number(spec.parameter);
            break;
        case TransformSpec::Kind::scale:
            require_finite_positive(spec.parameter, "scale factor k");
            horizon = spec.parameter * spec.parameter * T;
            suffix = "|scale:k=" + format_number(spec.parameter);
            break;
        case TransformSpec::Kind::reflect:
            suffix = "|reflect";
            break;
        case TransformSpec::Kind::concatenate_from:
            if (!(spec.parameter > 0.0 && spec.parameter < T)) {
                throw ParameterError("concatenation time s must lie in (0, T)");
            }
            horizon = T - spec.parameter;
            suffix = "|from:s=" + format_number(spec.parameter);
            break;
        case TransformSpec::Kind::restrict_to:
            if (!(spec.parameter > 0.0 && spec.parameter <= T)) {
                throw ParameterError("restriction time s must lie in (0, T]");
            }
            horizon = spec.parameter;
            suffix = "|until:s=" + format_number(spec.parameter);
            break;
    }
    auto n = std::make_shared<Node>();
    n->data = std::monostate{};
    n->horizon = horizon;
    n->mode = driver.node_->mode;
    n->base = driver.node_;
    n->spec = spec;
    n->label = driver.node_->label + suffix;
    return DrivingFunction(std::move(n));
}

double no_trace_min_amplitude(double r) { return 2.0 / (1.0 - std::pow(2.0, -r)); }

DrivingFunction make_no_trace_driver(double a, double r, int n_levels, double split) {
    if (!(r > 0.0 && r < 0.5)) throw ParameterError("r must lie in (0, 1/2)");
    if (n_levels < 1) throw ParameterError("n_levels must be at least 1");
    if (!(split > 0.0 && split < 1.0)) throw ParameterError("split must lie in (0, 1)");
    const double a_min = no_trace_min_amplitude(r);
    if (!(a >= a_min * (1.0 - 1e-12))) {
        throw ParameterError("a = " + format_number(a) + " is below the minimum " + format_number(a_min));
    }
    NoTraceData d{a, r, {}, 0.0};
    for (int n = 0; n < n_levels; ++n) {
        const double start = 1.0 - std::ldexp(1.0, -n);
        const double end = 1.0 - std::ldexp(1.0, -(n + 1));
        const double knee = start + split * (end - start);
        d.levels.push_back({start, knee, end, a * std::pow(2.0, -n * r), a * std::pow(2.0, -(n + 1) * r)});
    }
    d.tail_start = d.levels.back().end;
    auto node = make_node(std::move(d), 1.0,
                          "notrace:a=" + format_number(a) + ",r=" + format_number(r) +
                              ",n=" + std::to_string(n_levels) + ",split=" + format_number(split));
    return DrivingFunction(std::move(node));
}

}  // namespace loewner
