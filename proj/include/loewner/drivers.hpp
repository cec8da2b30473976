#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace loewner {

enum class DerivativeMode { analytic, finite_difference };

enum class Family {
    constant,
    linear,
    sqrt_end,
    power_end,
    weierstrass,
    piecewise_no_trace,
    time_changed,
    composite,
};

std::string to_string(Family family);

/// Hull-preserving reparametrisations of a driver. `restrict_to` keeps the
/// same function on the shorter horizon [0, s].
struct TransformSpec {
    enum class Kind { translate, scale, reflect, concatenate_from, restrict_to };

    Kind kind = Kind::translate;
    double parameter = 0.0;

    static TransformSpec translate(double a) { return {Kind::translate, a}; }
    static TransformSpec scale(double k) { return {Kind::scale, k}; }
    static TransformSpec reflect() { return {Kind::reflect, 0.0}; }
    static TransformSpec concatenate_from(double s) { return {Kind::concatenate_from, s}; }
    static TransformSpec restrict_to(double s) { return {Kind::restrict_to, s}; }
};

/// A piecewise-constant sample path read with the previous-value rule:
/// value(t) = values[i] for times[i] <= t < times[i+1].
struct SampledPath {
    std::vector<double> times;
    std::vector<double> values;

    double at(double t) const;
};

/// A real driving function on [0, T]. Values are immutable and cheap to
/// copy; copies share their parameter data.
class DrivingFunction {
public:
    static DrivingFunction constant(double a, double horizon = 1.0);
    /// lambda(t) = slope * t
    static DrivingFunction linear(double slope, double horizon = 1.0);
    /// lambda(t) = k * sqrt(T - t)
    static DrivingFunction sqrt_end(double k, double horizon = 1.0);
    /// lambda(t) = a * (T - t)^r
    static DrivingFunction power_end(double a, double r, double horizon = 1.0);
    /// lambda(t) = k * sum_{n < n_terms} b^{-rn} cos(b^n t). With n_terms == 0
    /// the truncation is chosen so that the tail bound is below 1e-10.
    static DrivingFunction weierstrass(double b, double r, double k, int n_terms = 0,
                                       double horizon = 3.141592653589793);
    /// lambda(t) = k * sqrt(1 - E_t) for a frozen sample path E on [0, T].
    /// Values of E above 1 are clipped when `clip` is set, otherwise rejected.
    static DrivingFunction time_changed(double k, SampledPath path, bool clip = true);

    double eval(double t) const;
    double operator()(double t) const { return eval(t); }

    /// lambda(T - u) - lambda(T), evaluated without cancellation for the
    /// closed-form families. Requires 0 <= u <= T.
    double terminal_increment(double u) const;

    /// (lambda(T - u) - lambda(T)) / sqrt(u) with u = T exp(-tau): the driver
    /// seen in coordinates that blow up the horizon. Evaluated in log space
    /// for the closed-form families so large tau stays finite.
    double terminal_profile(double tau) const;

    double derivative(double t, int order) const;

    double horizon() const;
    Family family() const;
    DerivativeMode derivative_mode() const;
    double fd_step() const;

    /// Copy with a different derivative mode; `fd_step <= 0` keeps the
    /// default of 1e-5 * T.
    DrivingFunction with_derivative_mode(DerivativeMode mode, double fd_step = 0.0) const;

    /// Copy carrying a human-readable spec string used in reports.
    DrivingFunction with_label(std::string label) const;
    std::string describe() const;

    struct Node;

private:
    explicit DrivingFunction(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;

    friend DrivingFunction transform(const DrivingFunction& driver, const TransformSpec& spec);
    friend DrivingFunction make_no_trace_driver(double a, double r, int n_levels, double split);
};

/// LC = lambda'^3 / lambda''; 0 when lambda' == 0 and +-infinity when
/// lambda'' == 0 with lambda' != 0.
double loewner_curvature(const DrivingFunction& driver, double t);

/// Lower bound on the 1/2-Hoelder seminorm from all pairs of a uniform grid
/// with `grid_size` points. Grids above 4096 points are subsampled.
double half_norm(const DrivingFunction& driver, std::size_t grid_size);

DrivingFunction transform(const DrivingFunction& driver, const TransformSpec& spec);

/// Monotone driver on [0, 1] that alternates plateaus at 2^{-nr} a with
/// linear descents on the dyadic intervals [1 - 2^{-n}, 1 - 2^{-(n+1)}].
/// `split` is the plateau fraction of each interval. After the last level
/// the driver follows a (1 - t)^r down to 0.
DrivingFunction make_no_trace_driver(double a, double r, int n_levels, double split);

double no_trace_min_amplitude(double r);

/// Sup-norm bound k b^{-r n} / (1 - b^{-r}) of the dropped Weierstrass tail.
double weierstrass_tail_bound(double b, double r, double k, int n_terms);

}  // namespace loewner
