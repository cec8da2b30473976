#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "loewner/drivers.hpp"
#include "loewner/solver.hpp"

namespace loewner {

using ParamValue = std::variant<double, std::string>;

/// One pass condition on a measured quantity.
struct Criterion {
    enum class Op { at_most, at_least };

    std::string quantity;
    Op op = Op::at_most;
    double threshold = 0.0;

    bool holds(double value) const { return op == Op::at_most ? value <= threshold : value >= threshold; }
};

struct CheckReport {
    std::string check;
    std::map<std::string, ParamValue> params;
    std::map<std::string, double> measured;
    std::vector<Criterion> criteria;
    bool pass = false;
    std::vector<std::string> notes;
    std::map<std::string, ParamValue> solver_metadata;

    /// Recomputes the verdict from `measured` and `criteria` only.
    bool evaluate() const;
    /// Sets `pass` from evaluate() and returns it.
    bool finalize();
};

std::map<std::string, ParamValue> describe_config(const SolverConfig& config);

struct EnvelopeSample {
    double x = 0.0;
    double y = 0.0;
};

struct EnvelopeFit {
    double p = 0.0;
    double exponent = 0.0;
    double coefficient = 0.0;
    /// RMS residual of the log-log least-squares fit.
    double residual = 0.0;
    /// Smallest C with y <= C (x - p)^{2 - 2r} over the samples.
    double envelope_constant = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::vector<EnvelopeSample> samples;
};

/// Least-squares fit of log y against log(x - p) over samples with x - p in
/// [window_lo, window_hi] and y > 0. `theory_exponent` only feeds
/// `envelope_constant`.
EnvelopeFit fit_envelope(const std::vector<EnvelopeSample>& samples, double p, double theory_exponent,
                         double window_lo = 0.0, double window_hi = 1e300);

struct CaptureOptions {
    double resolution = 1e-3;
    double margin = 1e-3;
};

CheckReport check_capture_interval(double k, const SolverConfig& config, const CaptureOptions& options = {});

struct HeightOptions {
    double window_left = 3.0;
    double height = 3.0;
    Resolution resolution{400, 200};
    std::size_t verification_points = 2001;
};

/// Throws PreconditionError unless lambda(1) = 0 and lambda(t) >= k sqrt(1 - t)
/// on the verification grid.
void verify_height_hypotheses(const DrivingFunction& driver, double k, std::size_t points = 2001);

CheckReport check_height_bound(const DrivingFunction& driver, double k, const SolverConfig& config,
                               const HeightOptions& options = {});

struct TangentialOptions {
    /// Ladder width; zero picks (lambda(0) - p) / 4.
    double width = 0.0;
    int levels = 10;
    /// Relative tolerance of the boundary bisection in y.
    double y_tolerance = 1e-6;
    /// Boundary samples below this height are not used in the fit.
    double y_floor = 1e-6;
    double exponent_tolerance = 0.15;
    std::size_t verification_points = 2001;
};

struct TangentialResult {
    EnvelopeFit fit;
    CheckReport report;
};

TangentialResult fit_tangential_exponent(const DrivingFunction& driver, double r, const SolverConfig& config,
                                         const TangentialOptions& options = {});

/// Upper boundary of the hull above x: the largest y with x + iy swallowed by
/// the horizon, located by bisection with relative tolerance `y_tolerance`.
double hull_boundary_height(const DrivingFunction& driver, double x, const SolverConfig& config,
                            double y_tolerance = 1e-6);

CheckReport check_simple_curve(const TracePath& trace, double tolerance);

struct ComparisonOptions {
    Resolution resolution{240, 160};
    std::size_t verification_points = 2000;
};

/// Parameters of the comparison driver mu(t) = alpha + c sqrt(tau - t)
/// (reflected when lambda increases at t0).
struct ComparisonDriver {
    double c = 0.0;
    double tau = 0.0;
    double alpha = 0.0;
    bool reflected = false;
    double inf_curvature = 0.0;
};

ComparisonDriver comparison_driver(const DrivingFunction& driver, double t0, std::size_t verification_points = 2000);

CheckReport check_curvature_comparison(const DrivingFunction& driver, double t0, const SolverConfig& config,
                                       const ComparisonOptions& options = {});

struct HypothesisMargins {
    double min_curvature = 0.0;
    double delta_margin = 0.0;
    /// min over t < T of |lambda(T) - lambda(t)| / sqrt(T - t)
    double gap_ratio = 0.0;
};

HypothesisMargins proposition_margins(const DrivingFunction& driver, std::size_t grid_points = 1000);

CheckReport check_proposition_hypotheses(const DrivingFunction& driver, double delta, const SolverConfig& config,
                                         std::size_t grid_points = 1000);

/// Angle in [0, pi/2] between the terminal secant over the last
/// `tail_fraction` of samples and either the real line or, when the end
/// point is closer to an earlier part of the curve, that part's tangent.
double approach_angle(const TracePath& trace, double tail_fraction);

/// Names accepted by the CLI `check --name` option.
const std::vector<std::string>& check_names();

}  // namespace loewner
