#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "loewner/drivers.hpp"

namespace loewner {

using Complex = std::complex<double>;

struct SolverConfig {
    /// Uniform steps of the trace discretisation; also sets the initial ODE
    /// step T / (n_steps * ode_substeps).
    std::size_t n_steps = 1000;
    /// |g_t(z) - lambda(t)| below which a point counts as swallowed. The
    /// threshold is scaled by sqrt((T - t) / T) so it tracks the shrinking
    /// length scale near the horizon.
    double blowup_eps = 1e-6;
    std::size_t ode_substeps = 1;
    /// Largest ODE step in t. Zero selects T / 20.
    double max_step = 0.0;
    /// Relative tolerance of the adaptive integrator, measured against the
    /// distance to the driver.
    double rtol = 1e-9;
    /// Flows run in log remaining time tau = -log((T - t) / T) up to this value.
    double tau_max = 60.0;
    /// tau_max used when bisecting for the real endpoints of a hull.
    double tau_max_bisection = 1e5;
    /// Absolute tolerance for locating the real endpoints of a hull.
    double interval_tol = 1e-4;

    /// Trace refinement: split a step while |lambda(t1) - lambda(t0)| / sqrt(dt)
    /// exceeds the threshold. Zero disables refinement.
    double refine_threshold = 0.0;
    int refine_max_depth = 8;
    /// Record every `sample_stride`-th tip, plus every tip in the final
    /// `dense_tail` fraction of steps and always the last one.
    std::size_t sample_stride = 1;
    double dense_tail = 0.0;

    /// Worker threads for per-point work; zero uses the hardware count.
    std::size_t threads = 0;

    void validate() const;
    double initial_step(double horizon) const;
    double step_cap(double horizon) const;
};

struct FlowTrajectory {
    std::vector<double> times;
    std::vector<Complex> points;
    std::optional<double> swallow_time;

    Complex final_point() const { return points.back(); }
};

struct TracePath {
    std::vector<double> times;
    std::vector<Complex> points;
    std::optional<bool> simple_flag;
    /// Number of elementary maps actually composed (after refinement).
    std::size_t composed_steps = 0;
    double refine_threshold = 0.0;
};

struct Window {
    double x0 = -1.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;
};

struct Resolution {
    std::size_t nx = 100;
    std::size_t ny = 100;
};

struct RealInterval {
    double left = 0.0;
    double right = 0.0;
};

enum class CellState : std::uint8_t { outside = 0, member = 1, unknown = 2 };

/// Membership of K_T sampled on the nodes of a regular grid. Row j holds
/// y = y0 + j (y1 - y0) / (ny - 1); column i holds x = x0 + i (x1 - x0) / (nx - 1).
struct HullRaster {
    Window window;
    Resolution resolution;
    double time = 0.0;
    std::vector<CellState> cells;
    std::optional<RealInterval> real_interval;
    std::size_t unknown_cells = 0;

    bool member(std::size_t i, std::size_t j) const { return cells[j * resolution.nx + i] == CellState::member; }
    std::size_t member_count() const;
    double x(std::size_t i) const;
    double y(std::size_t j) const;
    double cell_width() const;
    double cell_height() const;
};

/// Outcome of following one point under the downward flow.
struct SwallowStatus {
    bool swallowed = false;
    /// Swallow time (equal to T for points captured exactly at the horizon).
    double time = 0.0;
};

/// Inverse of the vertical-slit map g(z) = c + sqrt((z - c)^2 + 4 dt),
/// returning a point in the closed upper half-plane.
Complex elementary_inverse_slit(Complex w, double c, double dt);
Complex elementary_slit(Complex z, double c, double dt);

TracePath compute_trace(const DrivingFunction& driver, const SolverConfig& config);

/// g_t(z0) on [0, T]; stops once the point is swallowed.
FlowTrajectory downward_flow(Complex z0, const DrivingFunction& driver, const SolverConfig& config);

/// f_t(z0) on [0, s] for the time-reversed driver xi(t) = lambda(s - t).
FlowTrajectory upward_flow(Complex z0, const DrivingFunction& driver, double s, const SolverConfig& config);

std::optional<double> swallow_time(double x, const DrivingFunction& driver, const SolverConfig& config);

/// Swallow classification with early exit for points that provably escape.
SwallowStatus classify_point(Complex z0, const DrivingFunction& driver, const SolverConfig& config);

/// Real endpoints of K_T, located by bisection from lambda(0).
RealInterval locate_real_interval(const DrivingFunction& driver, const SolverConfig& config);

/// Raster of K_T for T <= horizon. Trace cells are added when `include_trace`.
HullRaster hull_raster(const DrivingFunction& driver, double T, const Window& window, const Resolution& resolution,
                       const SolverConfig& config, bool include_trace = true);

}  // namespace loewner
