#include <cmath>
#include <random>

#include "doctest.h"
#include "loewner/errors.hpp"
#include "loewner/solver.hpp"
#include "raster_identity.hpp"

using namespace loewner;
using doctest::Approx;

namespace {

SolverConfig steps(std::size_t n) {
    SolverConfig c;
    c.n_steps = n;
    return c;
}

// classical RK4 for f' = -2 / (f - xi) with constant xi, fixed step
Complex rk4_upward_constant(Complex z, double xi, double s, int n) {
    auto f = [&](Complex w) { return -2.0 / (w - xi); };
    const double h = s / n;
    for (int i = 0; i < n; ++i) {
        const Complex k1 = f(z);
        const Complex k2 = f(z + 0.5 * h * k1);
        const Complex k3 = f(z + 0.5 * h * k2);
        const Complex k4 = f(z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("config validation") {
    SolverConfig c;
    c.n_steps = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.blowup_eps = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.ode_substeps = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    CHECK(SolverConfig{}.step_cap(2.0) == Approx(0.1));
}

TEST_CASE("elementary slit maps") {
    const double c = 0.7, dt = 0.09;
    const Complex tip = elementary_inverse_slit(Complex(c, 0), c, dt);
    CHECK(tip.real() == Approx(c).epsilon(1e-15));
    CHECK(tip.imag() == Approx(2 * std::sqrt(dt)).epsilon(1e-15));

    const Complex back = elementary_slit(tip, c, dt);
    CHECK(std::abs(back - Complex(c, 0)) < 1e-12);

    const Complex ten = elementary_inverse_slit(Complex(10, 0), 0, 0.25);
    CHECK(ten.real() == Approx(std::sqrt(99.0)).epsilon(1e-15));
    CHECK(ten.imag() == 0.0);
    CHECK(ten.real() == Approx(9.9499).epsilon(1e-5));
    // the same value from the upward ODE with constant xi
    const Complex ode = rk4_upward_constant(Complex(10, 0), 0, 0.25, 1000);
    CHECK(std::abs(ode - ten) < 1e-10);
}

TEST_CASE("slit map round trips stay in the half-plane") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-3, 3), uy(0, 3), udt(1e-4, 0.5);
    for (int i = 0; i < 2000; ++i) {
        const Complex w{ux(rng), uy(rng)};
        const double c = ux(rng), dt = udt(rng);
        const Complex z = elementary_inverse_slit(w, c, dt);
        CHECK(z.imag() >= 0.0);
        if (w.imag() > 1e-3) CHECK(std::abs(elementary_slit(z, c, dt) - w) < 1e-10);
        const Complex g = elementary_slit(w, c, dt);
        CHECK(g.imag() >= 0.0);
        CHECK(std::abs(elementary_inverse_slit(g, c, dt) - w) < 1e-10);
    }
}

TEST_CASE("constant-driver traces are vertical slits") {
    const TracePath t = compute_trace(DrivingFunction::constant(0), steps(1000));
    CHECK(std::abs(t.points.back() - Complex(0, 2)) < 1e-3);
    CHECK(t.times.back() == 1.0);
    CHECK(t.points.size() == 1001);
    for (std::size_t k = 0; k < t.points.size(); ++k) {
        CHECK(t.points[k].imag() == Approx(2 * std::sqrt(t.times[k])).epsilon(1e-9));
    }

    const TracePath t3 = compute_trace(DrivingFunction::constant(3, 0.25), steps(100));
    CHECK(std::abs(t3.points.back() - Complex(3, 1)) < 1e-6);
}

TEST_CASE("trace basics") {
    const auto d = DrivingFunction::sqrt_end(3);
    const TracePath t = compute_trace(d, steps(2000));
    CHECK(std::abs(t.points.front() - Complex(d.eval(0), 0)) < 1e-6);
    for (std::size_t k = 0; k < t.points.size(); ++k) {
        CHECK(t.points[k].imag() >= 0.0);
        if (k > 0) CHECK(t.times[k] > t.times[k - 1]);
    }
}

TEST_CASE("trace sampling options") {
    SolverConfig c = steps(100);
    c.sample_stride = 10;
    c.dense_tail = 0.05;
    const auto d = DrivingFunction::sqrt_end(2);
    const TracePath t = compute_trace(d, c);
    const TracePath full = compute_trace(d, steps(100));
    CHECK(t.points.size() == 10 + 6);
    CHECK(t.times.back() == 1.0);
    for (std::size_t k = 0; k < t.times.size(); ++k) {
        const auto idx = static_cast<std::size_t>(std::lround(t.times[k] * 100));
        CHECK(t.points[k] == full.points[idx]);
    }
}

TEST_CASE("trace refinement splits steep steps") {
    SolverConfig c = steps(100);
    c.refine_threshold = 1.0;
    const TracePath t = compute_trace(DrivingFunction::power_end(4, 1.0 / 3.0), c);
    CHECK(t.composed_steps > 100);
    CHECK(t.refine_threshold == 1.0);
    CHECK(compute_trace(DrivingFunction::constant(1), c).composed_steps == 100);
}

TEST_CASE("forward composition recovers the driver") {
    const auto d = DrivingFunction::sqrt_end(3);
    const std::size_t n = 100000;
    SolverConfig c = steps(n);
    c.sample_stride = 2000;
    const TracePath t = compute_trace(d, c);
    const double dt = 1.0 / n;
    for (std::size_t s = 1; s < t.points.size(); ++s) {
        if (t.times[s] > 0.95) break;
        const auto m = static_cast<std::size_t>(std::lround(t.times[s] * n));
        Complex w = t.points[s];
        for (std::size_t k = 1; k <= m; ++k) w = elementary_slit(w, d.eval((k - 0.5) * dt), dt);
        CHECK(std::abs(w - Complex(d.eval(t.times[s]), 0)) < 1e-4);
    }
}

TEST_CASE("downward flow examples") {
    const auto c0 = DrivingFunction::constant(0);
    const FlowTrajectory f = downward_flow(Complex(0, 1), c0, steps(1000));
    REQUIRE(f.swallow_time);
    CHECK(*f.swallow_time == Approx(0.25).epsilon(1e-6));

    const FlowTrajectory r = downward_flow(Complex(100, 0), c0, steps(1000));
    CHECK(!r.swallow_time);
    CHECK(r.final_point().real() == Approx(std::sqrt(10004.0)).epsilon(1e-8));
    CHECK(r.final_point().real() == Approx(100.02).epsilon(1e-6));
    CHECK(r.final_point().imag() == 0.0);
    CHECK(r.times.back() == Approx(1.0));

    CHECK(classify_point(Complex(2.5, 0), DrivingFunction::sqrt_end(4), {}).swallowed);
    CHECK_THROWS_AS(downward_flow(Complex(0, 0), c0, {}), DomainError);
    CHECK_THROWS_AS(downward_flow(Complex(1, -1), c0, {}), DomainError);
}

TEST_CASE("trajectories are ordered and finite") {
    const FlowTrajectory f = downward_flow(Complex(0.3, 0.8), DrivingFunction::sqrt_end(3), {});
    for (std::size_t k = 1; k < f.times.size(); ++k) {
        CHECK(f.times[k] > f.times[k - 1]);
        CHECK(std::isfinite(f.points[k].real()));
        CHECK(std::isfinite(f.points[k].imag()));
    }
}

TEST_CASE("constant-driver closed forms off the slit line") {
    // g_t(z) = sqrt(z^2 + 4t) for lambda = 0
    for (Complex z : {Complex(0.5, 0.5), Complex(-2, 0.1), Complex(1, 3)}) {
        Complex exact = std::sqrt(z * z + 4.0);
        if (exact.imag() < 0) exact = -exact;
        const FlowTrajectory f = downward_flow(z, DrivingFunction::constant(0), {});
        CHECK(std::abs(f.final_point() - exact) < 1e-7);
        // error tracks the tolerance
        SolverConfig tight;
        tight.rtol = 1e-12;
        CHECK(std::abs(downward_flow(z, DrivingFunction::constant(0), tight).final_point() - exact) < 1e-10);
    }
}

TEST_CASE("upward flow examples") {
    const auto a = DrivingFunction::constant(1.5);
    const FlowTrajectory tip = upward_flow(Complex(1.5, 1e-8), a, 1.0, steps(1000));
    CHECK(std::abs(tip.final_point() - Complex(1.5, 2)) < 1e-6);

    const FlowTrajectory exact = upward_flow(Complex(1.5, 2 * std::sqrt(0.36)), a, 0.36, {});
    CHECK(std::abs(exact.final_point() - Complex(1.5, 2 * std::sqrt(0.72))) < 1e-8);

    CHECK_THROWS_AS(upward_flow(Complex(1.5, 0), a, 1.0, {}), DomainError);
    CHECK_THROWS_AS(upward_flow(Complex(0, 1), a, 1.5, {}), DomainError);
}

TEST_CASE("upward flow raises imaginary parts") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-3, 6), uy(0.01, 2);
    const auto d = DrivingFunction::sqrt_end(4);
    for (int i = 0; i < 20; ++i) {
        const FlowTrajectory f = upward_flow(Complex(ux(rng), uy(rng)), d, 1.0, {});
        for (std::size_t k = 1; k < f.points.size(); ++k) CHECK(f.points[k].imag() > f.points[k - 1].imag());
    }
}

TEST_CASE("upward flow inverts the downward flow") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-2, 7), uy(0.05, 3);
    const auto d = DrivingFunction::sqrt_end(3);
    const SolverConfig c = steps(10000);
    int tested = 0;
    while (tested < 25) {
        const Complex z{ux(rng), uy(rng)};
        const FlowTrajectory g = downward_flow(z, d, c);
        if (g.swallow_time) continue;
        const FlowTrajectory f = upward_flow(g.final_point(), d, 1.0, c);
        CHECK(std::abs(f.final_point() - z) < 1e-6);
        ++tested;
    }
}

TEST_CASE("swallow times on the real line") {
    const auto k4 = DrivingFunction::sqrt_end(4);
    const auto s3 = swallow_time(3.0, k4, {});
    REQUIRE(s3);
    CHECK(*s3 <= 1.0);
    CHECK(!swallow_time(-1.0, k4, {}));
    const auto p3 = swallow_time(3.0, DrivingFunction::power_end(4, 1.0 / 3.0), {});
    REQUIRE(p3);
    CHECK(*p3 <= 1.0);
    // to the right of lambda(0) = 4 under k = 4 nothing is swallowed
    CHECK(!swallow_time(4.5, k4, {}));
    CHECK_THROWS_AS(swallow_time(4.0, k4, {}), DomainError);
}

TEST_CASE("constant driver swallows nothing on the real line") {
    for (double x : {-3.0, -0.1, 0.2, 5.0}) CHECK(!swallow_time(x, DrivingFunction::constant(0), {}));
}

TEST_CASE("real intervals of square-root hulls") {
    const RealInterval k4 = locate_real_interval(DrivingFunction::sqrt_end(4), {});
    CHECK(k4.left == Approx(2.0).epsilon(1e-3));
    CHECK(k4.right == Approx(4.0).epsilon(1e-3));
    const RealInterval k5 = locate_real_interval(DrivingFunction::sqrt_end(5), {});
    CHECK(std::abs(k5.left - 1.0) < 1e-3);
    CHECK(k5.left <= k5.right);
}

TEST_CASE("slit raster") {
    Window w{-1, 1, 0, 3};
    const HullRaster r = hull_raster(DrivingFunction::constant(0), 1.0, w, {41, 61}, steps(1000));
    const double dx = r.cell_width(), dy = r.cell_height();
    double top = 0;
    for (std::size_t j = 0; j < r.resolution.ny; ++j) {
        for (std::size_t i = 0; i < r.resolution.nx; ++i) {
            if (!r.member(i, j)) continue;
            CHECK(std::abs(r.x(i)) <= dx + 1e-12);
            top = std::max(top, r.y(j));
        }
    }
    CHECK(std::abs(top - 2.0) <= dy + 1e-12);
    CHECK(r.unknown_cells == 0);
}

TEST_CASE("raster validation") {
    const auto d = DrivingFunction::sqrt_end(3);
    CHECK_THROWS_AS(hull_raster(d, 1.5, {}, {10, 10}, {}), DomainError);
    CHECK_THROWS_AS(hull_raster(d, 1.0, {0, 0, 0, 1}, {10, 10}, {}), ParameterError);
    CHECK_THROWS_AS(hull_raster(d, 1.0, {0, 1, -2, -1}, {10, 10}, {}), DomainError);
    CHECK_THROWS_AS(hull_raster(d, 1.0, {}, {1, 10}, {}), ParameterError);
}

TEST_CASE("raster real interval") {
    const HullRaster r = hull_raster(DrivingFunction::sqrt_end(5), 1.0, {0, 6, 0, 3}, {30, 15}, {});
    REQUIRE(r.real_interval);
    CHECK(std::abs(r.real_interval->left - 1.0) < 1e-3);
    CHECK(r.real_interval->left <= r.real_interval->right);
}

TEST_CASE("hulls grow in time") {
    const auto d = DrivingFunction::power_end(4, 1.0 / 3.0);
    const Window w{0, 5, 0, 2.5};
    const Resolution res{60, 30};
    HullRaster prev = hull_raster(d, 0.25, w, res, {}, false);
    for (double T : {0.5, 0.9, 1.0}) {
        const HullRaster next = hull_raster(d, T, w, res, {}, false);
        for (std::size_t c = 0; c < next.cells.size(); ++c) {
            if (prev.cells[c] == CellState::member) CHECK(next.cells[c] == CellState::member);
        }
        CHECK(next.member_count() >= prev.member_count());
        prev = next;
    }
}

TEST_CASE("scaling, translation and reflection of rasters") {
    using testing_support::one_cell_mismatches;
    using testing_support::same_cell;
    const auto d = DrivingFunction::power_end(4, 1.0 / 3.0);
    const Window w{0, 5, 0, 2.5};
    const Resolution res{50, 25};
    const SolverConfig c = steps(500);
    const HullRaster base = hull_raster(d, 1.0, w, res, c);

    const double k = 1.7;
    const HullRaster scaled =
        hull_raster(transform(d, TransformSpec::scale(k)), k * k, {k * w.x0, k * w.x1, k * w.y0, k * w.y1}, res, c);
    CHECK(one_cell_mismatches(base, scaled, same_cell, same_cell) == 0);

    const HullRaster moved =
        hull_raster(transform(d, TransformSpec::translate(-2.5)), 1.0, {w.x0 - 2.5, w.x1 - 2.5, w.y0, w.y1}, res, c);
    CHECK(one_cell_mismatches(base, moved, same_cell, same_cell) == 0);

    const HullRaster mirrored =
        hull_raster(transform(d, TransformSpec::reflect()), 1.0, {-w.x1, -w.x0, w.y0, w.y1}, res, c);
    auto flip = [&](std::size_t i, std::size_t j) { return std::pair{res.nx - 1 - i, j}; };
    CHECK(one_cell_mismatches(base, mirrored, flip, flip) == 0);
}

TEST_CASE("concatenation consistency") {
    const auto d = DrivingFunction::power_end(4, 1.0 / 3.0);
    CHECK(testing_support::concatenation_mismatches(d, 0.5, {0, 5, 0, 2.5}, {30, 15}, {}) == 0);

    // swallow times shift by s along the flow
    const auto k4 = DrivingFunction::sqrt_end(4);
    const double s = 0.3;
    const auto full = swallow_time(3.5, k4, {});
    REQUIRE(full);
    REQUIRE(*full > s);
    const FlowTrajectory g = downward_flow(Complex(3.5, 0), transform(k4, TransformSpec::restrict_to(s)), {});
    const auto rest = swallow_time(g.final_point().real(), transform(k4, TransformSpec::concatenate_from(s)), {});
    REQUIRE(rest);
    CHECK(s + *rest == Approx(*full).epsilon(1e-6));
}

TEST_CASE("raster classification is thread independent") {
    const auto d = DrivingFunction::sqrt_end(4);
    SolverConfig one;
    one.threads = 1;
    SolverConfig many;
    many.threads = 4;
    const Window w{0, 5, 0, 2};
    const HullRaster a = hull_raster(d, 1.0, w, {40, 20}, one);
    const HullRaster b = hull_raster(d, 1.0, w, {40, 20}, many);
    CHECK(a.cells == b.cells);
}

}
