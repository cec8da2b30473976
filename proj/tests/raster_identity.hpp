#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "loewner/solver.hpp"

namespace testing_support {

using CellMap = std::function<std::pair<std::size_t, std::size_t>(std::size_t, std::size_t)>;

// Members of `a` with no member of `b` in the 3x3 block around their image,
// plus the same count with the roles swapped.
inline std::size_t one_cell_mismatches(const loewner::HullRaster& a, const loewner::HullRaster& b,
                                       const CellMap& a_to_b, const CellMap& b_to_a) {
    auto near_member = [](const loewner::HullRaster& r, std::size_t i, std::size_t j) {
        for (std::size_t jj = j == 0 ? 0 : j - 1; jj <= j + 1 && jj < r.resolution.ny; ++jj) {
            for (std::size_t ii = i == 0 ? 0 : i - 1; ii <= i + 1 && ii < r.resolution.nx; ++ii) {
                if (r.member(ii, jj)) return true;
            }
        }
        return false;
    };
    std::size_t bad = 0;
    for (std::size_t j = 0; j < a.resolution.ny; ++j) {
        for (std::size_t i = 0; i < a.resolution.nx; ++i) {
            if (!a.member(i, j)) continue;
            const auto [bi, bj] = a_to_b(i, j);
            if (!near_member(b, bi, bj)) ++bad;
        }
    }
    for (std::size_t j = 0; j < b.resolution.ny; ++j) {
        for (std::size_t i = 0; i < b.resolution.nx; ++i) {
            if (!b.member(i, j)) continue;
            const auto [ai, aj] = b_to_a(i, j);
            if (!near_member(a, ai, aj)) ++bad;
        }
    }
    return bad;
}

inline std::pair<std::size_t, std::size_t> same_cell(std::size_t i, std::size_t j) { return {i, j}; }

// Nodes z of `window` not in K_s whose membership in K_T disagrees with
// membership of g_s(z) in the hull of lambda(s + .) at T - s, excluding
// nodes next to a membership change in the K_T raster.
inline std::size_t concatenation_mismatches(const loewner::DrivingFunction& driver, double s,
                                            const loewner::Window& window, const loewner::Resolution& res,
                                            const loewner::SolverConfig& config) {
    using namespace loewner;
    const double T = driver.horizon();
    const HullRaster full = hull_raster(driver, T, window, res, config, false);
    const HullRaster early = hull_raster(driver, s, window, res, config, false);
    const DrivingFunction head = transform(driver, TransformSpec::restrict_to(s));
    const DrivingFunction tail = transform(driver, TransformSpec::concatenate_from(s));
    auto boundary = [&](std::size_t i, std::size_t j) {
        for (std::size_t jj = j == 0 ? 0 : j - 1; jj <= j + 1 && jj < res.ny; ++jj) {
            for (std::size_t ii = i == 0 ? 0 : i - 1; ii <= i + 1 && ii < res.nx; ++ii) {
                if (full.member(ii, jj) != full.member(i, j)) return true;
            }
        }
        return false;
    };
    std::size_t bad = 0;
    for (std::size_t j = 0; j < res.ny; ++j) {
        for (std::size_t i = 0; i < res.nx; ++i) {
            if (early.member(i, j) || boundary(i, j)) continue;
            const Complex z{full.x(i), full.y(j)};
            if (z == Complex(driver.eval(0.0))) continue;
            const FlowTrajectory g = downward_flow(z, head, config);
            if (g.swallow_time) continue;
            const Complex w = g.final_point();
            const bool later = w != Complex(tail.eval(0.0)) && classify_point(w, tail, config).swallowed;
            if (later != full.member(i, j)) ++bad;
        }
    }
    return bad;
}

}  // namespace testing_support
