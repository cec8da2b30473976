#include <algorithm>
#include <cmath>

#include "flow_internal.hpp"
#include "loewner/errors.hpp"
#include "loewner/parallel.hpp"
#include "loewner/solver.hpp"

namespace loewner {

std::size_t HullRaster::member_count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), CellState::member));
}

double HullRaster::cell_width() const {
    return resolution.nx > 1 ? (window.x1 - window.x0) / static_cast<double>(resolution.nx - 1) : 0.0;
}

double HullRaster::cell_height() const {
    return resolution.ny > 1 ? (window.y1 - window.y0) / static_cast<double>(resolution.ny - 1) : 0.0;
}

double HullRaster::x(std::size_t i) const { return window.x0 + static_cast<double>(i) * cell_width(); }
double HullRaster::y(std::size_t j) const { return window.y0 + static_cast<double>(j) * cell_height(); }

namespace {

void mark_trace(HullRaster& raster, const TracePath& trace) {
    const double cw = raster.cell_width();
    const double ch = raster.cell_height();
    const auto nx = raster.resolution.nx;
    const auto ny = raster.resolution.ny;
    auto mark = [&](Complex z) {
        const double fi = cw > 0.0 ? (z.real() - raster.window.x0) / cw : 0.0;
        const double fj = ch > 0.0 ? (z.imag() - raster.window.y0) / ch : 0.0;
        if (fi < -0.5 || fj < -0.5 || fi > nx - 0.5 || fj > ny - 0.5) return;
        const auto i = std::min(nx - 1, static_cast<std::size_t>(std::lround(std::max(0.0, fi))));
        const auto j = std::min(ny - 1, static_cast<std::size_t>(std::lround(std::max(0.0, fj))));
        raster.cells[j * nx + i] = CellState::member;
    };
    const double spacing = 0.5 * std::min(cw > 0.0 ? cw : ch, ch > 0.0 ? ch : cw);
    for (std::size_t k = 0; k < trace.points.size(); ++k) {
        if (k == 0 || !(spacing > 0.0)) {
            mark(trace.points[k]);
            continue;
        }
        const Complex a = trace.points[k - 1];
        const Complex b = trace.points[k];
        const auto pieces = static_cast<std::size_t>(std::ceil(std::abs(b - a) / spacing));
        const std::size_t n = std::clamp<std::size_t>(pieces, 1, 1000000);
        for (std::size_t s = 1; s <= n; ++s) mark(a + (b - a) * (static_cast<double>(s) / n));
    }
}

}  // namespace

HullRaster hull_raster(const DrivingFunction& driver, double T, const Window& window, const Resolution& resolution,
                       const SolverConfig& config, bool include_trace) {
    config.validate();
    if (!(T > 0.0) || T > driver.horizon() * (1.0 + 1e-12)) throw DomainError("raster time must lie in (0, horizon]");
    if (!(window.x1 > window.x0) || !(window.y1 > window.y0)) throw ParameterError("window must have positive extent");
    if (window.y1 < 0.0) throw DomainError("window does not meet the closed upper half-plane");
    if (resolution.nx < 2 || resolution.ny < 2) throw ParameterError("resolution must be at least 2 x 2");

    const DrivingFunction d = T < driver.horizon() ? transform(driver, TransformSpec::restrict_to(T)) : driver;

    HullRaster raster;
    raster.window = window;
    raster.resolution = resolution;
    raster.time = T;
    raster.cells.assign(resolution.nx * resolution.ny, CellState::outside);

    const detail::TailEnvelope envelope(d, config.tau_max);
    parallel_for(raster.cells.size(), config.threads, [&](std::size_t idx) {
        const std::size_t i = idx % resolution.nx;
        const std::size_t j = idx / resolution.nx;
        const Complex z(raster.x(i), raster.y(j));
        if (z.imag() < 0.0) return;
        try {
            if (detail::classify(z, d, config, config.tau_max, envelope).swallowed) {
                raster.cells[idx] = CellState::member;
            }
        } catch (const AmbiguousSwallowError&) {
            raster.cells[idx] = CellState::unknown;
        }
    });
    if (include_trace) mark_trace(raster, compute_trace(d, config));
    raster.unknown_cells =
        static_cast<std::size_t>(std::count(raster.cells.begin(), raster.cells.end(), CellState::unknown));
    raster.real_interval = locate_real_interval(d, config);
    return raster;
}

}  // namespace loewner
