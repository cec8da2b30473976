#include "loewner/stochastic.hpp"

#include <algorithm>
#include <cmath>

#include "loewner/errors.hpp"

namespace loewner {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
}

void extend(SubordinatorPath& path, std::mt19937_64& rng, std::size_t steps) {
    const double scale = std::pow(path.du, 1.0 / path.alpha);
    for (std::size_t i = 0; i < steps; ++i) {
        const double inc = scale * stable_variate(path.alpha, rng);
        path.u_grid.push_back(static_cast<double>(path.u_grid.size()) * path.du);
        path.S_values.push_back(path.S_values.back() + inc);
    }
}

SubordinatorPath start_path(double alpha, double du, std::uint64_t seed) {
    check_alpha(alpha);
    if (!(du > 0.0)) throw ParameterError("du must be positive");
    SubordinatorPath path;
    path.alpha = alpha;
    path.du = du;
    path.seed = seed;
    path.u_grid = {0.0};
    path.S_values = {0.0};
    return path;
}

}  // namespace

double stable_variate(double alpha, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, M_PI);
    std::exponential_distribution<double> exponential(1.0);
    double u = 0.0;
    while (u == 0.0) u = uniform(rng);
    const double w = exponential(rng);
    const double a = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha);
    const double b = std::pow(std::sin((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
    return a * b;
}

SubordinatorPath sample_subordinator(double alpha, double u_max, double du, std::uint64_t seed) {
    SubordinatorPath path = start_path(alpha, du, seed);
    if (!(u_max > 0.0)) throw ParameterError("u_max must be positive");
    std::mt19937_64 rng(seed);
    extend(path, rng, static_cast<std::size_t>(std::ceil(u_max / du - 1e-9)));
    return path;
}

SubordinatorPath sample_subordinator_covering(double alpha, double t_max, double du, std::uint64_t seed,
                                              double u_min) {
    SubordinatorPath path = start_path(alpha, du, seed);
    std::mt19937_64 rng(seed);
    extend(path, rng, static_cast<std::size_t>(std::ceil(u_min / du - 1e-9)));
    while (path.S_values.back() <= t_max) {
        if (path.u_grid.size() > 50'000'000) throw CoverageError("subordinator does not reach t_max");
        extend(path, rng, path.u_grid.size());
    }
    return path;
}

double default_du(double alpha, double horizon, std::size_t n_t) {
    check_alpha(alpha);
    if (n_t == 0 || !(horizon > 0.0)) throw ParameterError("invalid t grid");
    return std::pow(4.0 * horizon / static_cast<double>(n_t), alpha);
}

InversePath invert_path(const SubordinatorPath& path, double horizon, std::size_t n_t) {
    if (n_t == 0 || !(horizon > 0.0)) throw ParameterError("invalid t grid");
    if (path.S_values.empty() || !(path.S_values.back() > horizon)) {
        throw CoverageError("subordinator path does not cover [0, T]");
    }
    InversePath out;
    out.alpha = path.alpha;
    out.seed = path.seed;
    out.t_grid.resize(n_t + 1);
    out.E_values.resize(n_t + 1);
    for (std::size_t j = 0; j <= n_t; ++j) {
        const double t = horizon * static_cast<double>(j) / static_cast<double>(n_t);
        const auto it = std::lower_bound(path.S_values.begin(), path.S_values.end(), t);
        out.t_grid[j] = t;
        out.E_values[j] = path.u_grid[static_cast<std::size_t>(it - path.S_values.begin())];
    }
    return out;
}

double flat_fraction(const InversePath& path) {
    const std::size_t n = path.t_grid.size();
    if (n < 2) return 0.0;
    double flat = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        if (path.E_values[j + 1] == path.E_values[j]) flat += path.t_grid[j + 1] - path.t_grid[j];
    }
    return flat / (path.t_grid.back() - path.t_grid.front());
}

DrivingFunction make_time_changed_driver(double k, const InversePath& path, bool clip) {
    return DrivingFunction::time_changed(k, SampledPath{path.t_grid, path.E_values}, clip);
}

}  // namespace loewner
