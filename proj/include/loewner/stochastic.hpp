#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "loewner/drivers.hpp"

namespace loewner {

struct SubordinatorPath {
    double alpha = 0.5;
    double du = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> u_grid;
    std::vector<double> S_values;
};

struct InversePath {
    double alpha = 0.5;
    std::uint64_t seed = 0;
    std::vector<double> t_grid;
    std::vector<double> E_values;
};

/// Positive alpha-stable variate with E exp(-s X) = exp(-s^alpha), from one
/// uniform and one exponential draw.
double stable_variate(double alpha, std::mt19937_64& rng);

SubordinatorPath sample_subordinator(double alpha, double u_max, double du, std::uint64_t seed);

/// Keeps extending the same random stream until S exceeds t_max and u
/// reaches at least u_min.
SubordinatorPath sample_subordinator_covering(double alpha, double t_max, double du, std::uint64_t seed,
                                              double u_min = 1.0);

/// Step du = (4 dt)^alpha, so a typical increment du^{1/alpha} spans four
/// t-grid cells of width dt = T / n_t.
double default_du(double alpha, double horizon, std::size_t n_t);

/// E_t = inf{u : S_u >= t} on the grid t_j = j T / n_t.
InversePath invert_path(const SubordinatorPath& path, double horizon, std::size_t n_t);

/// Fraction of [0, T] covered by grid cells on which E stays constant.
double flat_fraction(const InversePath& path);

/// lambda(t) = k sqrt(1 - E_t), read with the previous-value rule.
DrivingFunction make_time_changed_driver(double k, const InversePath& path, bool clip = true);

}  // namespace loewner
