#include <algorithm>
#include <cmath>
#include <limits>

#include "loewner/errors.hpp"
#include "loewner/solver.hpp"
#include "flow_internal.hpp"

namespace loewner {

void SolverConfig::validate() const {
    if (n_steps < 1) throw ParameterError("n_steps must be at least 1");
    if (!(blowup_eps > 0.0)) throw ParameterError("blowup_eps must be positive");
    if (ode_substeps < 1) throw ParameterError("ode_substeps must be at least 1");
    if (max_step < 0.0) throw ParameterError("max_step must be nonnegative");
    if (!(rtol > 0.0)) throw ParameterError("rtol must be positive");
    if (!(tau_max > 0.0) || !(tau_max_bisection > 0.0)) throw ParameterError("tau_max must be positive");
    if (!(interval_tol > 0.0)) throw ParameterError("interval_tol must be positive");
    if (refine_threshold < 0.0) throw ParameterError("refine_threshold must be nonnegative");
    if (sample_stride < 1) throw ParameterError("sample_stride must be at least 1");
    if (!(dense_tail >= 0.0 && dense_tail <= 1.0)) throw ParameterError("dense_tail must lie in [0, 1]");
}

double SolverConfig::step_cap(double horizon) const { return max_step > 0.0 ? max_step : horizon / 20.0; }

double SolverConfig::initial_step(double horizon) const {
    return std::min(step_cap(horizon), horizon / static_cast<double>(n_steps * ode_substeps));
}

namespace detail {

TailEnvelope::TailEnvelope(const DrivingFunction& driver, double tau_max) : driver_(driver) {
    constexpr int samples_per_shell = 8;
    const double tau_end = std::min(tau_max, 700.0);
    const auto shells = static_cast<std::size_t>(std::ceil(tau_end / shell_width_)) + 1;
    sup_.assign(shells + 1, 0.0);
    // sup_[j] >= sup_{tau' >= tau_j} |Lambda(tau')| exp(-(tau' - tau_j) / 2)
    double carry = std::abs(driver.terminal_profile(shells * shell_width_));
    sup_[shells] = carry;
    for (std::size_t j = shells; j-- > 0;) {
        const double tau_j = j * shell_width_;
        double shell = 0.0;
        for (int m = 0; m <= samples_per_shell; ++m) {
            const double dtau = shell_width_ * m / samples_per_shell;
            shell = std::max(shell, std::abs(driver.terminal_profile(tau_j + dtau)) * std::exp(-0.5 * dtau));
        }
        carry = std::max(shell, carry * std::exp(-0.5 * shell_width_));
        sup_[j] = carry;
    }
    tau_table_end_ = shells * shell_width_;
}

double TailEnvelope::bound(double tau) const {
    constexpr double sampling_safety = 1.25;
    if (tau < tau_table_end_) {
        const auto j = static_cast<std::size_t>(tau / shell_width_);
        return sampling_safety * sup_[j] * std::exp(0.5 * shell_width_);
    }
    const double tail = sup_.back() * std::exp(-0.5 * (tau - tau_table_end_));
    return 1.5 * std::max(std::abs(driver_.terminal_profile(tau)), tail);
}

double TailEnvelope::escape_radius(double tau) const {
    // Future hulls stay within 4 max(sqrt(u), osc) of the driver, osc <= 2 M(u).
    return 4.04 * std::max(1.0, 2.0 * bound(tau));
}

template <class S>
DownwardOutcome integrate_downward(S z0, const DrivingFunction& driver, const SolverConfig& config, double tau_max,
                                   const TailEnvelope& envelope, bool early_exit, FlowTrajectory* record) {
    const double T = driver.horizon();
    const double lam_T = driver.eval(T);
    const double sqrt_T = std::sqrt(T);
    const double eps_q = config.blowup_eps / sqrt_T;

    auto profile = [&](double tau) { return driver.terminal_profile(tau); };
    auto rhs = [&](double tau, const S& w) -> S { return 0.5 * w + 2.0 / (w - profile(tau)); };

    double tau = 0.0;
    S w = (z0 - lam_T) / sqrt_T;
    double q = std::abs(w - profile(0.0));
    if (q == 0.0) throw DomainError("starting point coincides with lambda(0)");

    auto current_g = [&](double tau_now, const S& w_now) -> Complex {
        return Complex(lam_T) + Complex(w_now) * std::sqrt(T * std::exp(-tau_now));
    };
    auto time_of = [&](double tau_now) { return -T * std::expm1(-tau_now); };

    if (record) {
        record->times.push_back(0.0);
        record->points.push_back(Complex(z0));
    }

    // Close to the driver on the side it is moving towards, the flow pins the
    // point at a distance that shrinks with the driver speed. That regime is
    // stiff, so it switches to extrapolated backward Euler.
    constexpr double stiff_rtol = 1e-4;
    double h_free = config.initial_step(T) / T;
    while (tau < tau_max) {
        const double u = T * std::exp(-tau);
        const double outer_cap = std::min({8.0, config.step_cap(T) / u, tau_max - tau});
        const S q_signed = w - profile(tau);
        const bool attracting = std::real(q_signed * q_signed) > 0.0;
        const bool stiff = attracting && 0.4 * q * q < h_free;
        double h = std::min(h_free, stiff ? outer_cap : std::min(outer_cap, 0.1 * q * q));
        if (h > (tau_max - tau) * (1.0 - 1e-9)) h = tau_max - tau;
        if (h < 1e-14 * (1.0 + tau)) {
            if (q < 10.0 * eps_q) return {true, time_of(tau), current_g(tau, w)};
            throw AmbiguousSwallowError(time_of(tau), current_g(tau, w), lam_T + profile(tau) * std::sqrt(u));
        }
        const auto trial = stiff ? implicit_doubling(profile, tau, w, h) : rk4_doubling(rhs, tau, w, h);
        const double order = stiff ? 0.5 : 0.2;
        if (!trial.finite) {
            h_free = 0.25 * h;
            continue;
        }
        double scale = config.rtol * (q + eps_q);
        if (stiff) {
            const double loose = std::max(config.rtol, stiff_rtol) * (q + eps_q);
            // recorded trajectories keep an absolute accuracy of rtol sqrt(T) in g
            scale = record ? std::min(loose, config.rtol * (q + eps_q + std::exp(0.5 * tau))) : loose;
        }
        scale += 1e-15 * std::abs(w);
        if (trial.error > scale) {
            h_free = h * std::max(0.2, 0.9 * std::pow(scale / trial.error, order));
            continue;
        }
        tau = h == tau_max - tau ? tau_max : tau + h;
        w = trial.value;
        q = std::abs(w - profile(tau));
        if (record) {
            const double t = time_of(tau);
            if (t > record->times.back()) {
                record->times.push_back(t);
                record->points.push_back(current_g(tau, w));
            }
        }
        if (q < eps_q) return {true, time_of(tau), current_g(tau, w)};
        if (early_exit && q > envelope.escape_radius(tau)) return {false, T, current_g(tau, w)};
        const double grow = trial.error > 0.0 ? std::min(4.0, 0.9 * std::pow(scale / trial.error, order)) : 4.0;
        if (h < h_free) {
            // capped by the distance to the driver; let the free step keep
            // growing while the capped one is far inside tolerance
            h_free = grow >= 4.0 ? std::min(2.0 * h_free, 8.0) : std::max(h_free, h * grow);
        } else {
            h_free = h * grow;
        }
    }
    // Points still within the escape radius at the end follow the driver
    // into the horizon and are captured at time T.
    const bool captured = q <= envelope.escape_radius(tau);
    return {captured, T, current_g(tau, w)};
}

template DownwardOutcome integrate_downward<double>(double, const DrivingFunction&, const SolverConfig&, double,
                                                    const TailEnvelope&, bool, FlowTrajectory*);
template DownwardOutcome integrate_downward<Complex>(Complex, const DrivingFunction&, const SolverConfig&, double,
                                                     const TailEnvelope&, bool, FlowTrajectory*);

SwallowStatus classify(Complex z0, const DrivingFunction& driver, const SolverConfig& config, double tau_max,
                       const TailEnvelope& envelope) {
    if (z0.imag() < 0.0) throw DomainError("point lies below the real axis");
    if (z0 == Complex(driver.eval(0.0))) return {true, 0.0};
    const auto out = z0.imag() == 0.0
                         ? integrate_downward<double>(z0.real(), driver, config, tau_max, envelope, true, nullptr)
                         : integrate_downward<Complex>(z0, driver, config, tau_max, envelope, true, nullptr);
    return {out.swallowed, out.time};
}

}  // namespace detail

FlowTrajectory downward_flow(Complex z0, const DrivingFunction& driver, const SolverConfig& config) {
    config.validate();
    if (z0.imag() < 0.0) throw DomainError("starting point lies below the real axis");
    if (z0 == Complex(driver.eval(0.0))) throw DomainError("starting point coincides with lambda(0)");
    const detail::TailEnvelope envelope(driver, config.tau_max);
    FlowTrajectory traj;
    const auto out =
        z0.imag() == 0.0
            ? detail::integrate_downward<double>(z0.real(), driver, config, config.tau_max, envelope, false, &traj)
            : detail::integrate_downward<Complex>(z0, driver, config, config.tau_max, envelope, false, &traj);
    if (out.swallowed) traj.swallow_time = out.time;
    return traj;
}

namespace {

template <class S>
void integrate_upward(S z0, const DrivingFunction& driver, double s, const SolverConfig& config,
                      FlowTrajectory& traj) {
    const double T = driver.horizon();
    const bool to_horizon = s >= T;
    const double lam_T = driver.eval(T);
    auto xi = [&](double t) {
        return to_horizon ? lam_T + driver.terminal_increment(std::min(t, T)) : driver.eval(std::max(0.0, s - t));
    };
    auto rhs = [&](double t, const S& f) -> S { return -2.0 / (f - xi(t)); };

    double t = 0.0;
    S f = z0;
    double dist = std::abs(f - xi(0.0));
    if (dist == 0.0) throw DomainError("upward flow started at the driver value xi(0)");
    traj.times.push_back(0.0);
    traj.points.push_back(Complex(f));

    double h = config.initial_step(s);
    std::size_t step = 0;
    while (t < s) {
        h = std::min({h, config.step_cap(T), 0.1 * dist * dist, s - t});
        if (t + h == t) {
            throw IntegrationError("upward flow step underflow near the driver", step);
        }
        const auto trial = detail::rk4_doubling(rhs, t, f, h);
        if (!trial.finite) {
            h *= 0.25;
            continue;
        }
        const double scale = config.rtol * (dist + config.blowup_eps * 1e-3) + 1e-15 * std::abs(f);
        if (trial.error > scale) {
            h *= std::max(0.2, 0.9 * std::pow(scale / trial.error, 0.2));
            continue;
        }
        t = (s - t - h <= 0.0) ? s : t + h;
        f = trial.value;
        dist = std::abs(f - xi(t));
        ++step;
        if (t > traj.times.back()) {
            traj.times.push_back(t);
            traj.points.push_back(Complex(f));
        }
        const double grow = trial.error > 0.0 ? 0.9 * std::pow(scale / trial.error, 0.2) : 4.0;
        h *= std::min(4.0, grow);
    }
}

}  // namespace

FlowTrajectory upward_flow(Complex z0, const DrivingFunction& driver, double s, const SolverConfig& config) {
    config.validate();
    const double T = driver.horizon();
    if (!(s > 0.0 && s <= T * (1.0 + 1e-12))) throw DomainError("upward flow time s must lie in (0, T]");
    if (z0.imag() < 0.0) throw DomainError("starting point lies below the real axis");
    FlowTrajectory traj;
    if (z0.imag() == 0.0) {
        integrate_upward<double>(z0.real(), driver, std::min(s, T), config, traj);
    } else {
        integrate_upward<Complex>(z0, driver, std::min(s, T), config, traj);
    }
    return traj;
}

std::optional<double> swallow_time(double x, const DrivingFunction& driver, const SolverConfig& config) {
    config.validate();
    if (x == driver.eval(0.0)) throw DomainError("x coincides with lambda(0)");
    const detail::TailEnvelope envelope(driver, config.tau_max);
    const auto status = detail::classify(Complex(x), driver, config, config.tau_max, envelope);
    if (status.swallowed) return status.time;
    return std::nullopt;
}

SwallowStatus classify_point(Complex z0, const DrivingFunction& driver, const SolverConfig& config) {
    config.validate();
    const detail::TailEnvelope envelope(driver, config.tau_max);
    return detail::classify(z0, driver, config, config.tau_max, envelope);
}

double detail::driver_oscillation(const DrivingFunction& driver, std::size_t samples) {
    const double T = driver.horizon();
    const double lam0 = driver.eval(0.0);
    double osc = 0.0;
    for (std::size_t i = 1; i <= samples; ++i) {
        osc = std::max(osc, std::abs(driver.eval(T * static_cast<double>(i) / samples) - lam0));
    }
    return osc;
}

RealInterval locate_real_interval(const DrivingFunction& driver, const SolverConfig& config) {
    config.validate();
    const double T = driver.horizon();
    const double lam0 = driver.eval(0.0);
    const double reach = 4.04 * std::max(std::sqrt(T), 1.25 * detail::driver_oscillation(driver, 2048));
    const detail::TailEnvelope envelope(driver, config.tau_max_bisection);

    auto swallowed = [&](double x) {
        return detail::classify(Complex(x), driver, config, config.tau_max_bisection, envelope).swallowed;
    };
    auto bisect = [&](double outside, double inside) {
        while (std::abs(inside - outside) > config.interval_tol) {
            const double mid = 0.5 * (inside + outside);
            (swallowed(mid) ? inside : outside) = mid;
        }
        return 0.5 * (inside + outside);
    };
    return {bisect(lam0 - reach, lam0), bisect(lam0 + reach, lam0)};
}

}  // namespace loewner
