#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "loewner/drivers.hpp"
#include "loewner/solver.hpp"

namespace loewner::detail {

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <class S>
struct DoublingStep {
    S value{};
    double error = 0.0;
    bool finite = true;
};

template <class S, class Rhs>
S rk4_step(const Rhs& f, double x, const S& y, double h) {
    const S k1 = f(x, y);
    const S k2 = f(x + 0.5 * h, y + (0.5 * h) * k1);
    const S k3 = f(x + 0.5 * h, y + (0.5 * h) * k2);
    const S k4 = f(x + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One full RK4 step against two half steps; the returned value carries the
/// Richardson correction.
template <class S, class Rhs>
DoublingStep<S> rk4_doubling(const Rhs& f, double x, const S& y, double h) {
    DoublingStep<S> out;
    const S full = rk4_step(f, x, y, h);
    const S half = rk4_step(f, x, y, 0.5 * h);
    const S two = rk4_step(f, x + 0.5 * h, half, 0.5 * h);
    if (!is_finite(full) || !is_finite(half) || !is_finite(two)) {
        out.finite = false;
        return out;
    }
    out.error = std::abs(two - full) / 15.0;
    out.value = two + (two - full) / 15.0;
    return out;
}

/// Backward Euler step of dW/dtau = W/2 + 2/(W - Lambda) ending at a driver
/// value lam1. The implicit equation is a quadratic in q = W - lam1; the root
/// continuing q_ref is kept.
inline double implicit_step(double lam1, double w0, double h, double q_ref) {
    const double a = 1.0 - 0.5 * h;
    const double b = a * lam1 - w0;
    const double disc = std::sqrt(b * b + 8.0 * a * h);
    const double big = -(b + std::copysign(disc, b)) / (2.0 * a);
    const double small = (-2.0 * h / a) / big;
    const double q1 = (big > 0.0) == (q_ref > 0.0) ? big : small;
    return lam1 + q1;
}

inline Complex implicit_step(double lam1, const Complex& w0, double h, const Complex& q_ref) {
    const double a = 1.0 - 0.5 * h;
    const Complex b = a * lam1 - w0;
    Complex disc = std::sqrt(b * b + 8.0 * a * h);
    if (std::real(std::conj(b) * disc) < 0.0) disc = -disc;
    const Complex big = -(b + disc) / (2.0 * a);
    const Complex small = (-2.0 * h / a) / big;
    auto score = [&](const Complex& r) { return (r.imag() < 0.0 ? 1e300 : 0.0) + std::abs(r - q_ref); };
    return lam1 + (score(big) <= score(small) ? big : small);
}

inline bool same_side(double q1, double q0) { return (q1 > 0.0) == (q0 > 0.0); }
inline bool same_side(const Complex& q1, const Complex&) { return q1.imag() >= 0.0; }

/// Backward Euler with step doubling; the value is the Richardson
/// extrapolation unless that would jump across the driver.
template <class S, class Profile>
DoublingStep<S> implicit_doubling(const Profile& profile, double tau, const S& w, double h) {
    DoublingStep<S> out;
    const double lam_mid = profile(tau + 0.5 * h);
    const double lam_end = profile(tau + h);
    const S q0 = w - profile(tau);
    const S full = implicit_step(lam_end, w, h, q0);
    const S half = implicit_step(lam_mid, w, 0.5 * h, q0);
    const S two = implicit_step(lam_end, half, 0.5 * h, half - lam_mid);
    if (!is_finite(full) || !is_finite(two)) {
        out.finite = false;
        return out;
    }
    out.error = std::abs(two - full);
    const S extrapolated = 2.0 * two - full;
    out.value = same_side(extrapolated - lam_end, two - lam_end) ? extrapolated : two;
    return out;
}

/// Upper bound for the blown-up driver tail, sup over tau' >= tau of
/// |Lambda(tau')| exp(-(tau' - tau) / 2).
class TailEnvelope {
public:
    TailEnvelope(const DrivingFunction& driver, double tau_max);

    double bound(double tau) const;
    /// |q| beyond this radius means the point never reaches the driver.
    double escape_radius(double tau) const;

private:
    DrivingFunction driver_;
    std::vector<double> sup_;
    double shell_width_ = 0.5;
    double tau_table_end_ = 0.0;
};

struct DownwardOutcome {
    bool swallowed = false;
    double time = 0.0;
    Complex final_g;
};

template <class S>
DownwardOutcome integrate_downward(S z0, const DrivingFunction& driver, const SolverConfig& config, double tau_max,
                                   const TailEnvelope& envelope, bool early_exit, FlowTrajectory* record);

SwallowStatus classify(Complex z0, const DrivingFunction& driver, const SolverConfig& config, double tau_max,
                       const TailEnvelope& envelope);

double driver_oscillation(const DrivingFunction& driver, std::size_t samples);

}  // namespace loewner::detail
