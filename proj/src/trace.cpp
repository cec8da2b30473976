#include <algorithm>
#include <cmath>

#include "loewner/errors.hpp"
#include "loewner/solver.hpp"

namespace loewner {

namespace {

// Square root of a = (w - c)^2 + shift with nonnegative imaginary part. On the
// real axis the sign follows Re(w - c) so the map stays continuous from above.
inline void half_plane_root(double p, double q, double shift, double& re, double& im) {
    const double x = p * p - q * q + shift;
    const double y = 2.0 * p * q;
    const double r = std::sqrt(x * x + y * y);
    const double big = std::sqrt(0.5 * (std::abs(x) + r));
    const double small = big > 0.0 ? std::abs(y) / (2.0 * big) : 0.0;
    const double mag_re = x >= 0.0 ? big : small;
    im = x >= 0.0 ? small : big;
    re = std::copysign(mag_re, p);
}

struct Step {
    double c;
    double four_dt;
};

void split_step(const DrivingFunction& driver, double t0, double t1, double lam0, double lam1, double threshold,
                int depth, std::vector<double>& times) {
    if (threshold > 0.0 && depth > 0 && std::abs(lam1 - lam0) / std::sqrt(t1 - t0) > threshold) {
        const double tm = 0.5 * (t0 + t1);
        const double lm = driver.eval(tm);
        split_step(driver, t0, tm, lam0, lm, threshold, depth - 1, times);
        split_step(driver, tm, t1, lm, lam1, threshold, depth - 1, times);
        return;
    }
    times.push_back(t1);
}

constexpr std::size_t lanes = 8;

}  // namespace

Complex elementary_inverse_slit(Complex w, double c, double dt) {
    double re = 0.0;
    double im = 0.0;
    half_plane_root(w.real() - c, w.imag(), -4.0 * dt, re, im);
    return {c + re, im};
}

Complex elementary_slit(Complex z, double c, double dt) {
    double re = 0.0;
    double im = 0.0;
    half_plane_root(z.real() - c, z.imag(), 4.0 * dt, re, im);
    return {c + re, im};
}

TracePath compute_trace(const DrivingFunction& driver, const SolverConfig& config) {
    config.validate();
    const double T = driver.horizon();
    const std::size_t n = config.n_steps;

    std::vector<double> times{0.0};
    times.reserve(n + 1);
    double lam_prev = driver.eval(0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double t0 = T * static_cast<double>(i - 1) / n;
        const double t1 = i == n ? T : T * static_cast<double>(i) / n;
        const double lam1 = driver.eval(t1);
        split_step(driver, t0, t1, lam_prev, lam1, config.refine_threshold, config.refine_max_depth, times);
        lam_prev = lam1;
    }
    const std::size_t m = times.size() - 1;

    // steps[k - 1] is the map F_k on [t_{k-1}, t_k].
    std::vector<Step> steps(m);
    std::vector<double> lam(m + 1);
    lam[0] = driver.eval(0.0);
    for (std::size_t k = 1; k <= m; ++k) {
        const double dt = times[k] - times[k - 1];
        steps[k - 1] = {driver.eval(times[k - 1] + 0.5 * dt), 4.0 * dt};
        lam[k] = driver.eval(times[k]);
    }

    std::vector<std::size_t> wanted;
    const auto tail_start = static_cast<std::size_t>(std::floor((1.0 - config.dense_tail) * static_cast<double>(m)));
    for (std::size_t k = 0; k <= m; ++k) {
        if (k % config.sample_stride == 0 || k >= tail_start || k == m) wanted.push_back(k);
    }

    TracePath out;
    out.refine_threshold = config.refine_threshold;
    out.composed_steps = m;
    out.times.resize(wanted.size());
    out.points.resize(wanted.size());

    auto check = [](double re, double im, std::size_t step) {
        if (!std::isfinite(re) || !std::isfinite(im)) {
            throw IntegrationError("non-finite value while composing slit maps", step);
        }
    };

    // Tips are independent compositions; groups of eight run interleaved over
    // their shared maps so the square roots pipeline.
    for (std::size_t g = 0; g < wanted.size(); g += lanes) {
        const std::size_t count = std::min(lanes, wanted.size() - g);
        double px[lanes];
        double py[lanes];
        std::size_t shared = wanted[g];
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t kn = wanted[g + j];
            px[j] = lam[kn];
            py[j] = 0.0;
            for (std::size_t k = kn; k > shared; --k) {
                double re = 0.0;
                double im = 0.0;
                half_plane_root(px[j] - steps[k - 1].c, py[j], -steps[k - 1].four_dt, re, im);
                px[j] = steps[k - 1].c + re;
                py[j] = im;
            }
        }
        for (std::size_t j = count; j < lanes; ++j) {
            px[j] = px[0];
            py[j] = py[0];
        }
        for (std::size_t k = shared; k > 0; --k) {
            const double c = steps[k - 1].c;
            const double shift = -steps[k - 1].four_dt;
            for (std::size_t j = 0; j < lanes; ++j) {
                double re = 0.0;
                double im = 0.0;
                half_plane_root(px[j] - c, py[j], shift, re, im);
                px[j] = c + re;
                py[j] = im;
            }
        }
        for (std::size_t j = 0; j < count; ++j) {
            check(px[j], py[j], wanted[g + j]);
            out.times[g + j] = times[wanted[g + j]];
            out.points[g + j] = {px[j], py[j]};
        }
    }
    return out;
}

}  // namespace loewner
