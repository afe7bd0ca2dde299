#include "rtl/ode.hpp"

#include <algorithm>
#include <cmath>

namespace rtl {
namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
    const OdeRhs& f;
    Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, ytmp;

    explicit Stepper(const OdeRhs& rhs, Eigen::Index n) : f(rhs) {
        k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n);
        k5.resize(n); k6.resize(n); k7.resize(n); ytmp.resize(n);
    }

    // One trial step; returns scaled error estimate (error ~ <=1 accepted).
    double attempt(double t, const Eigen::VectorXd& y, double h, Eigen::VectorXd& out,
                   double rtol, double atol) {
        f(t, y, k1);
        ytmp = y + h * (a21 * k1);
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        out = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, out, k7);
        Eigen::VectorXd err =
            h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double m = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double sc = atol + rtol * std::max(std::abs(y(i)), std::abs(out(i)));
            m = std::max(m, std::abs(err(i)) / sc);
        }
        return m;
    }
};

double next_step(double h, double err) {
    const double safety = 0.9, min_scale = 0.2, max_scale = 5.0;
    double scale = err > 0.0 ? safety * std::pow(err, -0.2) : max_scale;
    return h * std::clamp(scale, min_scale, max_scale);
}

}  // namespace

Eigen::VectorXd ode_solve(const OdeRhs& f, Eigen::VectorXd y0, double t0, double t1,
                          const OdeOptions& opts) {
    if (t0 == t1) return y0;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    Stepper st(f, y0.size());
    double t = t0;
    double h = std::min(opts.initial_step, std::abs(t1 - t0));
    Eigen::VectorXd y = std::move(y0), ynew(y.size());
    for (long n = 0; n < opts.max_steps; ++n) {
        h = std::min(h, std::abs(t1 - t));
        double err = st.attempt(t, y, dir * h, ynew, opts.rtol, opts.atol);
        if (err <= 1.0) {
            t += dir * h;
            y.swap(ynew);
            if (std::abs(t1 - t) <= 1e-14 * (1.0 + std::abs(t1))) return y;
        }
        h = std::min(next_step(h, err), opts.max_step);
        if (h < 1e-14 * (1.0 + std::abs(t)))
            throw IntegrationFailure("ode_solve: step size collapse at t=" +
                                     std::to_string(t));
    }
    throw IntegrationFailure("ode_solve: max step count exceeded");
}

EventResult ode_solve_until(const OdeRhs& f, Eigen::VectorXd y0, double t0, double dir,
                            const std::function<double(const Eigen::VectorXd&)>& g,
                            double t_max, const OdeOptions& opts) {
    Stepper st(f, y0.size());
    const double g0 = g(y0);
    EventResult res;
    if (g0 == 0.0) {
        res.triggered = true;
        res.t = t0;
        res.y = std::move(y0);
        return res;
    }
    double t = t0;
    double h = opts.initial_step;
    Eigen::VectorXd y = std::move(y0), ynew(y.size());
    for (long n = 0; n < opts.max_steps; ++n) {
        double remain = t_max - std::abs(t - t0);
        if (remain <= 0.0) break;
        h = std::min(h, remain);
        double err = st.attempt(t, y, dir * h, ynew, opts.rtol, opts.atol);
        if (err <= 1.0) {
            double gn = g(ynew);
            if (gn == 0.0 || (gn > 0.0) != (g0 > 0.0)) {
                // bisect inside [t, t + dir*h] by re-stepping from (t, y)
                double lo = 0.0, hi = h;
                Eigen::VectorXd ymid(y.size());
                for (int it = 0; it < 80 && (hi - lo) > 1e-13 * (1.0 + hi); ++it) {
                    double mid = 0.5 * (lo + hi);
                    st.attempt(t, y, dir * mid, ymid, opts.rtol, opts.atol);
                    double gm = g(ymid);
                    if (gm == 0.0 || (gm > 0.0) != (g0 > 0.0))
                        hi = mid;
                    else
                        lo = mid;
                }
                st.attempt(t, y, dir * hi, ymid, opts.rtol, opts.atol);
                res.triggered = true;
                res.t = t + dir * hi;
                res.y = std::move(ymid);
                return res;
            }
            t += dir * h;
            y.swap(ynew);
        }
        h = std::min(next_step(h, err), opts.max_step);
        if (h < 1e-14 * (1.0 + std::abs(t)))
            throw IntegrationFailure("ode_solve_until: step size collapse");
    }
    res.triggered = false;
    res.t = t;
    res.y = std::move(y);
    return res;
}

}  // namespace rtl
