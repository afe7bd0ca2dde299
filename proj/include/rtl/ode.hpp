#ifndef RTL_ODE_HPP
#define RTL_ODE_HPP

#include <Eigen/Dense>
#include <functional>

#include "rtl/errors.hpp"

// Small adaptive Runge-Kutta driver (Dormand-Prince 5(4)) for the low
// dimensional flows of the classical dynamics and the characteristics
// oracle. Step size is controlled by the embedded error estimate against
// rtol/atol; IntegrationFailure is thrown on step-size collapse.

namespace rtl {

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 1e-3;
    double max_step = 1.0;
    long max_steps = 2000000;
};

// Integrate from t0 to t1 (either direction); returns y(t1).
Eigen::VectorXd ode_solve(const OdeRhs& f, Eigen::VectorXd y0, double t0, double t1,
                          const OdeOptions& opts = {});

struct EventResult {
    bool triggered = false;
    double t = 0.0;        // event (or final) time
    Eigen::VectorXd y;     // state there
};

// Integrate forward in tau = (t - t0)*dir, dir = +1/-1, until the scalar
// event function g(y) changes sign (g(y0) defines the reference sign) or
// |t - t0| reaches t_max. The crossing is refined by bisection on the step.
EventResult ode_solve_until(const OdeRhs& f, Eigen::VectorXd y0, double t0, double dir,
                            const std::function<double(const Eigen::VectorXd&)>& g,
                            double t_max, const OdeOptions& opts = {});

}  // namespace rtl

#endif
