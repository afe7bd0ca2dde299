#ifndef RTL_EVOLVE_HPP
#define RTL_EVOLVE_HPP

#include <map>
#include <string>
#include <vector>

#include "rtl/normal_form.hpp"
#include "rtl/weyl.hpp"

// Time integration of d_t u = Op^w(i xi w(t,x)) u with the midpoint Cayley
// step, an independent method-of-characteristics oracle, growth-rate
// fitting, and the stability / instability experiments.
//
// The integrator accepts the coefficient as constant + field: the constant
// part m is removed exactly by the moving frame u(t,x) = v(t, x + m t)
// (coefficients pick up phases e^{ikmt}), and the Cayley step advances the
// translated generator Op^w(i xi w_var(t, x - m t)). All Sobolev norms are
// invariant under the frame change.

namespace rtl {

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;  // original-frame states at sample times
    std::map<double, std::vector<double>> norm_series;  // s -> ||u(t_i)||_s
    double l2_drift = 0.0;
    std::string scheme = "cayley-midpoint";
    double dt = 0.0;
    int K = 0;
    double m_const = 0.0;
    bool autonomous_frame = false;
};

struct IntegrateOptions {
    double dt = 0.0;        // 0: default 0.01 / (|m| + K max|w_var|)
    double sample_dt = 0.25;
    std::vector<double> s_list{0.0, 1.0};
    bool store_states = true;
};

Trajectory integrate(const SpaceTimeField& w_var, double m_const, const StateVector& u0,
                     double T, int K, const IntegrateOptions& opts = {});

// Reference solution by backward characteristics with the half-divergence
// amplitude; returns samples of u(t, .) on the uniform n_points grid.
Eigen::VectorXcd integrate_characteristics(const SpaceTimeField& w_var, double m_const,
                                           const StateVector& u0, double t, int n_points,
                                           double rtol = 1e-10);

struct GrowthFit {
    double gamma = 0.0;
    double r_squared = 1.0;
};
GrowthFit fit_growth_rate(const std::vector<double>& times,
                          const std::vector<double>& values, double t0, double t1);

struct GrowthReport {
    double s = 1.0;
    double epsilon = 0.0;
    double gamma_fit = 0.0;
    double fit_t0 = 0.0, fit_t1 = 0.0;
    double r_squared = 0.0;
    double predicted_rate = 0.0;
    double delta1 = 0.0, delta2 = 0.0;  // measured constants of the lower bound
    double beta_calibrated = 0.0;
    double virial_satisfied_fraction = 0.0;
    double escape_margin = 0.0;
    double saturation_time = 0.0;  // center frequency reaches K/3 (truncation sets in)
    std::vector<double> times;
    std::vector<double> norm_values;
    std::vector<double> virial_values;
};

struct StabilityReport {
    double epsilon = 0.0;
    int N = 1;
    double horizon = 0.0;
    double m_hat = 0.0;
    double flatness_residual = 0.0;
    std::map<double, double> sup_ratio;          // s -> sup_t ||u||_s / ||u0||_s
    std::map<double, double> reduced_sup_ratio;  // same for the reduced equation
    double reduced_drift_rate = 0.0;  // (sup ratio - 1) / horizon for max s
    std::vector<double> times;
    std::map<double, std::vector<double>> norm_series;
};

struct ExperimentOptions {
    int K = 1024;
    double dt = 0.0;
    double sample_dt = 0.25;
    double sigma = 0.01;
    int xi0 = 40;
    std::uint64_t seed = 12345;
};

StabilityReport stability_experiment(const SpaceTimeField& V, int m, double eps, int N,
                                     const std::vector<double>& s_list,
                                     double horizon_factor,
                                     const ExperimentOptions& opts = {});

GrowthReport instability_experiment(const SpaceTimeField& V, int m, double eps, double s,
                                    double T, int xi0, const ExperimentOptions& opts = {});

struct DichotomyReport {
    GrowthReport unstable;
    double gamma_stable = 0.0;
    double stable_fit_t0 = 0.0, stable_fit_t1 = 0.0;
    double ratio = 0.0;  // |gamma_stable| / gamma_unstable
    std::vector<double> stable_times;
    std::vector<double> stable_norms;
};

// Paired stable/unstable run with identical solver settings (K, dt, scheme).
DichotomyReport dichotomy_experiment(const SpaceTimeField& V_stable,
                                     const SpaceTimeField& V_unstable, int m, double eps,
                                     double s, double T, const ExperimentOptions& opts = {},
                                     int jobs = 1);

}  // namespace rtl

#endif
