#ifndef RTL_CLASSICAL_DYNAMICS_HPP
#define RTL_CLASSICAL_DYNAMICS_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "rtl/ode.hpp"
#include "rtl/resonance.hpp"
#include "rtl/spectral.hpp"

// Flows of xdot = X(x) on the torus and of the Hamiltonian lift
// (xdot, xidot) = (X, -xi X') on T*T; the attractor-repellor structure of a
// hyperbolic field; construction and grid verification of a degree-one
// homogeneous escape function a(x, xi) = |xi| atilde(x).

namespace rtl {

struct CotangentPoint {
    double x = 0.0;
    double xi = 0.0;
};

struct Interval {
    double lo = 0.0, hi = 0.0;  // subset of [0, 2pi), lo <= hi after normalization
};

struct IntervalUnion {
    std::vector<Interval> parts;  // may wrap; each part stored unwrapped mod 2pi
    bool contains(double x) const;
    double total_length() const;
};

struct FlowStructure {
    std::vector<ZeroRecord> K_plus;   // X = 0, X' < 0 (attracting for xdot = X)
    std::vector<ZeroRecord> K_minus;  // X = 0, X' > 0
    double nu = 0.0;                  // min |slope|
    IntervalUnion U_plus;             // neighborhoods where |X' - X'(x_i)| <= nu/4
    IntervalUnion U_minus;
    std::vector<double> radius_plus;   // per K_plus zero
    std::vector<double> radius_minus;  // per K_minus zero
};

double flow_torus(const TorusField& X, double x0, double t, double rtol = 1e-10);

CotangentPoint flow_cotangent(const TorusField& X, const CotangentPoint& z0, double t,
                              double rtol = 1e-10);

// Throws NoHyperbolicStructure (no zeros) or DegenerateVectorField.
FlowStructure analyze_flow(const TorusField& X, std::uint64_t seed = 2024,
                           double t_converge = 0.0 /* 0 -> 100/nu */);

constexpr double kTransitInfinite = std::numeric_limits<double>::infinity();

// Signed time t with backward flow from x on the boundary of U_minus;
// +inf on K_plus, -inf on K_minus (flagged infinities). Values are exact
// (event-detected), not clipped; clipping happens where the gluing uses them.
double transit_time(const FlowStructure& fs, const TorusField& X, double x,
                    double rtol = 1e-10);

struct EscapeFunction {
    TorusField atilde;        // spectral profile; a(x, xi) = |xi| atilde(x)
    double sigma = 0.0;
    double delta_verified = 0.0;  // min over grid of X atilde' - X' atilde
    double nu = 0.0;
    IntervalUnion W_region;   // where atilde <= -1/2
    FlowStructure flow;

    // construction intermediates, sampled on the build grid
    Eigen::VectorXd grid_x;
    Eigen::VectorXd k_profile;
    Eigen::VectorXd m_profile;
    Eigen::VectorXd ell_plus;
    Eigen::VectorXd ell_minus;
    Eigen::VectorXd eta;
    Eigen::VectorXd t_tilde;  // +-inf flags at the zeros

    double ell_difference_bound = 0.0;  // estimated C = max |ell+ - ell-|
    double eta_derivative_bound = 0.0;  // max |phi'(t_tilde)| = max |X eta'|

    // Exact on-demand evaluation of the glued profile (flag-aware at zeros)
    // and of its construction ingredients.
    std::function<double(double)> profile_at;
    std::function<double(double)> ell_plus_at;
    std::function<double(double)> ell_minus_at;
    std::function<double(double)> m_tilde_at;
};

struct EscapeOptions {
    int grid_size = 4096;
    int profile_cutoff = 512;
    double t_clip_factor = 50.0;  // T_max = factor / nu
    double ode_rtol = 1e-10;
};

// Prop-escape pipeline: local bump, positive bracket extension, stabilized
// ell+- integrals, gluing through eta_sigma = phi_{sigma/10} o t_tilde.
EscapeFunction build_escape(const TorusField& X, double sigma,
                            const EscapeOptions& opts = {});

struct EscapeVerification {
    double delta = 0.0;
    IntervalUnion W_region;
    Eigen::VectorXd grid_x;
    Eigen::VectorXd bracket;  // g(x) = X atilde' - X' atilde
    Eigen::VectorXd atilde_values;
};

EscapeVerification verify_escape(const TorusField& atilde, const TorusField& X,
                                 int grid_size = 4096);

// The corner-smoothed ramp of the gluing lemma: 0 below -s, slope s in the
// middle, 1 above 1/s + s, with |phi'| <= 10 s; C^2 quintic corner blends.
double phi_sigma(double s, double tau);
double phi_sigma_derivative(double s, double tau);

}  // namespace rtl

#endif
