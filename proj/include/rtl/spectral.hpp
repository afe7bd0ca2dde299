#ifndef RTL_SPECTRAL_HPP
#define RTL_SPECTRAL_HPP

#include <Eigen/Dense>
#include <complex>

#include "rtl/errors.hpp"

// Truncated Fourier representation of functions on T and T^2.
//
// Convention shared by the whole library:
//   u(x)      = sum_k u_k e^{ikx},            u_k = (1/2pi) int u e^{-ikx} dx
//   V(t, x)   = sum_{k,l} v_{k,l} e^{i(kx+lt)}
//   <u, v>    = sum_k u_k conj(v_k)  =  (1/2pi) int u conj(v) dx
// so the L^2 norm is the plain coefficient norm and the H^s norm weighs
// mode k by (1+k^2)^{s/2}.

namespace rtl {

using Complex = std::complex<double>;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// 1D fields on the torus

struct TorusField {
    Eigen::VectorXcd coeffs;  // index k+K for k in [-K, K]
    int K = 0;
    bool is_real = false;

    TorusField() = default;
    TorusField(int cutoff, bool real_flag)
        : coeffs(Eigen::VectorXcd::Zero(2 * cutoff + 1)), K(cutoff), is_real(real_flag) {}

    int size() const { return 2 * K + 1; }

    Complex c(int k) const {
        if (k < -K || k > K) return {0.0, 0.0};
        return coeffs(k + K);
    }
    Complex& c(int k) { return coeffs(k + K); }

    // Trigonometric-polynomial evaluation at one point.
    Complex eval(double x) const;
    double eval_real(double x) const { return eval(x).real(); }
    // Batch evaluation at arbitrary (not necessarily uniform) points.
    Eigen::VectorXcd eval(const Eigen::VectorXd& xs) const;

    // Enforce coeffs[-k] = conj(coeffs[k]) exactly (averaging) and set is_real.
    void symmetrize_real();
};

// Exact trigonometric interpolant of samples on the 2K+1 uniform grid,
// K = (n-1)/2. Throws InvalidGrid unless the count is odd and >= 3.
TorusField to_coefficients(const Eigen::VectorXcd& samples);

// Interpolant at a chosen cutoff from n >= 2K+1 uniform samples.
TorusField field_from_samples(const Eigen::VectorXcd& samples, int K);

// Values on the uniform grid x_j = 2pi j / n.
Eigen::VectorXcd to_samples(const TorusField& f, int n_points);

double sobolev_norm(const TorusField& f, double s);
double l2_norm(const TorusField& f);

TorusField derivative(const TorusField& f);

// Pointwise product, exact at the combined cutoff K1+K2.
TorusField product(const TorusField& f, const TorusField& g);

struct Truncation {
    TorusField field;
    double discarded_mass = 0.0;  // l2 mass of the dropped tail
};
Truncation truncate(const TorusField& f, int K);

// ---------------------------------------------------------------------------
// 2D fields on the space-time torus

struct SpaceTimeField {
    // row index k+K_x (space), column index l+K_t (time)
    Eigen::MatrixXcd coeffs;
    int K_x = 0;
    int K_t = 0;
    bool is_real = false;

    SpaceTimeField() = default;
    SpaceTimeField(int kx, int kt, bool real_flag)
        : coeffs(Eigen::MatrixXcd::Zero(2 * kx + 1, 2 * kt + 1)),
          K_x(kx),
          K_t(kt),
          is_real(real_flag) {}

    Complex c(int k, int l) const {
        if (k < -K_x || k > K_x || l < -K_t || l > K_t) return {0.0, 0.0};
        return coeffs(k + K_x, l + K_t);
    }
    Complex& c(int k, int l) { return coeffs(k + K_x, l + K_t); }

    Complex eval(double t, double x) const;
    double eval_real(double t, double x) const { return eval(t, x).real(); }

    // x-coefficients of V(t, .) at fixed t; a valid TorusField slice.
    TorusField slice_time(double t) const;

    void symmetrize_real();
};

// grid(a, b) = V(t_b, x_a) on uniform grids of nx x nt points.
Eigen::MatrixXcd to_samples_2d(const SpaceTimeField& f, int nx, int nt);
SpaceTimeField space_time_from_samples(const Eigen::MatrixXcd& grid, int K_x, int K_t);

SpaceTimeField derivative_x(const SpaceTimeField& f);
SpaceTimeField derivative_t(const SpaceTimeField& f);
double l2_norm(const SpaceTimeField& f);
double sup_norm_estimate(const SpaceTimeField& f);  // max |V| on a 4x oversampled grid

SpaceTimeField product(const SpaceTimeField& f, const SpaceTimeField& g);

struct Truncation2D {
    SpaceTimeField field;
    double discarded_mass = 0.0;
};
Truncation2D truncate(const SpaceTimeField& f, int K_x, int K_t);

// ---------------------------------------------------------------------------
// PDE state

struct StateVector {
    Eigen::VectorXcd coeffs;  // index k+K
    int K = 0;
    double time_stamp = 0.0;

    StateVector() = default;
    StateVector(int cutoff, double t = 0.0)
        : coeffs(Eigen::VectorXcd::Zero(2 * cutoff + 1)), K(cutoff), time_stamp(t) {}

    int size() const { return 2 * K + 1; }
    Complex c(int k) const {
        if (k < -K || k > K) return {0.0, 0.0};
        return coeffs(k + K);
    }
    Complex& c(int k) { return coeffs(k + K); }

    Complex eval(double x) const;
    Eigen::VectorXcd eval(const Eigen::VectorXd& xs) const;
};

double sobolev_norm(const StateVector& u, double s);
double l2_norm(const StateVector& u);

// Mean mode index weighted by |u_k|^2; tracks where a wavepacket sits.
double center_frequency(const StateVector& u);

// ---------------------------------------------------------------------------
// Shared transform helpers (used by several modules)

// powers(j) = e^{i theta j} for j = 0..n-1, built by a renormalized recurrence.
Eigen::VectorXcd unit_powers(double theta, int n);

// E(a, k+K) = e^{i k x_a}; exact twiddles on the uniform grid x_a = 2pi a/n.
Eigen::MatrixXcd uniform_eval_matrix(int n_points, int K);

}  // namespace rtl

#endif
