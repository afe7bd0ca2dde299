#include "rtl/spectral.hpp"

#include <cmath>

namespace rtl {

Eigen::VectorXcd unit_powers(double theta, int n) {
    Eigen::VectorXcd out(n);
    const Complex step = std::polar(1.0, theta);
    Complex z{1.0, 0.0};
    for (int j = 0; j < n; ++j) {
        // renormalize every 64 steps to keep the recurrence at machine accuracy
        if ((j & 63) == 0) z = std::polar(1.0, theta * j);
        out(j) = z;
        z *= step;
    }
    return out;
}

Eigen::MatrixXcd uniform_eval_matrix(int n_points, int K) {
    // Exact twiddle table: e^{ik 2pi a/n} = w^{(k a mod n)}.
    Eigen::VectorXcd table(n_points);
    for (int j = 0; j < n_points; ++j) table(j) = std::polar(1.0, kTwoPi * j / n_points);
    Eigen::MatrixXcd E(n_points, 2 * K + 1);
    for (int a = 0; a < n_points; ++a) {
        for (int k = -K; k <= K; ++k) {
            long idx = (static_cast<long>(k) * a) % n_points;
            if (idx < 0) idx += n_points;
            E(a, k + K) = table(idx);
        }
    }
    return E;
}

// ---------------------------------------------------------------------------
// TorusField

Complex TorusField::eval(double x) const {
    // Horner sum in z = e^{ix}: sum_k c_k z^k = z^{-K} * sum_j c_{j-K} z^j
    const Complex z = std::polar(1.0, x);
    Complex acc{0.0, 0.0};
    for (int j = 2 * K; j >= 0; --j) acc = acc * z + coeffs(j);
    return acc * std::polar(1.0, -static_cast<double>(K) * x);
}

Eigen::VectorXcd TorusField::eval(const Eigen::VectorXd& xs) const {
    Eigen::VectorXcd out(xs.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i) out(i) = eval(xs(i));
    return out;
}

void TorusField::symmetrize_real() {
    for (int k = 1; k <= K; ++k) {
        Complex avg = 0.5 * (c(k) + std::conj(c(-k)));
        c(k) = avg;
        c(-k) = std::conj(avg);
    }
    c(0) = Complex{c(0).real(), 0.0};
    is_real = true;
}

TorusField to_coefficients(const Eigen::VectorXcd& samples) {
    const int n = static_cast<int>(samples.size());
    if (n < 3 || n % 2 == 0)
        throw InvalidGrid("to_coefficients: sample count must be odd and >= 3, got " +
                          std::to_string(n));
    return field_from_samples(samples, (n - 1) / 2);
}

TorusField field_from_samples(const Eigen::VectorXcd& samples, int K) {
    const int n = static_cast<int>(samples.size());
    if (n < 2 * K + 1)
        throw InvalidGrid("field_from_samples: need at least 2K+1 samples");
    TorusField f(K, false);
    // u_k = (1/n) sum_j samples_j e^{-ik x_j}
    Eigen::MatrixXcd E = uniform_eval_matrix(n, K);
    f.coeffs = (E.adjoint() * samples) / static_cast<double>(n);
    return f;
}

Eigen::VectorXcd to_samples(const TorusField& f, int n_points) {
    if (n_points < f.size())
        throw InvalidGrid("to_samples: grid too coarse for cutoff");
    Eigen::MatrixXcd E = uniform_eval_matrix(n_points, f.K);
    return E * f.coeffs;
}

double sobolev_norm(const TorusField& f, double s) {
    double acc = 0.0;
    for (int k = -f.K; k <= f.K; ++k)
        acc += std::pow(1.0 + static_cast<double>(k) * k, s) * std::norm(f.c(k));
    return std::sqrt(acc);
}

double l2_norm(const TorusField& f) { return f.coeffs.norm(); }

TorusField derivative(const TorusField& f) {
    TorusField g(f.K, false);
    for (int k = -f.K; k <= f.K; ++k) g.c(k) = Complex(0.0, k) * f.c(k);
    g.is_real = f.is_real;
    return g;
}

TorusField product(const TorusField& f, const TorusField& g) {
    const int K = f.K + g.K;
    const int n = 2 * K + 1;  // alias-free for the combined bandwidth
    Eigen::VectorXcd vals = to_samples(f, n).cwiseProduct(to_samples(g, n));
    TorusField h = field_from_samples(vals, K);
    h.is_real = f.is_real && g.is_real;
    return h;
}

Truncation truncate(const TorusField& f, int K) {
    Truncation r;
    r.field = TorusField(K, f.is_real);
    double lost = 0.0;
    for (int k = -f.K; k <= f.K; ++k) {
        if (std::abs(k) <= K)
            r.field.c(k) = f.c(k);
        else
            lost += std::norm(f.c(k));
    }
    r.discarded_mass = std::sqrt(lost);
    return r;
}

// ---------------------------------------------------------------------------
// SpaceTimeField

Complex SpaceTimeField::eval(double t, double x) const {
    return slice_time(t).eval(x);
}

TorusField SpaceTimeField::slice_time(double t) const {
    TorusField f(K_x, false);
    Eigen::VectorXcd et = unit_powers(t, 2 * K_t + 1);  // e^{i t j}, j = 0..2Kt
    const Complex base = std::polar(1.0, -static_cast<double>(K_t) * t);
    Eigen::VectorXcd phases = et * base;  // e^{i l t} for l = j - K_t
    f.coeffs = coeffs * phases;
    f.is_real = is_real;
    return f;
}

void SpaceTimeField::symmetrize_real() {
    const int nk = 2 * K_x + 1, nl = 2 * K_t + 1;
    Eigen::MatrixXcd sym(nk, nl);
    for (int i = 0; i < nk; ++i)
        for (int j = 0; j < nl; ++j)
            sym(i, j) = 0.5 * (coeffs(i, j) + std::conj(coeffs(nk - 1 - i, nl - 1 - j)));
    coeffs = sym;
    is_real = true;
}

Eigen::MatrixXcd to_samples_2d(const SpaceTimeField& f, int nx, int nt) {
    if (nx < 2 * f.K_x + 1 || nt < 2 * f.K_t + 1)
        throw InvalidGrid("to_samples_2d: grid too coarse for cutoffs");
    Eigen::MatrixXcd Ex = uniform_eval_matrix(nx, f.K_x);
    Eigen::MatrixXcd Et = uniform_eval_matrix(nt, f.K_t);
    return Ex * f.coeffs * Et.transpose();
}

SpaceTimeField space_time_from_samples(const Eigen::MatrixXcd& grid, int K_x, int K_t) {
    const int nx = static_cast<int>(grid.rows());
    const int nt = static_cast<int>(grid.cols());
    if (nx < 2 * K_x + 1 || nt < 2 * K_t + 1)
        throw InvalidGrid("space_time_from_samples: grid too coarse for cutoffs");
    Eigen::MatrixXcd Ex = uniform_eval_matrix(nx, K_x);
    Eigen::MatrixXcd Et = uniform_eval_matrix(nt, K_t);
    SpaceTimeField f(K_x, K_t, false);
    f.coeffs = (Ex.adjoint() * grid * Et.conjugate()) / (static_cast<double>(nx) * nt);
    return f;
}

SpaceTimeField derivative_x(const SpaceTimeField& f) {
    SpaceTimeField g(f.K_x, f.K_t, f.is_real);
    for (int k = -f.K_x; k <= f.K_x; ++k)
        for (int l = -f.K_t; l <= f.K_t; ++l) g.c(k, l) = Complex(0.0, k) * f.c(k, l);
    return g;
}

SpaceTimeField derivative_t(const SpaceTimeField& f) {
    SpaceTimeField g(f.K_x, f.K_t, f.is_real);
    for (int k = -f.K_x; k <= f.K_x; ++k)
        for (int l = -f.K_t; l <= f.K_t; ++l) g.c(k, l) = Complex(0.0, l) * f.c(k, l);
    return g;
}

double l2_norm(const SpaceTimeField& f) { return f.coeffs.norm(); }

double sup_norm_estimate(const SpaceTimeField& f) {
    const int nx = 4 * (2 * f.K_x + 1), nt = 4 * (2 * f.K_t + 1);
    return to_samples_2d(f, nx, nt).cwiseAbs().maxCoeff();
}

SpaceTimeField product(const SpaceTimeField& f, const SpaceTimeField& g) {
    const int Kx = f.K_x + g.K_x, Kt = f.K_t + g.K_t;
    const int nx = 2 * Kx + 1, nt = 2 * Kt + 1;
    Eigen::MatrixXcd vals =
        to_samples_2d(f, nx, nt).cwiseProduct(to_samples_2d(g, nx, nt));
    SpaceTimeField h = space_time_from_samples(vals, Kx, Kt);
    h.is_real = f.is_real && g.is_real;
    return h;
}

Truncation2D truncate(const SpaceTimeField& f, int K_x, int K_t) {
    Truncation2D r;
    r.field = SpaceTimeField(K_x, K_t, f.is_real);
    double lost = 0.0;
    for (int k = -f.K_x; k <= f.K_x; ++k)
        for (int l = -f.K_t; l <= f.K_t; ++l) {
            if (std::abs(k) <= K_x && std::abs(l) <= K_t)
                r.field.c(k, l) = f.c(k, l);
            else
                lost += std::norm(f.c(k, l));
        }
    r.discarded_mass = std::sqrt(lost);
    return r;
}

// ---------------------------------------------------------------------------
// StateVector

Complex StateVector::eval(double x) const {
    const Complex z = std::polar(1.0, x);
    Complex acc{0.0, 0.0};
    for (int j = 2 * K; j >= 0; --j) acc = acc * z + coeffs(j);
    return acc * std::polar(1.0, -static_cast<double>(K) * x);
}

Eigen::VectorXcd StateVector::eval(const Eigen::VectorXd& xs) const {
    Eigen::VectorXcd out(xs.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i) out(i) = eval(xs(i));
    return out;
}

double sobolev_norm(const StateVector& u, double s) {
    double acc = 0.0;
    for (int k = -u.K; k <= u.K; ++k)
        acc += std::pow(1.0 + static_cast<double>(k) * k, s) * std::norm(u.c(k));
    return std::sqrt(acc);
}

double l2_norm(const StateVector& u) { return u.coeffs.norm(); }

double center_frequency(const StateVector& u) {
    double mass = 0.0, acc = 0.0;
    for (int k = -u.K; k <= u.K; ++k) {
        const double w = std::norm(u.c(k));
        mass += w;
        acc += std::abs(k) * w;
    }
    return mass > 0.0 ? acc / mass : 0.0;
}

}  // namespace rtl
