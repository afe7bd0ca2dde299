#include "rtl/weyl.hpp"

#include <cmath>

namespace rtl {
namespace {

double smoothstep5(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }

}  // namespace

double chi_cutoff(double xi) {
    const double a = std::abs(xi);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    return 1.0 - smoothstep5((a - 0.5) / 0.5);
}

Complex radial_value(const SymbolTerm& term, double midpoint) {
    switch (term.kind) {
        case RadialKind::Constant:
            return term.coeff;
        case RadialKind::Linear:
            return term.coeff * midpoint;
        case RadialKind::AbsCut:
        case RadialKind::ProfileAbsCut:
            return term.coeff * std::abs(midpoint) * (1.0 - chi_cutoff(midpoint));
    }
    return {0.0, 0.0};
}

SymbolRep SymbolRep::scaled(Complex factor) const {
    SymbolRep out = *this;
    for (auto& t : out.terms) t.coeff *= factor;
    out.is_real = false;  // caller re-asserts if the factor preserves realness
    return out;
}

WeylMatrix weyl_matrix(const SymbolRep& a, int K) {
    WeylMatrix M;
    M.K = K;
    M.entries = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
    for (const auto& term : a.terms) {
        for (int j = -K; j <= K; ++j) {
            const int k = j + term.n;
            if (k < -K || k > K) continue;
            M.entries(k + K, j + K) += radial_value(term, 0.5 * (k + j));
        }
    }
    return M;
}

WeylMatrix weyl_transport_generator(const TorusField& w, int K) {
    // Op^w(i xi w): entries i (k+j)/2 w_{k-j}
    WeylMatrix M;
    M.K = K;
    M.provenance = "i*xi*w";
    M.entries = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
    for (int n = -w.K; n <= w.K; ++n) {
        const Complex wn = w.c(n);
        if (wn == Complex{0.0, 0.0}) continue;
        for (int j = -K; j <= K; ++j) {
            const int k = j + n;
            if (k < -K || k > K) continue;
            M.entries(k + K, j + K) += Complex(0.0, 0.5 * (k + j)) * wn;
        }
    }
    return M;
}

Complex quadratic_form(const WeylMatrix& M, const StateVector& u) {
    if (u.size() != M.entries.rows())
        throw DimensionError("quadratic_form: truncation mismatch");
    return u.coeffs.dot(M.entries * u.coeffs);  // sum (Mu)_k conj(u_k)
}

SymbolRep poisson_bracket_affine(const SymbolRep& f, const SymbolRep& g) {
    for (const auto& t : f.terms)
        if (t.kind != RadialKind::Constant && t.kind != RadialKind::Linear)
            throw Error("poisson_bracket_affine: symbol not affine in xi");
    for (const auto& t : g.terms)
        if (t.kind != RadialKind::Constant && t.kind != RadialKind::Linear)
            throw Error("poisson_bracket_affine: symbol not affine in xi");

    // {f, g} = f_xi g_x - f_x g_xi stays affine for affine f, g
    SymbolRep out;
    auto add_term = [&out](int n, RadialKind kind, Complex c) {
        if (c == Complex{0.0, 0.0}) return;
        for (auto& t : out.terms)
            if (t.n == n && t.kind == kind) {
                t.coeff += c;
                return;
            }
        out.terms.push_back({n, kind, c});
    };
    for (const auto& tf : f.terms) {
        for (const auto& tg : g.terms) {
            const int n = tf.n + tg.n;
            // f_xi g_x: only Linear f terms contribute, dropping to Constant
            if (tf.kind == RadialKind::Linear) {
                const Complex c = tf.coeff * tg.coeff * Complex(0.0, tg.n);
                add_term(n, tg.kind, c);
            }
            // - f_x g_xi
            if (tg.kind == RadialKind::Linear) {
                const Complex c = -tf.coeff * Complex(0.0, tf.n) * tg.coeff;
                add_term(n, tf.kind, c);
            }
        }
    }
    return out;
}

CommutatorReport commutator_check(const SymbolRep& f, const SymbolRep& g, int K) {
    const WeylMatrix A = weyl_matrix(f, K);
    const WeylMatrix B = weyl_matrix(g, K);
    Eigen::MatrixXcd comm =
        Complex(0.0, 1.0) * (A.entries * B.entries - B.entries * A.entries);
    const WeylMatrix P = weyl_matrix(poisson_bracket_affine(f, g), K);
    CommutatorReport rep;
    rep.block_halfwidth = K / 2;
    const int lo = K - rep.block_halfwidth, hi = K + rep.block_halfwidth;
    rep.max_discrepancy =
        (comm.block(lo, lo, hi - lo + 1, hi - lo + 1) -
         P.entries.block(lo, lo, hi - lo + 1, hi - lo + 1))
            .cwiseAbs()
            .maxCoeff();
    return rep;
}

std::pair<SymbolRep, WeylMatrix> build_atilde_profile(const TorusField& profile, int K) {
    SymbolRep sym;
    sym.is_real = profile.is_real;
    for (int n = -profile.K; n <= profile.K; ++n) {
        const Complex c = profile.c(n);
        if (std::abs(c) < 1e-16) continue;
        sym.terms.push_back({n, RadialKind::ProfileAbsCut, c});
    }
    return {sym, weyl_matrix(sym, K)};
}

std::pair<SymbolRep, WeylMatrix> build_atilde(const EscapeFunction& E, int K) {
    if (!(E.delta_verified > 0.0))
        throw EscapeConstructionFailed("build_atilde: escape function not verified", 0.0);
    return build_atilde_profile(E.atilde, K);
}

StateVector build_initial_datum(const IntervalUnion& W_region, int xi0, int K) {
    if (W_region.parts.empty())
        throw RegionTooSmall("build_initial_datum: empty W region");
    double wbest = -1.0;
    Interval seat{};
    for (const auto& p : W_region.parts)
        if (p.hi - p.lo > wbest) {
            wbest = p.hi - p.lo;
            seat = p;
        }
    if (wbest < 0.1)
        throw RegionTooSmall("build_initial_datum: widest W component narrower than 0.1");
    const double center = 0.5 * (seat.lo + seat.hi);
    const double support = 0.96 * wbest;  // strictly inside W
    const double core = 0.25 * support;   // flat core = middle half of the support
    const double edge = 0.5 * support;
    // effective bandwidth of the taper; the packet must fit under the cutoff
    const int bandwidth = static_cast<int>(std::ceil(32.0 * M_PI / support));
    if (xi0 + bandwidth > K)
        throw RegionTooSmall("build_initial_datum: xi0 + bump bandwidth exceeds K");

    auto chi3 = [&](double x) -> double {
        double d = std::abs(x - center);
        d = std::min(d, kTwoPi - d);
        if (d <= core) return 1.0;
        if (d >= edge) return 0.0;
        return 0.5 * (1.0 + std::cos(M_PI * (d - core) / (edge - core)));
    };

    const int n = 2 * K + 1;
    Eigen::VectorXcd samples(n);
    for (int j = 0; j < n; ++j) {
        const double x = kTwoPi * j / n;
        samples(j) = chi3(x) * std::polar(1.0, xi0 * x);
    }
    StateVector u(K, 0.0);
    u.coeffs = to_coefficients(samples).coeffs;
    u.coeffs /= u.coeffs.norm();
    return u;
}

}  // namespace rtl
