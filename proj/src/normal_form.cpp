#include "rtl/normal_form.hpp"

#include <cmath>

namespace rtl {
namespace {

double field_min_one_plus_dx(const SpaceTimeField& beta) {
    const SpaceTimeField bx = derivative_x(beta);
    const int nx = 4 * (2 * beta.K_x + 1), nt = std::max(4 * (2 * beta.K_t + 1), 1);
    Eigen::MatrixXcd vals = to_samples_2d(bx, std::max(nx, 8), std::max(nt, 1));
    return 1.0 + vals.real().minCoeff();
}

// Damped Newton for z + beta(t, y+z) = 0 at one node; g' = 1 + beta_x >= margin.
double invert_node(const TorusField& b, const TorusField& bx, double y,
                   const FixedPointOptions& opts) {
    double z = -b.eval_real(y);  // first-order guess
    double g = z + b.eval_real(y + z);
    for (int it = 0; it < opts.max_iter; ++it) {
        if (std::abs(g) <= opts.tol) return z;
        const double gp = 1.0 + bx.eval_real(y + z);
        double step = -g / gp;
        double znew = z + step;
        double gnew = znew + b.eval_real(y + znew);
        int backtrack = 0;
        while (std::abs(gnew) > 0.9 * std::abs(g) && backtrack < 40) {
            step *= 0.5;
            znew = z + step;
            gnew = znew + b.eval_real(y + znew);
            ++backtrack;
        }
        z = znew;
        g = gnew;
    }
    if (std::abs(g) > 1e3 * opts.tol)
        throw ConvergenceFailure("invert_diffeo: fixed point did not converge");
    return z;
}

}  // namespace

SpaceTimeField solve_homological(const SpaceTimeField& W, int m) {
    if (m < 1) throw InvalidFrequency("solve_homological: m must be >= 1");
    SpaceTimeField beta(W.K_x, W.K_t, W.is_real);
    for (int k = -W.K_x; k <= W.K_x; ++k)
        for (int l = -W.K_t; l <= W.K_t; ++l) {
            const long denom = static_cast<long>(l) - static_cast<long>(k) * m;
            if (denom != 0)
                beta.c(k, l) = W.c(k, l) / Complex(0.0, static_cast<double>(denom));
        }
    return beta;
}

SpaceTimeField invert_diffeo(const SpaceTimeField& beta, const FixedPointOptions& opts) {
    const double margin = field_min_one_plus_dx(beta);
    if (margin <= 0.0)
        throw DiffeoNotInvertible("invert_diffeo: min(1 + beta_x) = " +
                                  std::to_string(margin));

    // The inverse displacement is analytic but has a wider spectrum than
    // beta; grow the output cutoff until the composition identity holds on
    // an offset verification grid.
    int Kx_out = 2 * beta.K_x + 8;
    int Kt_out = beta.K_t == 0 ? 0 : 2 * beta.K_t + 8;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const int nx = 2 * (2 * Kx_out + 1);
        const int nt = Kt_out == 0 ? 1 : 2 * (2 * Kt_out + 1);
        Eigen::MatrixXcd grid(nx, nt);
        for (int b = 0; b < nt; ++b) {
            const double t = kTwoPi * b / nt;
            const TorusField bs = beta.slice_time(t);
            const TorusField bxs = derivative(bs);
            for (int a = 0; a < nx; ++a) {
                const double y = kTwoPi * a / nx;
                grid(a, b) = Complex{invert_node(bs, bxs, y, opts), 0.0};
            }
        }
        SpaceTimeField bt = space_time_from_samples(grid, Kx_out, Kt_out);
        if (beta.is_real) bt.symmetrize_real();

        double worst = 0.0;
        const int nv = 2 * Kx_out + 7;
        const int ntv = std::max(2 * beta.K_t + 3, 3);
        for (int b = 0; b < ntv && worst < 1e-11; ++b) {
            const double t = kTwoPi * (b + 0.37) / ntv;
            const TorusField bs = beta.slice_time(t);
            const TorusField bts = bt.slice_time(t);
            for (int a = 0; a < nv; ++a) {
                const double y = kTwoPi * (a + 0.5) / nv;
                const double z = bts.eval_real(y);
                worst = std::max(worst, std::abs(z + bs.eval_real(y + z)));
            }
        }
        if (worst < 1e-11 || Kx_out >= 4096) return bt;
        Kx_out = 2 * Kx_out;
        if (Kt_out > 0) Kt_out = Kt_out + beta.K_t + 4;
    }
    throw ConvergenceFailure("invert_diffeo: inverse displacement did not spectrally converge");
}

DiffeoTransform make_transform(const SpaceTimeField& beta, const FixedPointOptions& opts) {
    DiffeoTransform T;
    T.beta = beta;
    T.invertibility_margin = field_min_one_plus_dx(beta);
    if (T.invertibility_margin <= opts.margin_threshold)
        throw DiffeoNotInvertible("make_transform: invertibility margin " +
                                  std::to_string(T.invertibility_margin) +
                                  " below threshold");
    T.beta_tilde = invert_diffeo(beta, opts);

    // verify y + bt(y) + beta(y + bt(y)) = y on an offset grid
    const int nv = 3 * (2 * T.beta_tilde.K_x + 1) + 1;
    const int ntv = std::max(2 * beta.K_t + 3, 3);
    double worst = 0.0;
    for (int b = 0; b < ntv; ++b) {
        const double t = kTwoPi * (b + 0.37) / ntv;
        const TorusField bs = beta.slice_time(t);
        const TorusField bts = T.beta_tilde.slice_time(t);
        for (int a = 0; a < nv; ++a) {
            const double y = kTwoPi * (a + 0.5) / nv;
            const double z = bts.eval_real(y);
            worst = std::max(worst, std::abs(z + bs.eval_real(y + z)));
        }
    }
    T.composition_residual = worst;
    return T;
}

StateVector apply_transform(const DiffeoTransform& T, double t, const StateVector& u,
                            Direction dir) {
    const SpaceTimeField& disp = (dir == Direction::Forward) ? T.beta : T.beta_tilde;
    const TorusField b = disp.slice_time(t);
    const TorusField bx = derivative(b);
    const int ng = 2 * (2 * u.K + 1);
    StateVector out(u.K, u.time_stamp);
    Eigen::VectorXcd vals(ng);
    for (int a = 0; a < ng; ++a) {
        const double x = kTwoPi * a / ng;
        const double jac = 1.0 + bx.eval_real(x);
        if (jac <= 0.0)
            throw DiffeoNotInvertible("apply_transform: jacobian non-positive on grid");
        vals(a) = std::sqrt(jac) * u.eval(x + b.eval_real(x));
    }
    out.coeffs = field_from_samples(vals, u.K).coeffs;
    return out;
}

SpaceTimeField pushforward_coefficient(const SpaceTimeField& w, const DiffeoTransform& T) {
    const SpaceTimeField dtb = derivative_t(T.beta);
    const int Kt_max = std::max(w.K_t, std::max(T.beta.K_t, T.beta_tilde.K_t));
    const int nx = 2 * (2 * w.K_x + 1);
    const int nt = std::max(2 * (2 * Kt_max + 1), 1);

    Eigen::MatrixXcd grid(nx, nt);
    TorusField one(0, true);
    one.c(0) = Complex{1.0, 0.0};
    for (int b = 0; b < nt; ++b) {
        const double t = kTwoPi * b / nt;
        const TorusField ws = w.slice_time(t);
        const TorusField bs = T.beta.slice_time(t);
        const TorusField bxs = derivative(bs);
        const TorusField bts = dtb.slice_time(t);
        const TorusField btildes = T.beta_tilde.slice_time(t);
        TorusField jac = bxs;
        jac.c(0) += Complex{1.0, 0.0};
        const TorusField bracket = product(ws, jac);  // exact at combined cutoff
        for (int a = 0; a < nx; ++a) {
            const double x = kTwoPi * a / nx;
            const double y = x + btildes.eval_real(x);  // phi^{-1}(x)
            grid(a, b) = bracket.eval(y) - bts.eval(y);
        }
    }
    SpaceTimeField out = space_time_from_samples(grid, w.K_x, w.K_t);
    if (w.is_real && T.beta.is_real) out.symmetrize_real();
    return out;
}

NormalFormChain normal_form_reduce(const SpaceTimeField& V, int m, double eps, int N,
                                   const FixedPointOptions& opts) {
    if (N < 1) throw InvalidFrequency("normal_form_reduce: N must be >= 1");
    if (m < 1) throw InvalidFrequency("normal_form_reduce: m must be >= 1");
    if (eps <= 0.0) throw InvalidFrequency("normal_form_reduce: eps must be positive");

    NormalFormChain chain;
    chain.m = m;
    chain.epsilon = eps;
    chain.resonant_avg = resonant_average(V, m);

    // working container: time cutoff large enough for the resonant lift and
    // the final frame translation
    const int Kx = V.K_x;
    const int Kt = std::max(V.K_t, m * V.K_x);
    SpaceTimeField w(Kx, Kt, true);
    for (int k = -V.K_x; k <= V.K_x; ++k)
        for (int l = -V.K_t; l <= V.K_t; ++l) w.c(k, l) = eps * V.c(k, l);
    w.c(0, 0) += Complex{static_cast<double>(m), 0.0};

    for (int n = 1; n <= N; ++n) {
        SpaceTimeField r = w;
        r.c(0, 0) -= Complex{static_cast<double>(m), 0.0};
        SpaceTimeField beta = solve_homological(r, m);
        if (l2_norm(beta) < 1e-14) {
            DiffeoTransform id;
            id.beta = SpaceTimeField(Kx, Kt, true);
            id.beta_tilde = SpaceTimeField(Kx, Kt, true);
            id.invertibility_margin = 1.0;
            chain.steps.push_back(std::move(id));
            chain.coefficient_history.push_back(w);
            continue;
        }
        try {
            DiffeoTransform T = make_transform(beta, opts);
            w = pushforward_coefficient(w, T);
            chain.steps.push_back(std::move(T));
        } catch (const DiffeoNotInvertible& e) {
            throw NormalFormFailed(std::string("normal_form_reduce: step ") +
                                       std::to_string(n) + ": " + e.what(),
                                   n);
        }
        chain.coefficient_history.push_back(w);
    }

    // moving frame x -> x - mt: v-coefficients g_{k,l} = r_{k, l+km}
    SpaceTimeField r = w;
    r.c(0, 0) -= Complex{static_cast<double>(m), 0.0};
    SpaceTimeField wv(Kx, Kt, true);
    for (int k = -Kx; k <= Kx; ++k)
        for (int l = -Kt; l <= Kt; ++l) {
            const long src = static_cast<long>(l) + static_cast<long>(k) * m;
            if (std::abs(src) <= Kt) wv.c(k, l) = r.c(k, static_cast<int>(src));
        }

    // decompose eps <V>_m + eps^2 Z + remainder
    chain.Z = TorusField(Kx, true);
    for (int k = -Kx; k <= Kx; ++k)
        chain.Z.c(k) = (wv.c(k, 0) - eps * chain.resonant_avg.c(k)) / (eps * eps);
    SpaceTimeField rem = wv;
    for (int k = -Kx; k <= Kx; ++k) rem.c(k, 0) = Complex{0.0, 0.0};
    chain.remainder_norm = l2_norm(rem);
    const double scale = std::pow(eps, N + 1);
    chain.W_rem = rem;
    chain.W_rem.coeffs /= scale;
    return chain;
}

StateVector apply_chain(const NormalFormChain& chain, double t, const StateVector& u,
                        Direction dir) {
    StateVector cur = u;
    auto phases = [&](double sign) {
        Eigen::VectorXcd ph = unit_powers(sign * chain.m * t, 2 * cur.K + 1);
        const Complex base = std::polar(1.0, -sign * chain.m * t * cur.K);
        cur.coeffs = cur.coeffs.cwiseProduct(ph * base);  // e^{i k sign m t}
    };
    if (dir == Direction::Forward) {
        if (chain.translation_applied) phases(+1.0);
        for (auto it = chain.steps.rbegin(); it != chain.steps.rend(); ++it) {
            if (l2_norm(it->beta) < 1e-14) continue;
            cur = apply_transform(*it, t, cur, Direction::Forward);
        }
    } else {
        for (const auto& step : chain.steps) {
            if (l2_norm(step.beta) < 1e-14) continue;
            cur = apply_transform(step, t, cur, Direction::Inverse);
        }
        if (chain.translation_applied) phases(-1.0);
    }
    return cur;
}

ConstantCoefficientReduction constant_coefficient_reduce(const TorusField& X_eff,
                                                         double stable_margin) {
    const int n = std::max(1024, 16 * (2 * X_eff.K + 1));
    Eigen::VectorXd vals = to_samples(X_eff, n).real();
    if (vals.cwiseAbs().minCoeff() <= stable_margin)
        throw NotResonantlyStable("constant_coefficient_reduce: X_eff vanishes on the grid");

    ConstantCoefficientReduction red;
    // m_hat = 2pi (int dx/X)^{-1}; uniform trapezoid is exact here
    double inv_sum = 0.0;
    for (int j = 0; j < n; ++j) inv_sum += 1.0 / vals(j);
    red.m_hat = static_cast<double>(n) / inv_sum;

    const int Kl = std::max(4 * X_eff.K, 32);
    Eigen::VectorXcd fvals(n);
    for (int j = 0; j < n; ++j) fvals(j) = Complex{red.m_hat / vals(j) - 1.0, 0.0};
    TorusField f = field_from_samples(fvals, Kl);
    red.lambda = TorusField(Kl, false);
    for (int k = -Kl; k <= Kl; ++k)
        if (k != 0) red.lambda.c(k) = f.c(k) / Complex(0.0, static_cast<double>(k));
    red.lambda.symmetrize_real();

    // lambda_tilde by the same fixed-point inversion (time-independent wrap)
    SpaceTimeField bl(Kl, 0, true);
    for (int k = -Kl; k <= Kl; ++k) bl.c(k, 0) = red.lambda.c(k);
    SpaceTimeField blt = invert_diffeo(bl);
    red.lambda_tilde = blt.slice_time(0.0);
    red.lambda_tilde.symmetrize_real();

    // flatness of the conjugated coefficient
    const TorusField lp = derivative(red.lambda);
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        const double y = kTwoPi * j / n;
        worst = std::max(worst,
                         std::abs((1.0 + lp.eval_real(y)) * X_eff.eval_real(y) - red.m_hat));
    }
    red.flatness_residual = worst;
    return red;
}

DiffeoTransform lambda_transform(const ConstantCoefficientReduction& red) {
    DiffeoTransform T;
    T.beta = SpaceTimeField(red.lambda.K, 0, true);
    for (int k = -red.lambda.K; k <= red.lambda.K; ++k) T.beta.c(k, 0) = red.lambda.c(k);
    T.beta_tilde = SpaceTimeField(red.lambda_tilde.K, 0, true);
    for (int k = -red.lambda_tilde.K; k <= red.lambda_tilde.K; ++k)
        T.beta_tilde.c(k, 0) = red.lambda_tilde.c(k);
    T.invertibility_margin = field_min_one_plus_dx(T.beta);
    return T;
}

}  // namespace rtl
