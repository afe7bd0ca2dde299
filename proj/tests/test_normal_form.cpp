#include <doctest.h>

#include <cmath>
#include <random>

#include "rtl/normal_form.hpp"
#include "test_util.hpp"

using namespace rtl;

namespace {

double homological_residual(const SpaceTimeField& W, const SpaceTimeField& beta, int m) {
    // W + m beta_x - beta_t - <W>_m(x + mt), measured in L^2(T^2)
    const TorusField avg = resonant_average(W, m);
    const SpaceTimeField lift = lift_resonant(avg, m, W.K_x, W.K_t);
    SpaceTimeField r = W;
    r.coeffs += m * derivative_x(beta).coeffs - derivative_t(beta).coeffs - lift.coeffs;
    return l2_norm(r);
}

}  // namespace

TEST_CASE("homological solve in closed form") {
    {
        // W = cos(x - t), m = 1 -> beta = -(1/2) sin(x - t)
        SpaceTimeField W(3, 3, true);
        W.c(1, -1) = 0.5;
        W.c(-1, 1) = 0.5;
        SpaceTimeField beta = solve_homological(W, 1);
        // -(1/2) sin(x-t) has modes (1,-1): i/4, (-1,1): -i/4
        CHECK(std::abs(beta.c(1, -1) - Complex{0.0, 0.25}) < 1e-14);
        CHECK(std::abs(beta.c(-1, 1) - Complex{0.0, -0.25}) < 1e-14);
        CHECK(homological_residual(W, beta, 1) < 1e-13);
    }
    {
        // completely resonant: beta = 0
        SpaceTimeField W(3, 3, true);
        W.c(1, 1) = 0.5;
        W.c(-1, -1) = 0.5;
        CHECK(l2_norm(solve_homological(W, 1)) == 0.0);
    }
    {
        // W = sin(2t), m = 1 -> beta = -(1/2) cos(2t)
        SpaceTimeField W(2, 2, true);
        W.c(0, 2) = Complex{0.0, -0.5};
        W.c(0, -2) = Complex{0.0, 0.5};
        SpaceTimeField beta = solve_homological(W, 1);
        CHECK(std::abs(beta.c(0, 2) - Complex{-0.25, 0.0}) < 1e-14);
        CHECK(std::abs(beta.c(0, -2) - Complex{-0.25, 0.0}) < 1e-14);
        CHECK(homological_residual(W, beta, 1) < 1e-13);
    }
}

TEST_CASE("homological residual on 50 random fields") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 1 + trial % 3;
        const SpaceTimeField W = rtl_test::random_space_time_field(4, 3 * 4, rng);
        const SpaceTimeField beta = solve_homological(W, m);
        CHECK(homological_residual(W, beta, m) < 1e-10);
        CHECK(beta.is_real);
    }
}

TEST_CASE("diffeo inversion closed forms and fixed-point oracle") {
    {
        // beta constant in x: beta_tilde = -beta
        SpaceTimeField beta(2, 2, true);
        beta.c(0, 1) = 0.15;
        beta.c(0, -1) = 0.15;  // 0.3 cos t
        SpaceTimeField bt = invert_diffeo(beta);
        for (double t : {0.0, 1.0, 2.5})
            for (double y : {0.3, 2.2})
                CHECK(bt.eval_real(t, y) ==
                      doctest::Approx(-0.3 * std::cos(t)).epsilon(1e-11));
    }
    {
        SpaceTimeField beta(2, 2, true);  // zero
        SpaceTimeField bt = invert_diffeo(beta);
        CHECK(l2_norm(bt) < 1e-13);
    }
    {
        // beta = 0.3 sin x, t-independent; independent damped fixed-point oracle
        SpaceTimeField beta(4, 0, true);
        beta.c(1, 0) = Complex{0.0, -0.15};
        beta.c(-1, 0) = Complex{0.0, 0.15};
        DiffeoTransform T = make_transform(beta);
        CHECK(T.invertibility_margin == doctest::Approx(0.7).epsilon(1e-6));
        CHECK(T.composition_residual < 1e-12);
        for (double y : {0.4, 1.9, 4.8}) {
            double z = 0.0;
            for (int it = 0; it < 200; ++it) z = 0.5 * z + 0.5 * (-0.3 * std::sin(y + z));
            CHECK(T.beta_tilde.eval_real(0.0, y) == doctest::Approx(z).epsilon(1e-10));
        }
    }
    {
        // margin <= 0 rejected
        SpaceTimeField beta(2, 0, true);
        beta.c(1, 0) = Complex{0.0, -0.6};
        beta.c(-1, 0) = Complex{0.0, 0.6};  // 1.2 sin x
        CHECK_THROWS_AS(invert_diffeo(beta), DiffeoNotInvertible);
    }
}

TEST_CASE("apply_transform: identity, unitarity, round trip") {
    std::mt19937_64 rng(32);
    {
        SpaceTimeField beta(2, 2, true);
        DiffeoTransform T = make_transform(beta);
        StateVector u = rtl_test::random_state(16, rng);
        StateVector v = apply_transform(T, 0.3, u, Direction::Forward);
        CHECK((v.coeffs - u.coeffs).norm() < 1e-13);
    }
    {
        SpaceTimeField beta(3, 3, true);
        beta.c(1, 1) = Complex{0.0, -0.1};
        beta.c(-1, -1) = Complex{0.0, 0.1};  // 0.2 sin(x+t)
        DiffeoTransform T = make_transform(beta);
        for (int trial = 0; trial < 50; ++trial) {
            StateVector u = rtl_test::random_bandlimited_state(24, 10, rng);
            const double t = trial * 0.13;
            StateVector v = apply_transform(T, t, u, Direction::Forward);
            CHECK(std::abs(l2_norm(v) - l2_norm(u)) / l2_norm(u) < 1e-9);
        }
        // round trip on a pure mode
        StateVector e5(16, 0.0);
        e5.c(5) = 1.0;
        StateVector fwd = apply_transform(T, 0.7, e5, Direction::Forward);
        StateVector back = apply_transform(T, 0.7, fwd, Direction::Inverse);
        CHECK((back.coeffs - e5.coeffs).norm() < 1e-9);
    }
}

TEST_CASE("pushforward of the transport coefficient") {
    std::mt19937_64 rng(33);
    {
        // beta = 0: w unchanged
        const SpaceTimeField w = rtl_test::random_space_time_field(3, 3, rng);
        DiffeoTransform T = make_transform(SpaceTimeField(3, 3, true));
        SpaceTimeField wp = pushforward_coefficient(w, T);
        CHECK((wp.coeffs - w.coeffs).norm() < 1e-12);
    }
    {
        // w = m constant, beta = beta(t): w' = m - beta_dot(t)
        SpaceTimeField w(2, 2, true);
        w.c(0, 0) = 3.0;
        SpaceTimeField beta(2, 2, true);
        beta.c(0, 1) = 0.2;
        beta.c(0, -1) = 0.2;  // 0.4 cos t
        DiffeoTransform T = make_transform(beta);
        SpaceTimeField wp = pushforward_coefficient(w, T);
        for (double t : {0.2, 1.5, 4.0})
            for (double x : {0.0, 2.0})
                CHECK(wp.eval_real(t, x) ==
                      doctest::Approx(3.0 + 0.4 * std::sin(t)).epsilon(1e-10));
    }
    {
        // resonant-order content of the conjugated coefficient: with
        // beta = solve_homological(eps V), (w' - m)/eps - <V>(x+mt) = O(eps)
        SpaceTimeField V(3, 3, true);
        V.c(1, -1) = 0.5;
        V.c(-1, 1) = 0.5;  // cos(x - t): zero average
        auto residual_at = [&](double eps) {
            SpaceTimeField w = V;
            w.coeffs *= eps;
            w.c(0, 0) += 1.0;  // m = 1
            SpaceTimeField r = w;
            r.c(0, 0) -= 1.0;
            DiffeoTransform T = make_transform(solve_homological(r, 1));
            SpaceTimeField wp = pushforward_coefficient(w, T);
            wp.c(0, 0) -= 1.0;  // (w' - m), resonant part should be O(eps^2)
            const TorusField avg = resonant_average(wp, 1);
            SpaceTimeField lift = lift_resonant(avg, 1, wp.K_x, wp.K_t);
            return l2_norm(wp);  // total first-order content died: O(eps^2) left
        };
        const double r1 = residual_at(0.1);
        const double r2 = residual_at(0.05);
        CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));
    }
}

TEST_CASE("normal form on a completely resonant potential is exact") {
    SpaceTimeField V(2, 2, true);
    V.c(1, 1) = 0.5;
    V.c(-1, -1) = 0.5;  // cos(x+t)
    for (int N : {1, 2, 3}) {
        NormalFormChain chain = normal_form_reduce(V, 1, 0.12, N);
        for (const auto& st : chain.steps) CHECK(l2_norm(st.beta) == 0.0);
        CHECK(l2_norm(chain.Z) < 1e-13);
        CHECK(chain.remainder_norm < 1e-14);
        // final coefficient is exactly eps cos x in the moving frame
        CHECK(std::abs(chain.resonant_avg.c(1) - Complex{0.5, 0.0}) < 1e-14);
    }
}

TEST_CASE("normal form remainder scales like eps^{N+1}") {
    SpaceTimeField V(2, 2, true);
    V.c(1, -1) = 0.5;
    V.c(-1, 1) = 0.5;  // cos(x - t): nonresonant
    for (int N : {1, 2}) {
        std::vector<double> eps{0.1, 0.05, 0.025};
        std::vector<double> rem;
        for (double e : eps) rem.push_back(normal_form_reduce(V, 1, e, N).remainder_norm);
        // log-log slope across the sweep
        const double slope1 = std::log(rem[0] / rem[1]) / std::log(2.0);
        const double slope2 = std::log(rem[1] / rem[2]) / std::log(2.0);
        CHECK(std::abs(slope1 - (N + 1)) < 0.2);
        CHECK(std::abs(slope2 - (N + 1)) < 0.2);
    }
}

TEST_CASE("chain application is unitary and invertible") {
    std::mt19937_64 rng(34);
    SpaceTimeField V(3, 3, true);
    V.c(1, -1) = 0.5;
    V.c(-1, 1) = 0.5;
    V.c(2, 1) = 0.1;
    V.c(-2, -1) = 0.1;
    NormalFormChain chain = normal_form_reduce(V, 1, 0.05, 2);
    for (int trial = 0; trial < 100; ++trial) {
        StateVector u = rtl_test::random_bandlimited_state(24, 10, rng);
        const double t = 0.21 * trial;
        StateVector v = apply_chain(chain, t, u, Direction::Inverse);
        CHECK(std::abs(l2_norm(v) - l2_norm(u)) / l2_norm(u) < 1e-9);
        StateVector back = apply_chain(chain, t, v, Direction::Forward);
        CHECK((back.coeffs - u.coeffs).norm() / u.coeffs.norm() < 1e-9);
    }
}

TEST_CASE("constant coefficient reduction") {
    {
        TorusField X(2, true);
        X.c(0) = 2.0;
        X.c(1) = 0.5;
        X.c(-1) = 0.5;  // 2 + cos x
        auto red = constant_coefficient_reduce(X);
        CHECK(red.m_hat == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
        CHECK(red.flatness_residual < 1e-9);
        CHECK(std::abs(red.lambda.c(0)) < 1e-14);
        // Lambda transform is unitary on states; the composition stretches
        // frequency support by up to max(1+lambda') so the test state is
        // band-limited well inside the cutoff
        std::mt19937_64 rng(35);
        DiffeoTransform T = lambda_transform(red);
        StateVector u = rtl_test::random_bandlimited_state(64, 10, rng);
        StateVector v = apply_transform(T, 0.0, u, Direction::Forward);
        CHECK(std::abs(l2_norm(v) - l2_norm(u)) < 1e-9);
        StateVector back = apply_transform(T, 0.0, v, Direction::Inverse);
        CHECK((back.coeffs - u.coeffs).norm() < 1e-8);
    }
    {
        TorusField X(1, true);
        X.c(0) = 1.7;  // constant
        auto red = constant_coefficient_reduce(X);
        CHECK(red.m_hat == doctest::Approx(1.7).epsilon(1e-12));
        CHECK(l2_norm(red.lambda) < 1e-12);
    }
    {
        TorusField X(1, true);
        X.c(1) = 0.5;
        X.c(-1) = 0.5;  // cos x vanishes
        CHECK_THROWS_AS(constant_coefficient_reduce(X), NotResonantlyStable);
    }
}
