#include <doctest.h>

#include <cmath>
#include <random>

#include "rtl/resonance.hpp"
#include "test_util.hpp"

using namespace rtl;

namespace {

SpaceTimeField cos_xpt() {  // cos(x + t)
    SpaceTimeField V(4, 4, true);
    V.c(1, 1) = 0.5;
    V.c(-1, -1) = 0.5;
    return V;
}

SpaceTimeField cos_xmt() {  // cos(x - t)
    SpaceTimeField V(4, 4, true);
    V.c(1, -1) = 0.5;
    V.c(-1, 1) = 0.5;
    return V;
}

// quadrature oracle: <V>_m(x) = (1/2pi) int V(t, x - mt) dt on a trapezoid
// grid fine enough to be exact for trigonometric polynomials
double time_average_oracle(const SpaceTimeField& V, int m, double x) {
    const int n = 4 * (V.K_t + m * V.K_x) + 8;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double t = kTwoPi * j / n;
        acc += V.eval_real(t, x - m * t);
    }
    return acc / n;
}

}  // namespace

TEST_CASE("resonant average of worked examples") {
    {
        TorusField w = resonant_average(cos_xpt(), 1);
        CHECK(std::abs(w.c(1) - Complex{0.5, 0.0}) < 1e-15);
        CHECK(std::abs(w.c(-1) - Complex{0.5, 0.0}) < 1e-15);
        CHECK(sobolev_norm(w, 0.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
    }
    {
        TorusField w = resonant_average(cos_xmt(), 1);
        CHECK(l2_norm(w) < 1e-15);
    }
    {
        // V = 2 + cos(x+t) + sin(2x-t), m=1 -> 2 + cos x
        SpaceTimeField V(4, 4, true);
        V.c(0, 0) = 2.0;
        V.c(1, 1) = 0.5;
        V.c(-1, -1) = 0.5;
        V.c(2, -1) = Complex{0.0, -0.5};
        V.c(-2, 1) = Complex{0.0, 0.5};
        TorusField w = resonant_average(V, 1);
        CHECK(std::abs(w.c(0) - Complex{2.0, 0.0}) < 1e-15);
        CHECK(std::abs(w.c(1) - Complex{0.5, 0.0}) < 1e-15);
        CHECK(std::abs(w.c(2)) < 1e-15);
        for (double x : {0.0, 1.1, 2.9, 5.0})
            CHECK(w.eval_real(x) ==
                  doctest::Approx(time_average_oracle(V, 1, x)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(resonant_average(cos_xpt(), 0), InvalidFrequency);
}

TEST_CASE("quadrature equivalence on 50 random fields") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 1 + trial % 3;
        const SpaceTimeField V = rtl_test::random_space_time_field(4, 12, rng);
        const TorusField w = resonant_average(V, m);
        double worst = 0.0;
        for (int j = 0; j < 16; ++j) {
            const double x = kTwoPi * j / 16;
            worst = std::max(worst, std::abs(w.eval_real(x) - time_average_oracle(V, m, x)));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("resonant average is linear and a projection") {
    std::mt19937_64 rng(22);
    const SpaceTimeField V1 = rtl_test::random_space_time_field(3, 9, rng);
    const SpaceTimeField V2 = rtl_test::random_space_time_field(3, 9, rng);
    const double a = 1.7, b = -0.4;
    SpaceTimeField lin(3, 9, true);
    lin.coeffs = a * V1.coeffs + b * V2.coeffs;
    const TorusField w = resonant_average(lin, 2);
    const TorusField w1 = resonant_average(V1, 2);
    const TorusField w2 = resonant_average(V2, 2);
    CHECK((w.coeffs - a * w1.coeffs - b * w2.coeffs).norm() < 1e-14);

    const SpaceTimeField lifted = lift_resonant(w1, 2, 3, 9);
    const TorusField back = resonant_average(lifted, 2);
    CHECK((back.coeffs - w1.coeffs).norm() == 0.0);
    CHECK(is_completely_resonant(lifted, 2));
}

TEST_CASE("complete resonance detection") {
    CHECK(is_completely_resonant(cos_xpt(), 1));
    CHECK_FALSE(is_completely_resonant(cos_xpt(), 2));
    CHECK_FALSE(is_completely_resonant(cos_xmt(), 1));
}

TEST_CASE("find_zeros on closed forms") {
    {
        TorusField X(2, true);
        X.c(1) = 0.5;
        X.c(-1) = 0.5;  // cos x
        auto zeros = find_zeros(X);
        REQUIRE(zeros.size() == 2);
        CHECK(zeros[0].location == doctest::Approx(M_PI / 2).epsilon(1e-12));
        CHECK(zeros[0].slope == doctest::Approx(-1.0).epsilon(1e-10));
        CHECK(zeros[1].location == doctest::Approx(3 * M_PI / 2).epsilon(1e-12));
        CHECK(zeros[1].slope == doctest::Approx(1.0).epsilon(1e-10));
        for (const auto& z : zeros) CHECK(z.refinement_residual <= 1e-10);
    }
    {
        TorusField X(2, true);
        X.c(0) = 2.0;
        X.c(1) = 0.5;
        X.c(-1) = 0.5;  // 2 + cos x
        CHECK(find_zeros(X).empty());
    }
    {
        TorusField X(2, true);
        X.c(0) = 1.0;
        X.c(1) = 0.5;
        X.c(-1) = 0.5;  // 1 + cos x: tangency at pi
        auto zeros = find_zeros(X);
        REQUIRE(zeros.size() == 1);
        CHECK_FALSE(zeros[0].from_sign_change);
        CHECK(zeros[0].location == doctest::Approx(M_PI).epsilon(1e-9));
        CHECK(std::abs(zeros[0].slope) < 1e-8);
    }
}

TEST_CASE("classification of the benchmark potentials") {
    Tolerances tol;
    {
        SpaceTimeField V = cos_xpt();
        V.c(0, 0) = 2.0;  // 2 + cos(x+t)
        auto rep = classify(V, 1);
        CHECK(rep.verdict == Verdict::Stable);
        CHECK(rep.zeros.empty());
        CHECK(rep.min_abs_value > tol.stable_margin);
    }
    {
        auto rep = classify(cos_xpt(), 1);
        CHECK(rep.verdict == Verdict::Unstable);
        CHECK(rep.nu == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.zeros.size() == 2);
    }
    {
        auto rep = classify(cos_xmt(), 1);  // zero average
        CHECK(rep.verdict == Verdict::Degenerate);
    }
    {
        SpaceTimeField V = cos_xpt();
        V.c(0, 0) = 1.0;  // <V> = 1 + cos x, tangent
        auto rep = classify(V, 1);
        CHECK(rep.verdict == Verdict::Degenerate);
    }
}

TEST_CASE("classification verdict is scale equivariant") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        SpaceTimeField V = rtl_test::random_space_time_field(3, 6, rng);
        const auto base = classify(V, 1).verdict;
        for (double cs : {0.3, 2.0, 17.0}) {
            SpaceTimeField W = V;
            W.coeffs *= cs;
            CHECK(classify(W, 1).verdict == base);
        }
    }
}

TEST_CASE("regularize repairs the degenerate presets") {
    {
        // <V> = 1 + cos x: the tangency is removed by almost every shift
        SpaceTimeField V = cos_xpt();
        V.c(0, 0) = 1.0;
        double shift = 0.0;
        SpaceTimeField W = regularize(V, 1, 0.1, 99, 64, &shift);
        CHECK(classify(W, 1).verdict != Verdict::Degenerate);
        CHECK(std::abs(shift) < 0.1);
        CHECK(std::abs(shift) > 0.0);
        // sup distance equals the shift: only the (0,0) mode moved
        SpaceTimeField D = W;
        D.coeffs -= V.coeffs;
        CHECK(sup_norm_estimate(D) == doctest::Approx(std::abs(shift)).epsilon(1e-12));
    }
    {
        // <V> = 0: any nonzero shift makes it Stable
        double shift = 0.0;
        SpaceTimeField W = regularize(cos_xmt(), 1, 0.1, 7, 64, &shift);
        auto rep = classify(W, 1);
        CHECK(rep.verdict == Verdict::Stable);
        CHECK(std::abs(shift) > 0.0);
    }
    {
        // already non-degenerate: unchanged
        SpaceTimeField V = cos_xpt();
        V.c(0, 0) = 2.0;
        double shift = 1.0;
        SpaceTimeField W = regularize(V, 1, 0.1, 3, 64, &shift);
        CHECK(shift == 0.0);
        CHECK((W.coeffs - V.coeffs).norm() == 0.0);
    }
}
