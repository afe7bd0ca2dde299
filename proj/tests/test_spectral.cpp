#include <doctest.h>

#include <cmath>
#include <random>

#include "rtl/spectral.hpp"
#include "test_util.hpp"

using namespace rtl;

TEST_CASE("to_coefficients picks out constants and cosines") {
    {
        Eigen::VectorXcd ones = Eigen::VectorXcd::Constant(9, Complex{1.0, 0.0});
        TorusField f = to_coefficients(ones);
        CHECK(std::abs(f.c(0) - Complex{1.0, 0.0}) < 1e-14);
        for (int k = 1; k <= f.K; ++k) {
            CHECK(std::abs(f.c(k)) < 1e-14);
            CHECK(std::abs(f.c(-k)) < 1e-14);
        }
    }
    {
        Eigen::VectorXcd samples(9);
        for (int j = 0; j < 9; ++j) samples(j) = std::cos(kTwoPi * j / 9);
        TorusField f = to_coefficients(samples);
        CHECK(std::abs(f.c(1) - Complex{0.5, 0.0}) < 1e-14);
        CHECK(std::abs(f.c(-1) - Complex{0.5, 0.0}) < 1e-14);
        CHECK(std::abs(f.c(0)) < 1e-14);
    }
}

TEST_CASE("to_coefficients rejects bad grids") {
    CHECK_THROWS_AS(to_coefficients(Eigen::VectorXcd::Zero(8)), InvalidGrid);
    CHECK_THROWS_AS(to_coefficients(Eigen::VectorXcd::Zero(1)), InvalidGrid);
}

TEST_CASE("round trip on exp(sin x) at K=16") {
    const int K = 16, n = 2 * K + 1;
    Eigen::VectorXcd samples(n);
    for (int j = 0; j < n; ++j) samples(j) = std::exp(std::sin(kTwoPi * j / n));
    TorusField f = to_coefficients(samples);
    Eigen::VectorXcd back = to_samples(f, n);
    CHECK((back - samples).norm() / samples.norm() < 1e-12);
}

TEST_CASE("sobolev norm worked values") {
    TorusField f(3, false);
    f.c(1) = 1.0;
    CHECK(sobolev_norm(f, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    TorusField g(2, false);
    g.c(0) = 1.0;
    CHECK(sobolev_norm(g, 3.7) == doctest::Approx(1.0).epsilon(1e-14));
    TorusField h(4, false);
    h.c(3) = 1.0;
    CHECK(sobolev_norm(h, 2.0) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("derivative in closed form and against finite differences") {
    // cos x -> -sin x
    TorusField f(2, false);
    f.c(1) = 0.5;
    f.c(-1) = 0.5;
    TorusField fp = derivative(f);
    for (double x : {0.3, 1.7, 4.4}) CHECK(fp.eval_real(x) == doctest::Approx(-std::sin(x)).epsilon(1e-13));

    // constants die
    TorusField c(2, false);
    c.c(0) = 3.0;
    CHECK(l2_norm(derivative(c)) == 0.0);

    // exp(cos x) versus fourth-order differences on a 4097-point grid
    const int K = 24, n = 2 * K + 1;
    Eigen::VectorXcd samples(n);
    for (int j = 0; j < n; ++j) samples(j) = std::exp(std::cos(kTwoPi * j / n));
    const TorusField g = to_coefficients(samples);
    const TorusField gp = derivative(g);
    const int m = 4097;
    const double h = kTwoPi / m;
    double worst = 0.0;
    for (int j = 0; j < m; ++j) {
        const double x = kTwoPi * j / m;
        const double fd = (-g.eval_real(x + 2 * h) + 8 * g.eval_real(x + h) -
                           8 * g.eval_real(x - h) + g.eval_real(x - 2 * h)) /
                          (12.0 * h);
        worst = std::max(worst, std::abs(fd - gp.eval_real(x)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("Parseval against trapezoid quadrature on 100 random fields") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        TorusField f = rtl_test::random_torus_field(8, rng);
        const int n = 8 * (2 * f.K + 1);
        Eigen::VectorXcd vals = to_samples(f, n);
        double quad = 0.0;
        for (int j = 0; j < n; ++j) quad += std::norm(vals(j));
        quad /= n;  // (1/2pi) int |f|^2
        const double coeff = std::pow(sobolev_norm(f, 0.0), 2);
        CHECK(std::abs(quad - coeff) / coeff < 1e-10);
    }
}

TEST_CASE("norm monotonicity in s") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> su(-2.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        TorusField f = rtl_test::random_torus_field(10, rng);
        double s1 = su(rng), s2 = su(rng);
        if (s1 > s2) std::swap(s1, s2);
        CHECK(sobolev_norm(f, s1) <= sobolev_norm(f, s2) + 1e-12);
    }
}

TEST_CASE("products are exact at the combined cutoff") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const TorusField f = rtl_test::random_torus_field(5, rng);
        const TorusField g = rtl_test::random_torus_field(7, rng);
        const TorusField h = product(f, g);
        CHECK(h.K == 12);
        // independent oracle: direct coefficient convolution
        double worst = 0.0;
        for (int k = -h.K; k <= h.K; ++k) {
            Complex conv{0.0, 0.0};
            for (int a = -f.K; a <= f.K; ++a) conv += f.c(a) * g.c(k - a);
            worst = std::max(worst, std::abs(conv - h.c(k)));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("truncation records the discarded tail") {
    std::mt19937_64 rng(10);
    TorusField f = rtl_test::random_torus_field(12, rng, 0.05);
    auto tr = truncate(f, 6);
    double lost = 0.0;
    for (int k = 7; k <= 12; ++k) lost += std::norm(f.c(k)) + std::norm(f.c(-k));
    CHECK(tr.discarded_mass == doctest::Approx(std::sqrt(lost)).epsilon(1e-12));
    CHECK(tr.field.K == 6);
}

TEST_CASE("space-time fields: slices, samples, realness") {
    std::mt19937_64 rng(11);
    SpaceTimeField V = rtl_test::random_space_time_field(5, 4, rng);
    // slicing commutes with evaluation
    for (double t : {0.0, 0.9, 3.3}) {
        TorusField s = V.slice_time(t);
        for (double x : {0.1, 2.0, 5.5})
            CHECK(std::abs(s.eval(x) - V.eval(t, x)) < 1e-12);
        CHECK(std::abs(s.eval(1.0).imag()) < 1e-12);  // real field
    }
    // grid round trip
    Eigen::MatrixXcd grid = to_samples_2d(V, 2 * V.K_x + 1, 2 * V.K_t + 1);
    SpaceTimeField W = space_time_from_samples(grid, V.K_x, V.K_t);
    CHECK((W.coeffs - V.coeffs).norm() < 1e-12);
}

TEST_CASE("2d product exact at combined cutoffs") {
    std::mt19937_64 rng(12);
    const SpaceTimeField f = rtl_test::random_space_time_field(3, 2, rng);
    const SpaceTimeField g = rtl_test::random_space_time_field(2, 3, rng);
    const SpaceTimeField h = product(f, g);
    double worst = 0.0;
    for (int k = -h.K_x; k <= h.K_x; ++k)
        for (int l = -h.K_t; l <= h.K_t; ++l) {
            Complex conv{0.0, 0.0};
            for (int a = -f.K_x; a <= f.K_x; ++a)
                for (int b = -f.K_t; b <= f.K_t; ++b) conv += f.c(a, b) * g.c(k - a, l - b);
            worst = std::max(worst, std::abs(conv - h.c(k, l)));
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("state vector evaluation matches the mode sum") {
    std::mt19937_64 rng(13);
    StateVector u = rtl_test::random_state(12, rng);
    for (double x : {0.0, 0.77, 4.2}) {
        Complex direct{0.0, 0.0};
        for (int k = -u.K; k <= u.K; ++k) direct += u.c(k) * std::polar(1.0, k * x);
        CHECK(std::abs(direct - u.eval(x)) < 1e-12);
    }
    CHECK(center_frequency(u) >= 0.0);
}
