#include "rtl/classical_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rtl {
namespace {

double wrap_2pi(double x) {
    x = std::fmod(x, kTwoPi);
    if (x < 0) x += kTwoPi;
    return x;
}

double circle_dist(double a, double b) {
    double d = std::abs(wrap_2pi(a) - wrap_2pi(b));
    return std::min(d, kTwoPi - d);
}

double min_dist_to(const std::vector<ZeroRecord>& zs, double x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : zs) best = std::min(best, circle_dist(x, z.location));
    return best;
}

// quintic corner blend: F(u) = 2u^3 - u^4 on [0,1], F(0)=F'(0)=F''(0)=0,
// F(1)=1, F'(1)=2, F''(1)=0; monotone with max F' = 2
double corner_F(double u) { return u * u * u * (2.0 - u); }
double corner_Fp(double u) { return u * u * (6.0 - 4.0 * u); }

double smoothstep5(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smoothstep5p(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }

}  // namespace

double phi_sigma(double s, double tau) {
    if (!(s > 0.0) || s >= 0.5)
        throw Error("phi_sigma: smoothing parameter out of range");
    if (std::isinf(tau)) return tau > 0 ? 1.0 : 0.0;
    const double hi = 1.0 / s;
    if (tau <= -s) return 0.0;
    if (tau >= hi + s) return 1.0;
    if (tau < s) {
        const double u = (tau + s) / (2.0 * s);
        return s * s * corner_F(u);
    }
    if (tau <= hi - s) return s * tau;
    const double u = (tau - (hi - s)) / (2.0 * s);
    return 1.0 - s * s * corner_F(1.0 - u);
}

double phi_sigma_derivative(double s, double tau) {
    if (std::isinf(tau)) return 0.0;
    const double hi = 1.0 / s;
    if (tau <= -s || tau >= hi + s) return 0.0;
    if (tau < s) {
        const double u = (tau + s) / (2.0 * s);
        return 0.5 * s * corner_Fp(u);
    }
    if (tau <= hi - s) return s;
    const double u = (tau - (hi - s)) / (2.0 * s);
    return 0.5 * s * corner_Fp(1.0 - u);
}

bool IntervalUnion::contains(double x) const {
    const double xi = wrap_2pi(x);
    for (const auto& p : parts) {
        if (xi >= p.lo && xi <= p.hi) return true;
        if (xi + kTwoPi >= p.lo && xi + kTwoPi <= p.hi) return true;
    }
    return false;
}

double IntervalUnion::total_length() const {
    double acc = 0.0;
    for (const auto& p : parts) acc += p.hi - p.lo;
    return acc;
}

double flow_torus(const TorusField& X, double x0, double t, double rtol) {
    if (t == 0.0) return x0;
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-2;
    OdeRhs f = [&X](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy(0) = X.eval_real(y(0));
    };
    Eigen::VectorXd y0(1);
    y0(0) = x0;
    return ode_solve(f, y0, 0.0, t, opts)(0);
}

CotangentPoint flow_cotangent(const TorusField& X, const CotangentPoint& z0, double t,
                              double rtol) {
    if (t == 0.0) return z0;
    const TorusField Xp = derivative(X);
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-2;
    OdeRhs f = [&X, &Xp](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy(0) = X.eval_real(y(0));
        dy(1) = -y(1) * Xp.eval_real(y(0));
    };
    Eigen::VectorXd y0(2);
    y0 << z0.x, z0.xi;
    Eigen::VectorXd y = ode_solve(f, y0, 0.0, t, opts);
    return {y(0), y(1)};
}

FlowStructure analyze_flow(const TorusField& X, std::uint64_t seed, double t_converge) {
    Tolerances tol;
    std::vector<ZeroRecord> zeros = find_zeros(X, tol);
    if (zeros.empty()) throw NoHyperbolicStructure("analyze_flow: X has no zeros");
    for (const auto& z : zeros)
        if (!z.from_sign_change || std::abs(z.slope) <= tol.degeneracy_tol)
            throw DegenerateVectorField("analyze_flow: degenerate zero at x=" +
                                        std::to_string(z.location));

    FlowStructure fs;
    double nu = std::numeric_limits<double>::infinity();
    for (const auto& z : zeros) nu = std::min(nu, std::abs(z.slope));
    fs.nu = nu;

    double min_spacing = kTwoPi;
    for (size_t i = 0; i < zeros.size(); ++i)
        for (size_t j = i + 1; j < zeros.size(); ++j)
            min_spacing =
                std::min(min_spacing, circle_dist(zeros[i].location, zeros[j].location));

    const TorusField Xp = derivative(X);
    const double cap = 0.5 * min_spacing;
    const double h = kTwoPi / 8192.0;
    auto radius_for = [&](const ZeroRecord& z) {
        double r = h;
        while (r < cap) {
            const double next = r + h;
            if (std::abs(Xp.eval_real(z.location + next) - z.slope) > nu / 4.0 ||
                std::abs(Xp.eval_real(z.location - next) - z.slope) > nu / 4.0)
                break;
            r = next;
        }
        return std::min(r, cap);
    };

    for (const auto& z : zeros) {
        const double r = radius_for(z);
        Interval iv{z.location - r, z.location + r};
        if (z.slope < 0) {
            fs.K_plus.push_back(z);
            fs.radius_plus.push_back(r);
            fs.U_plus.parts.push_back(iv);
        } else {
            fs.K_minus.push_back(z);
            fs.radius_minus.push_back(r);
            fs.U_minus.parts.push_back(iv);
        }
    }

    // empirical attractor-repellor check: random starts converge to K+ forward
    // and to K- backward
    if (t_converge <= 0.0) t_converge = 100.0 / nu;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, kTwoPi);
    OdeRhs f = [&X](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy(0) = X.eval_real(y(0));
    };
    for (int trial = 0; trial < 32; ++trial) {
        double x0 = unif(rng);
        if (min_dist_to(zeros, x0) < 1e-3) continue;
        for (double dir : {+1.0, -1.0}) {
            const auto& target = dir > 0 ? fs.K_plus : fs.K_minus;
            Eigen::VectorXd y0(1);
            y0(0) = x0;
            auto ev = ode_solve_until(
                f, y0, 0.0, dir,
                [&](const Eigen::VectorXd& y) { return min_dist_to(target, y(0)) - 1e-3; },
                t_converge);
            if (!ev.triggered)
                throw IntegrationFailure(
                    "analyze_flow: trajectory failed to reach the hyperbolic set");
        }
    }
    return fs;
}

double transit_time(const FlowStructure& fs, const TorusField& X, double x, double rtol) {
    if (min_dist_to(fs.K_plus, x) < 1e-9) return kTransitInfinite;
    if (min_dist_to(fs.K_minus, x) < 1e-9) return -kTransitInfinite;

    // signed distance to the boundary of U_minus: negative inside
    auto boundary_gap = [&](double xx) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < fs.K_minus.size(); ++i)
            best =
                std::min(best, circle_dist(xx, fs.K_minus[i].location) - fs.radius_minus[i]);
        return best;
    };

    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-2;
    OdeRhs f = [&X](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy(0) = X.eval_real(y(0));
    };
    Eigen::VectorXd y0(1);
    y0(0) = x;
    const double g0 = boundary_gap(x);
    if (g0 == 0.0) return 0.0;
    const double t_max = 200.0 / fs.nu;
    // inside U_minus the forward flow exits; outside, the backward flow enters
    const double dir = g0 < 0.0 ? +1.0 : -1.0;
    auto ev = ode_solve_until(
        f, y0, 0.0, dir, [&](const Eigen::VectorXd& y) { return boundary_gap(y(0)); },
        t_max, opts);
    if (!ev.triggered)
        throw IntegrationFailure("transit_time: boundary of U_minus not reached");
    // Phi^{ev.t}(x) on the boundary means t_tilde = -ev.t in both cases
    return -ev.t;
}

namespace {

struct PiecewiseProfiles {
    std::vector<double> centers;
    std::vector<double> radii;
    std::vector<double> values;  // +1 on attracting intervals, -1 on repelling

    double k_value(double x) const {
        const size_t n = centers.size();
        const double xi = wrap_2pi(x);
        for (size_t i = 0; i < n; ++i)
            if (circle_dist(xi, centers[i]) <= radii[i]) return values[i];
        for (size_t i = 0; i < n; ++i) {
            const size_t j = (i + 1) % n;
            double R = centers[i] + radii[i];
            double L = centers[j] - radii[j];
            while (L < R) L += kTwoPi;
            double xx = xi;
            while (xx < R) xx += kTwoPi;
            if (xx <= L) {
                const double u = (xx - R) / (L - R);
                return values[i] + (values[j] - values[i]) * smoothstep5(u);
            }
        }
        return values.empty() ? 0.0 : values[0];
    }

    double k_derivative(double x) const {
        const size_t n = centers.size();
        const double xi = wrap_2pi(x);
        for (size_t i = 0; i < n; ++i)
            if (circle_dist(xi, centers[i]) <= radii[i]) return 0.0;
        for (size_t i = 0; i < n; ++i) {
            const size_t j = (i + 1) % n;
            double R = centers[i] + radii[i];
            double L = centers[j] - radii[j];
            while (L < R) L += kTwoPi;
            double xx = xi;
            while (xx < R) xx += kTwoPi;
            if (xx <= L) {
                const double w = L - R;
                const double u = (xx - R) / w;
                return (values[j] - values[i]) * smoothstep5p(u) / w;
            }
        }
        return 0.0;
    }
};

// Self-contained escape-construction state; profile_at keeps it alive through
// a shared_ptr so the returned closure owns everything it touches.
struct EscapeEvaluator {
    TorusField X, Xp;
    PiecewiseProfiles profs;
    FlowStructure fs;
    double floor_m = 0.0;
    double t_clip = 0.0;
    double s = 0.0;  // phi smoothing parameter sigma/10
    double rtol = 1e-9;

    double bracket_k(double x) const {
        return X.eval_real(x) * profs.k_derivative(x) - Xp.eval_real(x) * profs.k_value(x);
    }

    double m_tilde(double x) const {
        const size_t n = profs.centers.size();
        const double xi = wrap_2pi(x);
        for (size_t i = 0; i < n; ++i)
            if (circle_dist(xi, profs.centers[i]) <= profs.radii[i])
                return std::max(bracket_k(xi), floor_m);
        for (size_t i = 0; i < n; ++i) {
            const size_t j = (i + 1) % n;
            double R = profs.centers[i] + profs.radii[i];
            double L = profs.centers[j] - profs.radii[j];
            while (L < R) L += kTwoPi;
            double xx = xi;
            while (xx < R) xx += kTwoPi;
            if (xx <= L) {
                const double gL = std::max(bracket_k(R), floor_m);
                const double gR = std::max(bracket_k(L), floor_m);
                const double u = (xx - R) / (L - R);
                double v = floor_m;
                if (u < 0.25)
                    v += (gL - floor_m) * 0.5 * (1.0 + std::cos(M_PI * u / 0.25));
                if (u > 0.75)
                    v += (gR - floor_m) * 0.5 * (1.0 + std::cos(M_PI * (1.0 - u) / 0.25));
                return std::max(v, floor_m);
            }
        }
        return floor_m;
    }

    // stabilized escape integral from (x, 1): -int m xi + xi k at entry into U(side)
    double ell(double x, int side) const {
        const auto& zs = side > 0 ? fs.K_plus : fs.K_minus;
        const auto& rs = side > 0 ? fs.radius_plus : fs.radius_minus;
        auto gap = [&](double xx) {
            double best = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < zs.size(); ++i)
                best = std::min(best, circle_dist(xx, zs[i].location) - rs[i]);
            return best;
        };
        if (gap(x) <= 0.0) return profs.k_value(x);  // entry time 0: ell = k

        OdeOptions oopts;
        oopts.rtol = rtol;
        oopts.atol = rtol * 1e-2;
        oopts.max_step = 0.5;
        OdeRhs flow3 = [this](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            dy(0) = X.eval_real(y(0));
            dy(1) = -y(1) * Xp.eval_real(y(0));
            dy(2) = m_tilde(y(0)) * y(1);
        };
        Eigen::VectorXd y0(3);
        y0 << x, 1.0, 0.0;
        auto ev = ode_solve_until(
            flow3, y0, 0.0, side > 0 ? +1.0 : -1.0,
            [&](const Eigen::VectorXd& y) { return gap(y(0)); }, t_clip, oopts);
        // past entry (or at the clip, where xi has decayed) the argument of the
        // stabilized limit is constant
        return -ev.y(2) + ev.y(1) * profs.k_value(ev.y(0));
    }

    double eta_of(double t_tilde) const {
        if (std::isinf(t_tilde)) return t_tilde > 0 ? 1.0 : 0.0;
        return phi_sigma(s, std::clamp(t_tilde, -t_clip, t_clip));
    }

    double value(double x) const {
        const double tt = transit_time(fs, X, x, rtol);
        if (std::isinf(tt)) return profs.k_value(x);  // the glued function equals k here
        const double eta = eta_of(tt);
        const double lp = eta > 0.0 ? ell(x, +1) : 0.0;
        const double lm = eta < 1.0 ? ell(x, -1) : 0.0;
        return eta * lp + (1.0 - eta) * lm;
    }
};

}  // namespace

EscapeVerification verify_escape(const TorusField& atilde, const TorusField& X,
                                 int grid_size) {
    EscapeVerification out;
    const int n = std::max(grid_size, 16 * std::max(atilde.K, 1));
    const TorusField ap = derivative(atilde);
    const TorusField Xp = derivative(X);
    Eigen::VectorXd xv = Eigen::VectorXd::LinSpaced(n, 0.0, kTwoPi * (n - 1) / n);
    Eigen::VectorXd av = to_samples(atilde, n).real();
    Eigen::VectorXd apv = to_samples(ap, n).real();
    Eigen::VectorXd Xv = to_samples(X, n).real();
    Eigen::VectorXd Xpv = to_samples(Xp, n).real();
    out.grid_x = xv;
    out.atilde_values = av;
    out.bracket = Xv.cwiseProduct(apv) - Xpv.cwiseProduct(av);
    out.delta = out.bracket.minCoeff();

    // maximal interval union where atilde <= -1/2
    std::vector<bool> in(n);
    for (int j = 0; j < n; ++j) in[j] = av(j) <= -0.5;
    int start = -1;
    for (int j = 0; j < n; ++j)
        if (!in[j]) {
            start = j;
            break;
        }
    if (start < 0) {
        out.W_region.parts.push_back({0.0, kTwoPi});
    } else {
        int cnt = 0;
        while (cnt < n) {
            const int idx = (start + cnt) % n;
            if (in[idx]) {
                int run = 0;
                while (run < n && in[(start + cnt + run) % n]) ++run;
                const double lo = xv(idx);
                out.W_region.parts.push_back({lo, lo + kTwoPi * (run - 1) / n});
                cnt += run;
            } else {
                ++cnt;
            }
        }
    }
    return out;
}

EscapeFunction build_escape(const TorusField& X, double sigma, const EscapeOptions& opts) {
    if (!(sigma > 0.0))
        throw EscapeConstructionFailed("build_escape: sigma must be positive", 0.0);

    auto ev = std::make_shared<EscapeEvaluator>();
    ev->X = X;
    ev->Xp = derivative(X);
    ev->fs = analyze_flow(X);
    const double nu = ev->fs.nu;
    const double delta_local = nu / 2.0;  // bracket floor on U+- from the radii rule
    ev->floor_m = delta_local / 2.0;
    ev->t_clip = opts.t_clip_factor / nu;
    ev->s = sigma / 10.0;
    ev->rtol = opts.ode_rtol;

    {
        struct Z {
            double c, r, v;
        };
        std::vector<Z> all;
        for (size_t i = 0; i < ev->fs.K_plus.size(); ++i)
            all.push_back({ev->fs.K_plus[i].location, ev->fs.radius_plus[i], +1.0});
        for (size_t i = 0; i < ev->fs.K_minus.size(); ++i)
            all.push_back({ev->fs.K_minus[i].location, ev->fs.radius_minus[i], -1.0});
        std::sort(all.begin(), all.end(), [](const Z& a, const Z& b) { return a.c < b.c; });
        for (const auto& z : all) {
            ev->profs.centers.push_back(z.c);
            ev->profs.radii.push_back(z.r);
            ev->profs.values.push_back(z.v);
        }
    }

    EscapeFunction E;
    E.sigma = sigma;
    E.flow = ev->fs;
    E.nu = nu;

    const int n = opts.grid_size;
    E.grid_x = Eigen::VectorXd::LinSpaced(n, 0.0, kTwoPi * (n - 1) / n);
    E.k_profile.resize(n);
    E.m_profile.resize(n);
    E.ell_plus.resize(n);
    E.ell_minus.resize(n);
    E.eta.resize(n);
    E.t_tilde.resize(n);
    Eigen::VectorXd avals(n);
    double Cmax = 0.0, eta_der = 0.0;
    for (int j = 0; j < n; ++j) {
        const double x = E.grid_x(j);
        E.k_profile(j) = ev->profs.k_value(x);
        E.m_profile(j) = ev->m_tilde(x);
        E.ell_plus(j) = ev->ell(x, +1);
        E.ell_minus(j) = ev->ell(x, -1);
        const double tt = transit_time(ev->fs, X, x, opts.ode_rtol);
        E.t_tilde(j) = tt;
        const double eta = ev->eta_of(tt);
        E.eta(j) = eta;
        if (!std::isinf(tt))
            eta_der = std::max(eta_der, std::abs(phi_sigma_derivative(
                                            ev->s, std::clamp(tt, -ev->t_clip, ev->t_clip))));
        avals(j) = eta * E.ell_plus(j) + (1.0 - eta) * E.ell_minus(j);
        Cmax = std::max(Cmax, std::abs(E.ell_plus(j) - E.ell_minus(j)));
    }
    E.ell_difference_bound = Cmax;
    E.eta_derivative_bound = eta_der;
    if (Cmax > 0.0 && sigma >= delta_local / (4.0 * Cmax))
        throw EscapeConstructionFailed(
            "build_escape: sigma exceeds delta/(4C), C = " + std::to_string(Cmax), 0.0);

    const int Kp = std::min(opts.profile_cutoff, (n - 1) / 2);
    E.atilde = field_from_samples(avals.cast<Complex>(), Kp);
    E.atilde.symmetrize_real();

    EscapeVerification ver = verify_escape(E.atilde, X, n);
    E.delta_verified = ver.delta;
    E.W_region = ver.W_region;
    if (E.delta_verified <= 0.0) {
        int argmin = 0;
        ver.bracket.minCoeff(&argmin);
        throw EscapeConstructionFailed("build_escape: verification margin non-positive",
                                       ver.grid_x(argmin));
    }

    E.profile_at = [ev](double x) { return ev->value(x); };
    E.ell_plus_at = [ev](double x) { return ev->ell(x, +1); };
    E.ell_minus_at = [ev](double x) { return ev->ell(x, -1); };
    E.m_tilde_at = [ev](double x) { return ev->m_tilde(x); };
    return E;
}

}  // namespace rtl
