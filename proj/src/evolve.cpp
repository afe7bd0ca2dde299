#include "rtl/evolve.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <future>

namespace rtl {
namespace {

using SpMat = Eigen::SparseMatrix<Complex>;

double default_cayley_dt(const SpaceTimeField& w_var, double m_const, int K) {
    const double wmax = l2_norm(w_var) > 0.0 ? sup_norm_estimate(w_var) : 0.0;
    return 0.01 / (std::abs(m_const) + K * wmax + 1e-12);
}

// 1D coefficients of the translated symbol w_var(t, x - m t) at fixed t
Eigen::VectorXcd translated_slice(const SpaceTimeField& w, double m_const, double t) {
    const TorusField wt = w.slice_time(t);
    Eigen::VectorXcd c = wt.coeffs;
    for (int k = -w.K_x; k <= w.K_x; ++k)
        c(k + w.K_x) *= std::polar(1.0, -static_cast<double>(k) * m_const * t);
    return c;
}

// resonant rows only <=> the translated symbol is time independent
bool translated_autonomous(const SpaceTimeField& w, double m_const) {
    const double mr = std::round(m_const);
    if (std::abs(m_const - mr) > 1e-12) {
        // non-integer frame speed: autonomous only if w is time independent
        // and spatially constant apart from the (0,0) mode
        double off = 0.0, total = 0.0;
        for (int k = -w.K_x; k <= w.K_x; ++k)
            for (int l = -w.K_t; l <= w.K_t; ++l) {
                total += std::norm(w.c(k, l));
                if (k != 0 || l != 0) off += std::norm(w.c(k, l));
            }
        return total == 0.0 || off <= 1e-28 * total;
    }
    const long m = static_cast<long>(mr);
    double off = 0.0, total = 0.0;
    for (int k = -w.K_x; k <= w.K_x; ++k)
        for (int l = -w.K_t; l <= w.K_t; ++l) {
            total += std::norm(w.c(k, l));
            if (l != m * k) off += std::norm(w.c(k, l));
        }
    return total == 0.0 || off <= 1e-28 * total;
}

void assemble_cayley(const Eigen::VectorXcd& c, int W, int K, double dt, SpMat& A,
                     SpMat& B) {
    std::vector<Eigen::Triplet<Complex>> ta, tb;
    ta.reserve(static_cast<size_t>(2 * K + 1) * (2 * W + 1));
    tb.reserve(ta.capacity());
    for (int k = -K; k <= K; ++k) {
        for (int n = -W; n <= W; ++n) {
            const int j = k - n;
            if (j < -K || j > K) continue;
            const Complex g =
                Complex(0.0, 0.5 * (k + j)) * c(n + W);  // i * midpoint * c_n
            Complex a = -0.5 * dt * g;
            Complex b = 0.5 * dt * g;
            if (n == 0) {
                a += Complex{1.0, 0.0};
                b += Complex{1.0, 0.0};
            }
            ta.emplace_back(k + K, j + K, a);
            tb.emplace_back(k + K, j + K, b);
        }
    }
    A.resize(2 * K + 1, 2 * K + 1);
    B.resize(2 * K + 1, 2 * K + 1);
    A.setFromTriplets(ta.begin(), ta.end());
    B.setFromTriplets(tb.begin(), tb.end());
}

}  // namespace

Trajectory integrate(const SpaceTimeField& w_var, double m_const, const StateVector& u0,
                     double T, int K, const IntegrateOptions& opts) {
    if (T <= 0.0) throw StepFailure("integrate: horizon must be positive");
    if (u0.K != K) throw DimensionError("integrate: state cutoff mismatch");
    if (2 * w_var.K_x > K)
        throw InvalidGrid("integrate: coefficient bandwidth exceeds K/2");

    Trajectory traj;
    traj.K = K;
    traj.m_const = m_const;
    double dt = opts.dt > 0.0 ? opts.dt : default_cayley_dt(w_var, m_const, K);
    const long steps = std::max<long>(1, std::lround(std::ceil(T / dt)));
    dt = T / static_cast<double>(steps);
    traj.dt = dt;
    traj.autonomous_frame = translated_autonomous(w_var, m_const);

    const int W = w_var.K_x;
    const long stride = std::max<long>(1, std::lround(opts.sample_dt / dt));

    Eigen::VectorXcd v = u0.coeffs;
    const double l2_0 = v.norm();

    SpMat A, B;
    Eigen::SparseLU<SpMat> lu;
    if (traj.autonomous_frame) {
        // time-independent translated symbol: the resonant extraction
        // c_n = w_{n, m n} (or the t-slice at t = 0 in the general case)
        assemble_cayley(translated_slice(w_var, m_const, 0.0), W, K, dt, A, B);
        lu.compute(A);
        if (lu.info() != Eigen::Success)
            throw StepFailure("integrate: factorization failed");
    }

    auto record = [&](long nstep) {
        const double t = nstep * dt;
        traj.times.push_back(t);
        for (double s : opts.s_list) {
            StateVector tmp(K, t);
            tmp.coeffs = v;  // norms are frame invariant
            traj.norm_series[s].push_back(sobolev_norm(tmp, s));
        }
        if (opts.store_states) {
            StateVector u(K, t);
            Eigen::VectorXcd ph = unit_powers(m_const * t, 2 * K + 1);
            const Complex base = std::polar(1.0, -m_const * t * K);
            u.coeffs = v.cwiseProduct(ph * base);  // u_k = v_k e^{ikmt}
            traj.states.push_back(std::move(u));
        }
        traj.l2_drift = std::max(traj.l2_drift, std::abs(v.norm() - l2_0) / l2_0);
    };

    record(0);
    Eigen::VectorXcd rhs(v.size());
    for (long n = 0; n < steps; ++n) {
        if (!traj.autonomous_frame) {
            const double t_mid = (n + 0.5) * dt;
            assemble_cayley(translated_slice(w_var, m_const, t_mid), W, K, dt, A, B);
            lu.compute(A);
            if (lu.info() != Eigen::Success)
                throw StepFailure("integrate: factorization failed at t=" +
                                  std::to_string(t_mid));
        }
        rhs.noalias() = B * v;
        v = lu.solve(rhs);
        if (lu.info() != Eigen::Success)
            throw StepFailure("integrate: linear solve failed");
        if ((n + 1) % stride == 0 || n + 1 == steps) record(n + 1);
    }
    return traj;
}

Eigen::VectorXcd integrate_characteristics(const SpaceTimeField& w_var, double m_const,
                                           const StateVector& u0, double t, int n_points,
                                           double rtol) {
    const SpaceTimeField wx = derivative_x(w_var);
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-2;
    OdeRhs f = [&](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy(0) = -(m_const + w_var.eval_real(s, y(0)));
        dy(1) = 0.5 * wx.eval_real(s, y(0));
    };
    Eigen::VectorXcd out(n_points);
    for (int a = 0; a < n_points; ++a) {
        Eigen::VectorXd y0(2);
        y0 << kTwoPi * a / n_points, 0.0;
        Eigen::VectorXd y = ode_solve(f, y0, t, 0.0, opts);
        out(a) = u0.eval(y(0)) * std::exp(-y(1));
    }
    return out;
}

GrowthFit fit_growth_rate(const std::vector<double>& times,
                          const std::vector<double>& values, double t0, double t1) {
    if (times.size() != values.size())
        throw DimensionError("fit_growth_rate: series length mismatch");
    double st = 0, sy = 0, stt = 0, sty = 0;
    long n = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0 || times[i] > t1) continue;
        if (!(values[i] > 0.0))
            throw InvalidSeries("fit_growth_rate: nonpositive series entry");
        const double y = std::log(values[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
        ++n;
    }
    if (n < 2) throw InvalidSeries("fit_growth_rate: window holds fewer than 2 samples");
    const double denom = n * stt - st * st;
    GrowthFit fit;
    fit.gamma = denom != 0.0 ? (n * sty - st * sy) / denom : 0.0;
    // r^2 against the fitted line
    const double intercept = (sy - fit.gamma * st) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0 || times[i] > t1) continue;
        const double y = std::log(values[i]);
        ss_res += std::pow(y - (intercept + fit.gamma * times[i]), 2);
        ss_tot += std::pow(y - ybar, 2);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace {

SpaceTimeField scaled_field(const SpaceTimeField& V, double factor) {
    SpaceTimeField out = V;
    out.coeffs *= factor;
    return out;
}

double stable_datum_center(const TorusField& X_eff, double m_hat) {
    // place the packet where the transport speed equals the reduced constant,
    // balancing the frequency stretch over the orbit
    const int n = 4096;
    double best = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (int j = 0; j < n; ++j) {
        const double x = kTwoPi * j / n;
        const double d = std::abs(X_eff.eval_real(x) - m_hat);
        if (d < best) {
            best = d;
            arg = x;
        }
    }
    return arg;
}

}  // namespace

StabilityReport stability_experiment(const SpaceTimeField& V, int m, double eps, int N,
                                     const std::vector<double>& s_list,
                                     double horizon_factor, const ExperimentOptions& opts) {
    const ClassificationReport rep = classify(V, m);
    if (rep.verdict != Verdict::Stable)
        throw WrongRegime("stability_experiment: classification is " +
                          to_string(rep.verdict));

    StabilityReport out;
    out.epsilon = eps;
    out.N = N;
    out.horizon = horizon_factor * std::pow(eps, -(N + 1));

    NormalFormChain chain = normal_form_reduce(V, m, eps, N);
    TorusField X_eff = chain.resonant_avg;
    for (int k = -X_eff.K; k <= X_eff.K; ++k) X_eff.c(k) += eps * chain.Z.c(k);
    X_eff.symmetrize_real();
    ConstantCoefficientReduction red = constant_coefficient_reduce(X_eff);
    out.m_hat = red.m_hat;
    out.flatness_residual = red.flatness_residual;

    // reduced coefficient in the Lambda frame:
    // omega = eps X_eff + eps^{N+1} W_rem, pushed through Lambda
    SpaceTimeField omega(chain.W_rem.K_x, chain.W_rem.K_t, true);
    omega.coeffs = chain.W_rem.coeffs * std::pow(eps, N + 1);
    for (int k = -X_eff.K; k <= X_eff.K; ++k)
        omega.c(k, 0) += eps * X_eff.c(k);
    const DiffeoTransform T_l = lambda_transform(red);
    SpaceTimeField w_red = pushforward_coefficient(omega, T_l);
    const double m_red = w_red.c(0, 0).real();
    SpaceTimeField w_red_var = w_red;
    w_red_var.c(0, 0) = Complex{0.0, 0.0};

    // datum
    IntervalUnion seat;
    const double xc = stable_datum_center(X_eff, red.m_hat);
    seat.parts.push_back({xc - 0.5, xc + 0.5});
    StateVector u0 = build_initial_datum(seat, opts.xi0, opts.K);

    IntegrateOptions io;
    io.dt = opts.dt;
    io.sample_dt = opts.sample_dt;
    io.s_list = s_list;
    io.store_states = false;

    Trajectory traj = integrate(scaled_field(V, eps), m, u0, out.horizon, opts.K, io);
    out.times = traj.times;
    out.norm_series = traj.norm_series;
    for (double s : s_list) {
        const auto& series = traj.norm_series.at(s);
        out.sup_ratio[s] = *std::max_element(series.begin(), series.end()) / series.front();
    }

    // reduced equation from the transformed datum
    StateVector uN0 = apply_chain(chain, 0.0, u0, Direction::Inverse);
    StateVector v0 = apply_transform(T_l, 0.0, uN0, Direction::Inverse);
    Trajectory rtraj = integrate(w_red_var, m_red, v0, out.horizon, opts.K, io);
    double smax = 0.0;
    for (double s : s_list) {
        const auto& series = rtraj.norm_series.at(s);
        out.reduced_sup_ratio[s] =
            *std::max_element(series.begin(), series.end()) / series.front();
        smax = std::max(smax, s);
    }
    out.reduced_drift_rate = (out.reduced_sup_ratio[smax] - 1.0) / out.horizon;
    return out;
}

GrowthReport instability_experiment(const SpaceTimeField& V, int m, double eps, double s,
                                    double T, int xi0, const ExperimentOptions& opts) {
    const ClassificationReport rep = classify(V, m);
    if (rep.verdict != Verdict::Unstable)
        throw WrongRegime("instability_experiment: classification is " +
                          to_string(rep.verdict));

    GrowthReport out;
    out.s = s;
    out.epsilon = eps;

    const TorusField X = resonant_average(V, m);
    EscapeFunction E = build_escape(X, opts.sigma);
    out.escape_margin = E.delta_verified;
    NormalFormChain chain = normal_form_reduce(V, m, eps, 1);

    const int K = opts.K;
    StateVector u10 = build_initial_datum(E.W_region, xi0, K);
    StateVector u0 = apply_chain(chain, 0.0, u10, Direction::Forward);

    IntegrateOptions io;
    io.dt = opts.dt;
    io.sample_dt = opts.sample_dt;
    io.s_list = {0.0, s};
    io.store_states = true;
    Trajectory traj = integrate(scaled_field(V, eps), m, u0, T, K, io);

    out.times = traj.times;
    out.norm_values = traj.norm_series.at(s);

    // predicted rate: the characteristic flow dx/dt = -eps X attracts the
    // packet to the K^- zero seated in its W component, where xi stretches
    // like e^{eps |X'| t}
    double wbest = -1.0, wcenter = 0.0;
    for (const auto& p : E.W_region.parts)
        if (p.hi - p.lo > wbest) {
            wbest = p.hi - p.lo;
            wcenter = 0.5 * (p.lo + p.hi);
        }
    double slope_star = 0.0, dbest = std::numeric_limits<double>::infinity();
    for (const auto& z : E.flow.K_minus) {
        double d = std::abs(z.location - wcenter);
        d = std::min(d, kTwoPi - d);
        if (d < dbest) {
            dbest = d;
            slope_star = std::abs(z.slope);
        }
    }
    out.predicted_rate = eps * s * slope_star;

    // saturation: the packet center reaches K/3 and truncation takes over
    out.saturation_time = T;
    for (size_t i = 0; i < traj.states.size(); ++i) {
        if (center_frequency(traj.states[i]) >= K / 3.0) {
            out.saturation_time = traj.times[i];
            break;
        }
    }
    out.fit_t0 = 5.0 / (eps * E.nu);
    out.fit_t1 = std::min(out.saturation_time, T);
    GrowthFit fit = fit_growth_rate(traj.times, out.norm_values, out.fit_t0, out.fit_t1);
    out.gamma_fit = fit.gamma;
    out.r_squared = fit.r_squared;

    // delta1: measured lower-envelope constant over the fit window
    double d1 = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t < out.fit_t0 || t > out.fit_t1) continue;
        d1 = std::min(d1, out.norm_values[i] /
                              (out.norm_values.front() * std::exp(out.gamma_fit * t)));
    }
    out.delta1 = std::isfinite(d1) ? d1 : 0.0;

    // virial series A(t) = <Op^w(-atilde) u1, u1> on the normal-form image
    auto [sym, M] = build_atilde_profile(E.atilde, K);
    WeylMatrix Mneg = M;
    Mneg.entries *= Complex{-1.0, 0.0};
    out.virial_values.resize(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) {
        StateVector u1 = apply_chain(chain, traj.times[i], traj.states[i],
                                     Direction::Inverse);
        out.virial_values[i] = quadratic_form(Mneg, u1).real();
    }

    // calibrate (delta2, beta) on the early fifth of the pre-saturation
    // window, then verify the discrete inequality on all of it
    std::vector<size_t> idx;
    for (size_t i = 1; i + 1 < traj.times.size(); ++i)
        if (traj.times[i + 1] <= out.fit_t1) idx.push_back(i);
    const double u0l2 = std::pow(l2_norm(u0), 2);
    double gammaA = out.gamma_fit;
    {
        std::vector<double> ts, as;
        for (size_t i : idx)
            if (out.virial_values[i] > 0.0) {
                ts.push_back(traj.times[i]);
                as.push_back(out.virial_values[i]);
            }
        if (ts.size() >= 2) {
            try {
                gammaA = fit_growth_rate(ts, as, out.fit_t0, out.fit_t1).gamma;
            } catch (const InvalidSeries&) {
            }
        }
    }
    out.delta2 = 0.8 * gammaA / eps;
    auto a_dot = [&](size_t i) {
        return (out.virial_values[i + 1] - out.virial_values[i - 1]) /
               (traj.times[i + 1] - traj.times[i - 1]);
    };
    double beta = 0.0;
    const size_t ncal = std::max<size_t>(1, idx.size() / 5);
    for (size_t q = 0; q < ncal && q < idx.size(); ++q) {
        const size_t i = idx[q];
        beta = std::max(beta, (eps * out.delta2 * out.virial_values[i] - a_dot(i)) /
                                  (eps * u0l2));
    }
    out.beta_calibrated = beta * 1.05 + 1e-9;
    long ok = 0;
    for (size_t i : idx)
        if (a_dot(i) >= eps * (out.delta2 * out.virial_values[i] -
                               out.beta_calibrated * u0l2) -
                            1e-12)
            ++ok;
    out.virial_satisfied_fraction = idx.empty() ? 0.0 : double(ok) / double(idx.size());
    return out;
}

DichotomyReport dichotomy_experiment(const SpaceTimeField& V_stable,
                                     const SpaceTimeField& V_unstable, int m, double eps,
                                     double s, double T, const ExperimentOptions& opts,
                                     int jobs) {
    // identical solver settings: pin dt from the unstable coefficient
    ExperimentOptions shared = opts;
    if (shared.dt <= 0.0)
        shared.dt = default_cayley_dt(scaled_field(V_unstable, eps), m, opts.K);

    auto run_unstable = [&]() {
        return instability_experiment(V_unstable, m, eps, s, T, shared.xi0, shared);
    };
    auto run_stable = [&]() {
        const TorusField Xs = resonant_average(V_stable, m);
        ConstantCoefficientReduction red = constant_coefficient_reduce(Xs);
        IntervalUnion seat;
        const double xc = stable_datum_center(Xs, red.m_hat);
        seat.parts.push_back({xc - 0.5, xc + 0.5});
        StateVector u0 = build_initial_datum(seat, shared.xi0, shared.K);
        IntegrateOptions io;
        io.dt = shared.dt;
        io.sample_dt = shared.sample_dt;
        io.s_list = {s};
        io.store_states = false;
        return integrate(scaled_field(V_stable, eps), m, u0, T, shared.K, io);
    };

    DichotomyReport out;
    if (jobs > 1) {
        auto fu = std::async(std::launch::async, run_unstable);
        Trajectory straj = run_stable();
        out.unstable = fu.get();
        out.stable_times = straj.times;
        out.stable_norms = straj.norm_series.at(s);
    } else {
        out.unstable = run_unstable();
        Trajectory straj = run_stable();
        out.stable_times = straj.times;
        out.stable_norms = straj.norm_series.at(s);
    }
    out.stable_fit_t0 = std::min(10.0, T / 10.0);
    out.stable_fit_t1 = T;
    GrowthFit sf = fit_growth_rate(out.stable_times, out.stable_norms, out.stable_fit_t0,
                                   out.stable_fit_t1);
    out.gamma_stable = sf.gamma;
    out.ratio = out.unstable.gamma_fit != 0.0
                    ? std::abs(out.gamma_stable) / out.unstable.gamma_fit
                    : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace rtl
