#ifndef RTL_NORMAL_FORM_HPP
#define RTL_NORMAL_FORM_HPP

#include <optional>
#include <vector>

#include "rtl/resonance.hpp"
#include "rtl/spectral.hpp"

// Conjugation machinery: the homological equation solved exactly in Fourier
// modes, unitary diffeomorphism transforms u -> (1+beta_x)^{1/2} u(x+beta),
// the exact pushforward of transport coefficients, the order-N resonant
// normal form, and the reduction of a zero-free averaged field to a
// constant transport speed.

namespace rtl {

struct DiffeoTransform {
    SpaceTimeField beta;        // displacement, scaling already folded in
    SpaceTimeField beta_tilde;  // inverse displacement
    double invertibility_margin = 0.0;    // min over grid of 1 + beta_x
    double composition_residual = 0.0;    // max |bt(y) + beta(y + bt(y))|
};

struct FixedPointOptions {
    int max_iter = 200;
    double tol = 1e-13;
    double margin_threshold = 0.1;  // reject diffeos with min(1+beta_x) below this
};

// beta_{k,l} = w_{k,l} / (i(l - km)) off the resonant set, 0 on it, so that
// W + m beta_x - beta_t = <W>_m(x + mt) exactly at the represented modes.
SpaceTimeField solve_homological(const SpaceTimeField& W, int m);

// Damped fixed-point solution of bt(y) = -beta(t, y + bt(y)) per grid node,
// re-spectralized at an enlarged cutoff.
SpaceTimeField invert_diffeo(const SpaceTimeField& beta,
                             const FixedPointOptions& opts = {});

DiffeoTransform make_transform(const SpaceTimeField& beta,
                               const FixedPointOptions& opts = {});

enum class Direction { Forward, Inverse };

// Forward: (1 + beta_x)^{1/2} (u o phi) at time t, evaluated on an
// oversampled grid and resampled at the state's cutoff. Unitary on L^2.
StateVector apply_transform(const DiffeoTransform& T, double t, const StateVector& u,
                            Direction dir);

// Exact conjugated transport coefficient
//   w'(t,x) = [w (1 + beta_x)](t, phi^{-1}(x)) - beta_t(t, phi^{-1}(x)),
// no Taylor truncation; output at the input cutoffs.
SpaceTimeField pushforward_coefficient(const SpaceTimeField& w, const DiffeoTransform& T);

struct NormalFormChain {
    int m = 1;
    double epsilon = 0.0;
    std::vector<DiffeoTransform> steps;
    bool translation_applied = true;  // the x -> x - mt frame change
    std::optional<TorusField> lambda;        // constant-coefficient conjugation
    std::optional<TorusField> lambda_tilde;
    std::optional<double> m_hat;
    std::vector<SpaceTimeField> coefficient_history;  // w after each step
    TorusField resonant_avg;   // <V>_m
    TorusField Z;              // accumulated resonant correction (the eps^2 ledger)
    SpaceTimeField W_rem;      // residual with the eps^{N+1} factor divided out
    double remainder_norm = 0.0;  // L^2(T^2) norm of the un-rescaled residual
};

// N conjugation steps plus the moving-frame translation; the final
// coefficient decomposes as eps <V>_m(x) + eps^2 Z(x) + remainder with
// the remainder of size O(eps^{N+1}).
NormalFormChain normal_form_reduce(const SpaceTimeField& V, int m, double eps, int N,
                                   const FixedPointOptions& opts = {});

// Full state transport through the chain. Forward maps the normal-form frame
// to the original frame (Phi_1 o ... o Phi_N o T_m^{-1}).
StateVector apply_chain(const NormalFormChain& chain, double t, const StateVector& u,
                        Direction dir);

struct ConstantCoefficientReduction {
    double m_hat = 0.0;
    TorusField lambda;
    TorusField lambda_tilde;
    double flatness_residual = 0.0;  // max |(1+lambda')(X o (id+lt)) ... - m_hat|
};

// m_hat = 2pi / int dx / X_eff, lambda_k = f_k/(ik) with f = m_hat/X_eff - 1.
// Throws NotResonantlyStable when X_eff vanishes.
ConstantCoefficientReduction constant_coefficient_reduce(const TorusField& X_eff,
                                                         double stable_margin = 1e-8);

// The time-independent transform Lambda as a DiffeoTransform (K_t = 0).
DiffeoTransform lambda_transform(const ConstantCoefficientReduction& red);

}  // namespace rtl

#endif
