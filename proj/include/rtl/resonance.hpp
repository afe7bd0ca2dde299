#ifndef RTL_RESONANCE_HPP
#define RTL_RESONANCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rtl/spectral.hpp"

// Resonant average <V>_m, the stable/unstable/degenerate trichotomy of the
// averaged vector field, zero finding with Newton refinement, and the
// constant-shift repair that moves a degenerate field to a non-degenerate
// one at sup-distance < epsilon_bar.

namespace rtl {

struct ZeroRecord {
    double location = 0.0;             // x0 in [0, 2pi)
    double slope = 0.0;                // X'(x0)
    double refinement_residual = 0.0;  // |X(x0)| after Newton
    bool from_sign_change = true;      // false: near-tangency candidate
};

enum class Verdict { Stable, Unstable, Degenerate };
std::string to_string(Verdict v);

struct Tolerances {
    double zero_tol = 1e-10;       // |X(x0)| after refinement / tangency detection
    double degeneracy_tol = 1e-6;  // |slope| below this is degenerate
    double stable_margin = 1e-8;   // min |X| above this counts as zero-free
    double resonance_tol = 1e-10;  // relative non-resonant mass for complete resonance
};

struct ClassificationReport {
    Verdict verdict = Verdict::Degenerate;
    std::vector<ZeroRecord> zeros;
    double min_abs_value = 0.0;
    double nu = 0.0;  // min over non-degenerate zeros of |slope|
    Tolerances tolerances;
    int truncated_resonant_modes = 0;  // modes with |mk| > K_t dropped by the average
};

// w_k = v_{k, mk}; resonant modes outside the time cutoff are dropped and
// counted in *truncated_modes. Throws InvalidFrequency for m <= 0.
TorusField resonant_average(const SpaceTimeField& V, int m,
                            int* truncated_modes = nullptr);

// Lift g(x) to the completely resonant field g(x + mt); needs K_t >= m*K_x
// to be exact, excess modes are dropped.
SpaceTimeField lift_resonant(const TorusField& g, int m, int K_x, int K_t);

bool is_completely_resonant(const SpaceTimeField& V, int m,
                            double resonance_tol = 1e-10);

// All zeros of X on [0, 2pi): sign changes on a scan grid of >= 16 K points,
// Newton-refined; near-tangency candidates (critical points with tiny |X|)
// are reported with their (near-zero) slope and from_sign_change = false.
std::vector<ZeroRecord> find_zeros(const TorusField& X,
                                   const Tolerances& tol = {});

ClassificationReport classify(const SpaceTimeField& V, int m,
                              const Tolerances& tol = {});

// Shift V by a regular value eps0 of <V>_m sampled uniformly from
// [-eps_budget, eps_budget] until the classification is non-degenerate
// (Sard step). Returns V unchanged when already non-degenerate.
SpaceTimeField regularize(const SpaceTimeField& V, int m, double eps_budget,
                          std::uint64_t seed = 12345, int max_attempts = 64,
                          double* chosen_shift = nullptr);

}  // namespace rtl

#endif
