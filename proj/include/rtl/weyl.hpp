#ifndef RTL_WEYL_HPP
#define RTL_WEYL_HPP

#include <vector>

#include "rtl/classical_dynamics.hpp"
#include "rtl/spectral.hpp"

// Weyl quantization on truncated mode space. For the structured symbols of
// this project, a(x, xi) = sum_n c_n(xi) e^{inx}, the quantization acts on
// Fourier coefficients as M[k][j] = c_{k-j}((k+j)/2): the midpoint rule
// applied at half-integers, exact for the continuous formula.

namespace rtl {

enum class RadialKind {
    Constant,   // c
    Linear,     // c * xi
    AbsCut,     // c * |xi| (1-chi)(xi)
    ProfileAbsCut,  // same radial factor, tagging a profile-weighted term
};

struct SymbolTerm {
    int n = 0;              // x-frequency
    RadialKind kind = RadialKind::Constant;
    Complex coeff{0.0, 0.0};
};

struct SymbolRep {
    std::vector<SymbolTerm> terms;
    bool is_real = false;

    SymbolRep scaled(Complex factor) const;
};

// The fixed fiber cutoff: 1 for |xi| <= 1/2, 0 for |xi| >= 1, C^2 monotone
// quintic blend in between.
double chi_cutoff(double xi);

Complex radial_value(const SymbolTerm& term, double midpoint);

struct WeylMatrix {
    Eigen::MatrixXcd entries;  // (2K+1)^2, row k+K, col j+K
    int K = 0;
    std::string provenance;
};

WeylMatrix weyl_matrix(const SymbolRep& a, int K);

// Generator of transport: Op^w(i xi w) for w given by 1D x-coefficients;
// shared with the integrator so tests can cross-check the two paths.
WeylMatrix weyl_transport_generator(const TorusField& w, int K);

Complex quadratic_form(const WeylMatrix& M, const StateVector& u);

struct CommutatorReport {
    double max_discrepancy = 0.0;  // on the central block |k|, |j| <= K/2
    int block_halfwidth = 0;
};

// i[Op(f), Op(g)] vs Op({f, g}); exact for symbols affine in xi.
CommutatorReport commutator_check(const SymbolRep& f, const SymbolRep& g, int K);

// Poisson bracket restricted to xi-affine symbols.
SymbolRep poisson_bracket_affine(const SymbolRep& f, const SymbolRep& g);

// Symbol iota: (1-chi)(xi) |xi| atilde_profile(x) from a verified escape function.
std::pair<SymbolRep, WeylMatrix> build_atilde(const EscapeFunction& E, int K);
std::pair<SymbolRep, WeylMatrix> build_atilde_profile(const TorusField& profile, int K);

// Normalized wavepacket chi_3(x) e^{i xi0 x} / ||chi_3||, with chi_3 a cosine
// taper whose flat core occupies the middle half of the widest W component.
StateVector build_initial_datum(const IntervalUnion& W_region, int xi0, int K);

}  // namespace rtl

#endif
