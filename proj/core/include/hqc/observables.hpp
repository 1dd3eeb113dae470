#pragma once

#include <vector>

#include "hqc/eigen.hpp"
#include "hqc/lattice.hpp"

namespace hqc {

struct ObservableRecord {
    double ipr_full = 0.0;
    double ipr_edge = 0.0;
    double tau = 0.0;
    double beta_min_edge = 0.0;
    double fidelity = 1.0;
    double gap = 0.0;
    double dEg_dh = 0.0;
    double max_abs_im = 0.0;
    double max_abs_im_edge = 0.0;
    double edge_density = 0.0;
    int npt = 0;
    int n_im_zeros = 0;
    double eg_re = 0.0;
    double eg_im = 0.0;
};

// Sum |psi|^4 / (sum |psi|^2)^2 over the whole vector or over a support.
double ipr(const CVector& state);
double ipr(const CVector& state, const std::vector<int>& support);

struct FractalFit {
    double tau = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
// tau = -slope of log(IPR) against log(L). Sizes must be strictly increasing.
FractalFit fractal_dimension(const std::vector<double>& sizes, const std::vector<double>& iprs);
// Single-size estimate -log(IPR)/log(L).
double fractal_dimension_single(double ipr_value, double size);

// beta = -log(max p)/log(edge_size), p = |amp|^2 renormalized over amp.
double scaling_exponent_min(const CVector& edge_amplitudes, int edge_size);

// |<P a | P b>| with both projections renormalized.
double edge_fidelity(const CVector& a, const CVector& b, const std::vector<int>& support);

struct GapCurve {
    std::vector<double> gap;
    std::vector<double> dEg_dh;
};
// Uniform grid; gap = |Ef - Eg|, derivative of Re Eg by central differences.
GapCurve gap_and_derivative(const std::vector<double>& hs, const std::vector<cplx>& Eg, const std::vector<cplx>& Ef);

double max_abs_imag(const Spectrum& spec);

// Topological window: states with |Re E| < gap_edge whose IPR on the edge
// support stays below ipr_cut. Strongly localized boundary bound states are
// excluded; they are not part of the chiral branch.
struct TopologicalWindow {
    double gap_edge = 1.0;
    double ipr_cut = 0.7;
};
double max_abs_imag_window(const Spectrum& spec, const std::vector<double>& edge_iprs, const TopologicalWindow& win);
std::vector<int> window_states(const Spectrum& spec, const std::vector<double>& edge_iprs, const TopologicalWindow& win);

struct ZeroCount {
    int count = 0;
    bool degenerate = false;  // Im V vanishes identically
};
// Sign changes of Im V_n around the ring n = 0..L-1 (closure counted once).
// Values below 1e-12 * V * sinh(h) in magnitude are treated as zeros and skipped.
ZeroCount count_imag_zeros(const PotentialProfile& profile);

// Local minima of F below threshold, minima within merge_steps grid steps merged.
std::vector<int> fidelity_minima(const std::vector<double>& fidelity, double threshold = 0.9, int merge_steps = 2);
int count_npt(const std::vector<double>& fidelity, double threshold = 0.9, int merge_steps = 2);

enum class TransitionMethod { onset_of_max_im, derivative_jump, fidelity_drop };

struct TransitionOptions {
    double rel_tol = 1e-6;       // onset: tolerance relative to scale
    double scale = 0.0;          // onset: 0 means max |curve|
    double jump_factor = 10.0;   // derivative-jump: multiple of median variation
    int merge_steps = 2;
    double fidelity_threshold = 0.9;
};

// Curves are sampled on hs. For derivative-jump the curve is Re E_g; for
// fidelity-drop, curve[k] is F between hs[k] and hs[k+1].
std::vector<double> detect_transitions(const std::vector<double>& hs, const std::vector<double>& curve,
                                       TransitionMethod method, const TransitionOptions& opt = {});

struct JumpProfile {
    std::vector<double> jumps;  // |d[k+1] - d[k]|, located between hs[k] and hs[k+1]
    double median = 0.0;
};
JumpProfile derivative_jumps(const std::vector<double>& hs, const std::vector<double>& curve);

// Probability weight on the boundary sites of map (state normalized on all sites).
double edge_density(const CVector& state, const LatticeMap& map);
std::vector<double> edge_densities(const Spectrum& spec, const LatticeMap& map);
std::vector<double> edge_iprs(const Spectrum& spec, const LatticeMap& map);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hqc
