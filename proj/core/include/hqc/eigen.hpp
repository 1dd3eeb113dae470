#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hqc/lattice.hpp"

namespace hqc {

enum class SortKey { by_real, by_imag, by_modulus };

struct Spectrum {
    CVector eigenvalues;
    CMatrix right_vectors;           // columns, unit Euclidean norm; empty in values-only mode
    std::optional<CMatrix> left_vectors;  // columns, unit norm, conj(L)^T H = lambda conj(L)^T
    std::vector<double> residuals;   // ||H v - lambda v||_2, empty in values-only mode
    SortKey sort_key = SortKey::by_real;

    int size() const { return static_cast<int>(eigenvalues.size()); }
    bool has_vectors() const { return right_vectors.cols() == eigenvalues.size() && eigenvalues.size() > 0; }
};

// Ties on the primary key (within 1e-9 relative) fall back to Im then to
// the LAPACK output position, so the ordering is a pure function of H.
void sort_spectrum(Spectrum& spec, SortKey key);

// Dense general eigensolver (LAPACK zgeev: balance, Hessenberg, shifted QR).
// Output is sorted by real part.
Spectrum decompose(const OperatorMatrix& H, bool want_left = false);
Spectrum decompose(const CMatrix& H, bool want_left = false);
// Eigenvalues only, sorted by real part; vectors are not formed.
Spectrum eigenvalues_only(const CMatrix& H);
// Right eigenvector for a known eigenvalue by inverse iteration.
CVector eigenvector_for(const CMatrix& H, cplx lambda);
// Hermitian path (Eigen's SelfAdjointEigenSolver), sorted ascending.
Spectrum decompose_hermitian(const CMatrix& H);

double max_abs_entry(const CMatrix& H);
// Residual tolerance 1e-8 * (1 + ||H||_max * N).
double residual_bound(const CMatrix& H);

enum class SelectorRule { min_real, max_imag, min_imag, in_gap_edge, max_edge_density };

std::string to_string(SelectorRule rule);
SelectorRule selector_from_string(const std::string& s);

struct StateSelector {
    SelectorRule rule = SelectorRule::min_real;
    double gap_edge = 1.0;        // in-gap-edge: |Re E| < gap_edge
    double edge_threshold = 0.5;  // in-gap-edge: edge density > threshold
    nlohmann::json to_json() const;
};

// All indices in selector order. Candidates for in-gap-edge are ordered by
// |Re E|; max-edge-density by decreasing edge density. Rules that need
// edge densities take them from the caller (one value per state).
std::vector<int> rank_states(const Spectrum& spec, const StateSelector& sel,
                             const std::vector<double>& edge_densities = {});
int select_state(const Spectrum& spec, const StateSelector& sel,
                 const std::vector<double>& edge_densities = {});
// Next state after the selected one in the same ordering.
int first_excited(const Spectrum& spec, const StateSelector& sel,
                  const std::vector<double>& edge_densities = {});

struct Continuation {
    std::vector<int> permutation;  // permutation[i] = index in next matched to prev index i
    double total_distance = 0.0;
    double min_pair_distance = 0.0;  // smallest |lambda_a - lambda_b| among next eigenvalues
};

Continuation track_continuation(const Spectrum& prev, const Spectrum& next);

}  // namespace hqc
