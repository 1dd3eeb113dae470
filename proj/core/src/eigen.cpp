#include "hqc/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include <lapacke.h>

#include "hqc/errors.hpp"

extern "C" void openblas_set_num_threads(int);

namespace hqc {

namespace {

// Workers parallelize over grid points; the BLAS layer stays serial so that
// results never depend on thread scheduling.
void pin_blas_threads() {
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
}

double primary_key(cplx z, SortKey key) {
    switch (key) {
        case SortKey::by_real: return z.real();
        case SortKey::by_imag: return z.imag();
        case SortKey::by_modulus: return std::abs(z);
    }
    return 0.0;
}

// Sort idx by key ascending; keys equal within tol form a group that is
// ordered by Im, then by position.
void tie_sort(std::vector<int>& idx, const std::vector<double>& key, const CVector& w, double tol) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return key[a] < key[b]; });
    size_t i = 0;
    while (i < idx.size()) {
        size_t j = i + 1;
        while (j < idx.size() && key[idx[j]] - key[idx[i]] <= tol) ++j;
        std::sort(idx.begin() + static_cast<long>(i), idx.begin() + static_cast<long>(j), [&](int a, int b) {
            if (w[a].imag() != w[b].imag()) return w[a].imag() < w[b].imag();
            return a < b;
        });
        i = j;
    }
}

double tie_tolerance(const CVector& w) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) m = std::max(m, std::abs(w[k]));
    return 1e-9 * (1.0 + m);
}

void normalize_columns(CMatrix& M) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
        const double n = M.col(c).norm();
        if (n > 0.0) M.col(c) /= n;
    }
}

std::vector<double> column_residuals(const CMatrix& H, const CVector& w, const CMatrix& V) {
    CMatrix R = H * V;
    for (Eigen::Index c = 0; c < V.cols(); ++c) R.col(c) -= w[c] * V.col(c);
    std::vector<double> r(static_cast<size_t>(V.cols()));
    for (Eigen::Index c = 0; c < V.cols(); ++c) r[static_cast<size_t>(c)] = R.col(c).norm();
    return r;
}

void apply_order(Spectrum& spec, const std::vector<int>& order) {
    const auto n = static_cast<Eigen::Index>(order.size());
    CVector w(n);
    for (Eigen::Index k = 0; k < n; ++k) w[k] = spec.eigenvalues[order[static_cast<size_t>(k)]];
    spec.eigenvalues = w;
    if (spec.has_vectors()) {
        CMatrix V(spec.right_vectors.rows(), n);
        for (Eigen::Index k = 0; k < n; ++k) V.col(k) = spec.right_vectors.col(order[static_cast<size_t>(k)]);
        spec.right_vectors = std::move(V);
    }
    if (spec.left_vectors) {
        CMatrix L(spec.left_vectors->rows(), n);
        for (Eigen::Index k = 0; k < n; ++k) L.col(k) = spec.left_vectors->col(order[static_cast<size_t>(k)]);
        spec.left_vectors = std::move(L);
    }
    if (!spec.residuals.empty()) {
        std::vector<double> r(order.size());
        for (size_t k = 0; k < order.size(); ++k) r[k] = spec.residuals[static_cast<size_t>(order[k])];
        spec.residuals = std::move(r);
    }
}

Spectrum run_zgeev(const CMatrix& H, bool want_vectors, bool want_left) {
    pin_blas_threads();
    if (H.rows() != H.cols()) throw DimensionError("eigensolver needs a square matrix");
    if (!H.allFinite()) throw InputError("matrix has non-finite entries");
    const auto n = static_cast<lapack_int>(H.rows());
    Spectrum spec;
    if (n == 0) return spec;
    CMatrix A = H;
    CVector w(n);
    CMatrix VR, VL;
    if (want_vectors) VR.resize(n, n);
    if (want_left) VL.resize(n, n);
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, want_left ? 'V' : 'N', want_vectors ? 'V' : 'N', n,
        reinterpret_cast<lapack_complex_double*>(A.data()), n,
        reinterpret_cast<lapack_complex_double*>(w.data()),
        want_left ? reinterpret_cast<lapack_complex_double*>(VL.data()) : nullptr, want_left ? n : 1,
        want_vectors ? reinterpret_cast<lapack_complex_double*>(VR.data()) : nullptr, want_vectors ? n : 1);
    if (info < 0) throw InputError("zgeev rejected argument " + std::to_string(-info));
    if (info > 0)
        throw ConvergenceError("QR iteration did not converge; eigenvalues before index " +
                                   std::to_string(info) + " are missing",
                               static_cast<int>(info));
    spec.eigenvalues = w;
    if (want_vectors) {
        normalize_columns(VR);
        spec.right_vectors = std::move(VR);
        spec.residuals = column_residuals(H, spec.eigenvalues, spec.right_vectors);
    }
    if (want_left) {
        normalize_columns(VL);
        spec.left_vectors = std::move(VL);
    }
    sort_spectrum(spec, SortKey::by_real);
    return spec;
}

}  // namespace

void sort_spectrum(Spectrum& spec, SortKey key) {
    const int n = spec.size();
    std::vector<double> k(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) k[static_cast<size_t>(i)] = primary_key(spec.eigenvalues[i], key);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    tie_sort(order, k, spec.eigenvalues, tie_tolerance(spec.eigenvalues));
    apply_order(spec, order);
    spec.sort_key = key;
}

Spectrum decompose(const CMatrix& H, bool want_left) { return run_zgeev(H, true, want_left); }

Spectrum decompose(const OperatorMatrix& H, bool want_left) { return decompose(H.entries, want_left); }

Spectrum eigenvalues_only(const CMatrix& H) { return run_zgeev(H, false, false); }

CVector eigenvector_for(const CMatrix& H, cplx lambda) {
    pin_blas_threads();
    const auto n = static_cast<lapack_int>(H.rows());
    if (n == 0 || H.cols() != H.rows()) throw DimensionError("eigenvector_for needs a nonempty square matrix");
    const double scale = 1.0 + max_abs_entry(H);
    CVector x(n);
    for (lapack_int i = 0; i < n; ++i) x[i] = cplx(1.0, 0.0) + cplx(1e-3 * (i % 7), 1e-3 * (i % 5));
    x.normalize();
    double shift = 1e-13 * scale;
    for (int attempt = 0; attempt < 8; ++attempt, shift *= 100.0) {
        CMatrix A = H;
        A.diagonal().array() -= lambda + cplx(shift, 0.0);
        std::vector<lapack_int> ipiv(static_cast<size_t>(n));
        lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, reinterpret_cast<lapack_complex_double*>(A.data()),
                                         n, ipiv.data());
        if (info != 0) continue;
        CVector y = x;
        bool ok = true;
        for (int it = 0; it < 3 && ok; ++it) {
            info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, 1, reinterpret_cast<const lapack_complex_double*>(A.data()),
                                  n, ipiv.data(), reinterpret_cast<lapack_complex_double*>(y.data()), n);
            const double nr = y.norm();
            ok = info == 0 && std::isfinite(nr) && nr > 0.0;
            if (ok) y /= nr;
        }
        if (!ok) continue;
        const double res = (H * y - lambda * y).norm();
        if (res < residual_bound(H)) return y;
    }
    throw ConvergenceError("inverse iteration did not reach the residual bound", 0);
}

Spectrum decompose_hermitian(const CMatrix& H) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver failed", 0);
    Spectrum spec;
    spec.eigenvalues = es.eigenvalues().cast<cplx>();
    spec.right_vectors = es.eigenvectors();
    normalize_columns(spec.right_vectors);
    spec.residuals = column_residuals(H, spec.eigenvalues, spec.right_vectors);
    spec.sort_key = SortKey::by_real;
    return spec;
}

double max_abs_entry(const CMatrix& H) { return H.size() == 0 ? 0.0 : H.cwiseAbs().maxCoeff(); }

double residual_bound(const CMatrix& H) {
    return 1e-8 * (1.0 + max_abs_entry(H) * static_cast<double>(H.rows()));
}

std::string to_string(SelectorRule rule) {
    switch (rule) {
        case SelectorRule::min_real: return "min-real";
        case SelectorRule::max_imag: return "max-imag";
        case SelectorRule::min_imag: return "min-imag";
        case SelectorRule::in_gap_edge: return "in-gap-edge";
        case SelectorRule::max_edge_density: return "max-edge-density";
    }
    return "unknown";
}

SelectorRule selector_from_string(const std::string& s) {
    for (SelectorRule r : {SelectorRule::min_real, SelectorRule::max_imag, SelectorRule::min_imag,
                           SelectorRule::in_gap_edge, SelectorRule::max_edge_density})
        if (to_string(r) == s) return r;
    throw ConfigError("unknown selector rule '" + s + "'");
}

nlohmann::json StateSelector::to_json() const {
    return {{"rule", to_string(rule)}, {"gap_edge", gap_edge}, {"edge_threshold", edge_threshold}};
}

std::vector<int> rank_states(const Spectrum& spec, const StateSelector& sel, const std::vector<double>& edge_densities) {
    const int n = spec.size();
    if (n == 0) throw SelectionError("empty spectrum");
    const bool needs_density = sel.rule == SelectorRule::in_gap_edge || sel.rule == SelectorRule::max_edge_density;
    if (needs_density && static_cast<int>(edge_densities.size()) != n)
        throw SelectionError("rule " + to_string(sel.rule) + " needs one edge density per state");
    const CVector& w = spec.eigenvalues;
    std::vector<int> idx;
    std::vector<double> key(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double k = 0.0;
        switch (sel.rule) {
            case SelectorRule::min_real: k = w[i].real(); break;
            case SelectorRule::max_imag: k = -w[i].imag(); break;
            case SelectorRule::min_imag: k = w[i].imag(); break;
            case SelectorRule::in_gap_edge: k = std::abs(w[i].real()); break;
            case SelectorRule::max_edge_density: k = -edge_densities[static_cast<size_t>(i)]; break;
        }
        key[static_cast<size_t>(i)] = k;
        if (sel.rule == SelectorRule::in_gap_edge &&
            !(std::abs(w[i].real()) < sel.gap_edge && edge_densities[static_cast<size_t>(i)] > sel.edge_threshold))
            continue;
        idx.push_back(i);
    }
    if (idx.empty()) throw SelectionError("no state satisfies the in-gap-edge rule");
    const double tol = sel.rule == SelectorRule::max_edge_density ? 1e-12 : tie_tolerance(w);
    tie_sort(idx, key, w, tol);
    return idx;
}

int select_state(const Spectrum& spec, const StateSelector& sel, const std::vector<double>& edge_densities) {
    return rank_states(spec, sel, edge_densities).front();
}

int first_excited(const Spectrum& spec, const StateSelector& sel, const std::vector<double>& edge_densities) {
    const auto r = rank_states(spec, sel, edge_densities);
    if (r.size() < 2) throw SelectionError("no first excited state in the candidate set");
    return r[1];
}

Continuation track_continuation(const Spectrum& prev, const Spectrum& next) {
    if (prev.size() != next.size()) throw DimensionError("continuation needs spectra of equal size");
    const int n = prev.size();
    struct Pair {
        double d;
        int i;
        int j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<size_t>(n) * static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) pairs.push_back({std::abs(prev.eigenvalues[i] - next.eigenvalues[j]), i, j});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    Continuation c;
    c.permutation.assign(static_cast<size_t>(n), -1);
    std::vector<char> used(static_cast<size_t>(n), 0);
    int matched = 0;
    for (const Pair& p : pairs) {
        if (matched == n) break;
        if (c.permutation[static_cast<size_t>(p.i)] >= 0 || used[static_cast<size_t>(p.j)]) continue;
        c.permutation[static_cast<size_t>(p.i)] = p.j;
        used[static_cast<size_t>(p.j)] = 1;
        c.total_distance += p.d;
        ++matched;
    }
    c.min_pair_distance = n > 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            c.min_pair_distance = std::min(c.min_pair_distance, std::abs(next.eigenvalues[a] - next.eigenvalues[b]));
    return c;
}

}  // namespace hqc
