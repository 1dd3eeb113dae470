#include "hqc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hqc/errors.hpp"

namespace hqc {

double ipr(const CVector& state) {
    const double s2 = state.squaredNorm();
    if (!(s2 > 0.0)) throw UndefinedObservableError("IPR of a zero vector");
    double s4 = 0.0;
    for (Eigen::Index i = 0; i < state.size(); ++i) s4 += std::pow(std::norm(state[i]), 2);
    return s4 / (s2 * s2);
}

double ipr(const CVector& state, const std::vector<int>& support) {
    double s2 = 0.0, s4 = 0.0;
    for (int i : support) {
        const double p = std::norm(state[i]);
        s2 += p;
        s4 += p * p;
    }
    if (!(s2 > 0.0)) throw UndefinedObservableError("IPR support carries zero weight");
    return s4 / (s2 * s2);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("linear fit needs two or more paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ssr += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    return f;
}

FractalFit fractal_dimension(const std::vector<double>& sizes, const std::vector<double>& iprs) {
    if (sizes.size() != iprs.size()) throw InputError("sizes and iprs differ in length");
    if (sizes.size() < 3) throw InputError("fractal dimension needs at least three sizes");
    for (size_t i = 1; i < sizes.size(); ++i)
        if (!(sizes[i] > sizes[i - 1])) throw InputError("sizes must be strictly increasing");
    std::vector<double> lx, ly;
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (!(sizes[i] > 0.0) || !(iprs[i] > 0.0)) throw InputError("sizes and iprs must be positive");
        lx.push_back(std::log(sizes[i]));
        ly.push_back(std::log(iprs[i]));
    }
    const LinearFit lf = linear_fit(lx, ly);
    return {-lf.slope, lf.intercept, lf.r2};
}

double fractal_dimension_single(double ipr_value, double size) {
    if (!(size > 1.0) || !(ipr_value > 0.0)) throw InputError("single-size fractal dimension needs L > 1 and IPR > 0");
    return -std::log(ipr_value) / std::log(size);
}

double scaling_exponent_min(const CVector& edge_amplitudes, int edge_size) {
    if (edge_size < 2) throw InputError("edge size must be at least 2");
    const double s = edge_amplitudes.squaredNorm();
    if (!(s > 0.0)) throw UndefinedObservableError("zero edge weight");
    double pmax = 0.0;
    for (Eigen::Index i = 0; i < edge_amplitudes.size(); ++i) pmax = std::max(pmax, std::norm(edge_amplitudes[i]) / s);
    return std::max(0.0, -std::log(pmax) / std::log(static_cast<double>(edge_size)));
}

double edge_fidelity(const CVector& a, const CVector& b, const std::vector<int>& support) {
    cplx ov = 0.0;
    double na = 0.0, nb = 0.0;
    for (int i : support) {
        ov += std::conj(a[i]) * b[i];
        na += std::norm(a[i]);
        nb += std::norm(b[i]);
    }
    if (!(na > 0.0) || !(nb > 0.0)) throw UndefinedObservableError("zero edge weight in fidelity");
    return std::min(1.0, std::abs(ov) / std::sqrt(na * nb));
}

namespace {

void check_uniform(const std::vector<double>& hs) {
    if (hs.size() < 3) throw InputError("grid needs at least three points");
    const double step = hs[1] - hs[0];
    if (!(step > 0.0)) throw InputError("grid must be increasing");
    for (size_t k = 1; k < hs.size(); ++k)
        if (std::abs((hs[k] - hs[k - 1]) - step) > 1e-6 * step) throw InputError("grid is not uniform");
}

std::vector<double> central_diff(const std::vector<double>& hs, const std::vector<double>& y) {
    const size_t n = hs.size();
    std::vector<double> d(n);
    d[0] = (y[1] - y[0]) / (hs[1] - hs[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (hs[n - 1] - hs[n - 2]);
    for (size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (hs[k + 1] - hs[k - 1]);
    return d;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(m), v.end());
    double med = v[m];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + static_cast<long>(m - 1), v.end());
        med = 0.5 * (med + v[m - 1]);
    }
    return med;
}

// Cluster indices closer than merge steps, keep the one with the extreme score.
std::vector<int> cluster(const std::vector<int>& idx, const std::vector<double>& score, int merge, bool take_max) {
    std::vector<int> out;
    size_t i = 0;
    while (i < idx.size()) {
        size_t j = i;
        int best = idx[i];
        while (j + 1 < idx.size() && idx[j + 1] - idx[j] <= merge) {
            ++j;
            const int c = idx[j];
            if (take_max ? score[static_cast<size_t>(c)] > score[static_cast<size_t>(best)]
                         : score[static_cast<size_t>(c)] < score[static_cast<size_t>(best)])
                best = c;
        }
        out.push_back(best);
        i = j + 1;
    }
    return out;
}

}  // namespace

GapCurve gap_and_derivative(const std::vector<double>& hs, const std::vector<cplx>& Eg, const std::vector<cplx>& Ef) {
    if (Eg.size() != hs.size() || Ef.size() != hs.size()) throw InputError("curve lengths differ from the grid");
    check_uniform(hs);
    GapCurve g;
    std::vector<double> re(hs.size());
    for (size_t k = 0; k < hs.size(); ++k) {
        g.gap.push_back(std::abs(Ef[k] - Eg[k]));
        re[k] = Eg[k].real();
    }
    g.dEg_dh = central_diff(hs, re);
    return g;
}

double max_abs_imag(const Spectrum& spec) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) m = std::max(m, std::abs(spec.eigenvalues[k].imag()));
    return m;
}

std::vector<int> window_states(const Spectrum& spec, const std::vector<double>& edge_iprs, const TopologicalWindow& win) {
    if (static_cast<int>(edge_iprs.size()) != spec.size()) throw InputError("one edge IPR per state is required");
    std::vector<int> out;
    for (int k = 0; k < spec.size(); ++k)
        if (std::abs(spec.eigenvalues[k].real()) < win.gap_edge && edge_iprs[static_cast<size_t>(k)] < win.ipr_cut)
            out.push_back(k);
    return out;
}

double max_abs_imag_window(const Spectrum& spec, const std::vector<double>& edge_iprs, const TopologicalWindow& win) {
    double m = 0.0;
    for (int k : window_states(spec, edge_iprs, win)) m = std::max(m, std::abs(spec.eigenvalues[k].imag()));
    return m;
}

ZeroCount count_imag_zeros(const PotentialProfile& profile) {
    ZeroCount zc;
    const double scale = std::abs(profile.V()) * std::abs(std::sinh(profile.h()));
    if (!(scale > 0.0)) {
        zc.degenerate = true;
        return zc;
    }
    std::vector<int> signs;
    for (int n = 0; n < profile.size(); ++n) {
        const double v = profile[n].imag();
        if (std::abs(v) <= 1e-12 * scale) continue;
        signs.push_back(v > 0.0 ? 1 : -1);
    }
    if (signs.empty()) {
        zc.degenerate = true;
        return zc;
    }
    for (size_t k = 0; k < signs.size(); ++k)
        if (signs[k] != signs[(k + 1) % signs.size()]) ++zc.count;
    return zc;
}

std::vector<int> fidelity_minima(const std::vector<double>& F, double threshold, int merge_steps) {
    std::vector<int> cand;
    const int n = static_cast<int>(F.size());
    for (int k = 0; k < n; ++k) {
        if (!(F[static_cast<size_t>(k)] < threshold)) continue;
        const bool left = k == 0 || F[static_cast<size_t>(k)] <= F[static_cast<size_t>(k - 1)];
        const bool right = k == n - 1 || F[static_cast<size_t>(k)] <= F[static_cast<size_t>(k + 1)];
        if (left && right) cand.push_back(k);
    }
    return cluster(cand, F, merge_steps, false);
}

int count_npt(const std::vector<double>& F, double threshold, int merge_steps) {
    return static_cast<int>(fidelity_minima(F, threshold, merge_steps).size());
}

JumpProfile derivative_jumps(const std::vector<double>& hs, const std::vector<double>& curve) {
    if (curve.size() != hs.size()) throw InputError("curve length differs from the grid");
    check_uniform(hs);
    const auto d = central_diff(hs, curve);
    JumpProfile jp;
    for (size_t k = 0; k + 1 < d.size(); ++k) jp.jumps.push_back(std::abs(d[k + 1] - d[k]));
    jp.median = median_of(jp.jumps);
    return jp;
}

std::vector<double> detect_transitions(const std::vector<double>& hs, const std::vector<double>& curve,
                                       TransitionMethod method, const TransitionOptions& opt) {
    std::vector<double> out;
    switch (method) {
        case TransitionMethod::onset_of_max_im: {
            if (curve.size() != hs.size()) throw InputError("curve length differs from the grid");
            double scale = opt.scale;
            if (!(scale > 0.0))
                for (double v : curve) scale = std::max(scale, std::abs(v));
            if (!(scale > 0.0)) return out;
            const double tol = opt.rel_tol * scale;
            int first = -1, last = -1;
            for (int k = 0; k < static_cast<int>(curve.size()); ++k)
                if (std::abs(curve[static_cast<size_t>(k)]) > tol) {
                    if (first < 0) first = k;
                    last = k;
                }
            if (first < 0) return out;
            out.push_back(hs[static_cast<size_t>(first)]);
            if (last + 1 < static_cast<int>(hs.size())) out.push_back(hs[static_cast<size_t>(last + 1)]);
            return out;
        }
        case TransitionMethod::derivative_jump: {
            const JumpProfile jp = derivative_jumps(hs, curve);
            double scale = 0.0;
            for (double v : curve) scale = std::max(scale, std::abs(v));
            const double floor = 1e-9 * (1.0 + scale) / (hs[1] - hs[0]);
            std::vector<int> idx;
            for (size_t k = 0; k < jp.jumps.size(); ++k)
                if (jp.jumps[k] > opt.jump_factor * jp.median && jp.jumps[k] > floor) idx.push_back(static_cast<int>(k));
            for (int k : cluster(idx, jp.jumps, opt.merge_steps, true))
                out.push_back(0.5 * (hs[static_cast<size_t>(k)] + hs[static_cast<size_t>(k + 1)]));
            return out;
        }
        case TransitionMethod::fidelity_drop: {
            if (curve.size() + 1 != hs.size() && curve.size() != hs.size())
                throw InputError("fidelity curve must have one point per grid interval");
            for (int k : fidelity_minima(curve, opt.fidelity_threshold, opt.merge_steps))
                out.push_back(hs[static_cast<size_t>(k)]);
            return out;
        }
    }
    return out;
}

double edge_density(const CVector& state, const LatticeMap& map) {
    if (state.size() != map.size()) throw DimensionError("state size differs from the lattice");
    const double tot = state.squaredNorm();
    if (!(tot > 0.0)) throw UndefinedObservableError("zero state");
    double e = 0.0;
    for (int i : map.boundary_sites()) e += std::norm(state[i]);
    return e / tot;
}

std::vector<double> edge_densities(const Spectrum& spec, const LatticeMap& map) {
    if (!spec.has_vectors()) throw InputError("edge densities need eigenvectors");
    std::vector<double> out(static_cast<size_t>(spec.size()));
    for (int k = 0; k < spec.size(); ++k) out[static_cast<size_t>(k)] = edge_density(spec.right_vectors.col(k), map);
    return out;
}

std::vector<double> edge_iprs(const Spectrum& spec, const LatticeMap& map) {
    if (!spec.has_vectors()) throw InputError("edge IPRs need eigenvectors");
    const auto support = map.boundary_sites();
    std::vector<double> out(static_cast<size_t>(spec.size()));
    for (int k = 0; k < spec.size(); ++k) out[static_cast<size_t>(k)] = ipr(spec.right_vectors.col(k), support);
    return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw InputError("correlation needs paired samples");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) throw UndefinedObservableError("correlation of a constant sample");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace hqc
