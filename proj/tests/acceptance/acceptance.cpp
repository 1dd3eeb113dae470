// Acceptance driver: one PASS/FAIL line per criterion. Heavy sweeps write
// their point caches below --cache so reruns only pay for missing points.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "hqc/checks.hpp"
#include "hqc/sweep.hpp"
#include "oracles.hpp"

using namespace hqc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path g_cache = "acceptance-cache";

int workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

std::vector<cplx> to_vec(const CVector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<cplx> sorted_closed(FourSiteKind kind, double g) {
    const auto a = four_site_eigs_closed(kind, 1.0, g);
    return {a.begin(), a.end()};
}

// Pairs each numerical eigenvalue with its nearest unused closed-form value.
double matched_error(std::vector<cplx> num, std::vector<cplx> ref) {
    double worst = 0.0;
    for (const cplx& z : num) {
        auto it = std::min_element(ref.begin(), ref.end(),
                                   [&](cplx a, cplx b) { return std::abs(a - z) < std::abs(b - z); });
        worst = std::max(worst, std::abs(*it - z));
        ref.erase(it);
    }
    return worst;
}

Outcome c01() {
    double worst = 0.0;
    for (int k = 0; k <= 600; ++k) {
        const double g = 0.01 * k;
        for (auto kind : {FourSiteKind::adjacent, FourSiteKind::non_adjacent}) {
            const Spectrum s = decompose(build_four_site(kind, 1.0, g));
            worst = std::max(worst, matched_error(to_vec(s.eigenvalues), sorted_closed(kind, g)));
        }
    }
    // Exceptional points located on the numerical spectrum of H_a (gain on
    // sites 0 and 2): each EP splits one more pair off Im lambda = gamma/2.
    auto split = [](double g) {
        const Spectrum s = eigenvalues_only(build_four_site(FourSiteKind::non_adjacent, 1.0, g).entries);
        int n = 0;
        for (int k = 0; k < 4; ++k) n += std::abs(s.eigenvalues[k].imag() - g / 2) > 1e-6;
        return n;
    };
    auto bisect = [&](double lo, double hi) {
        const int a = split(lo);
        for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            (split(mid) == a ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double r5 = std::sqrt(5.0);
    const std::vector<double> eps = exceptional_points(FourSiteKind::non_adjacent, 1.0);
    std::vector<double> found;
    double prev_g = 0.0;
    int prev = split(0.0);
    for (int k = 1; k <= 600; ++k) {
        const double g = 0.01 * k;
        const int now = split(g);
        if (now != prev) found.push_back(bisect(prev_g, g));
        prev = now;
        prev_g = g;
    }
    double ep_err = 1.0;
    if (eps.size() == 2 && found.size() == 2)
        ep_err = std::max({std::abs(eps[0] - (r5 - 1)), std::abs(eps[1] - (r5 + 1)), std::abs(found[0] - (r5 - 1)),
                           std::abs(found[1] - (r5 + 1))});
    // Im splits as sqrt(gamma - gamma_EP), so the 1e-6 threshold moves the
    // numerical location by O(1e-12).
    Outcome o;
    o.pass = worst < 1e-10 && ep_err < 1e-6;
    o.detail = "max eigenvalue error " + fmt(worst, 3) + ", EP error " + fmt(ep_err, 3) + " (closed " +
               (eps.size() == 2 ? fmt(eps[0], 10) + ", " + fmt(eps[1], 10) : "missing") + "; numeric " +
               std::to_string(found.size()) + " found)";
    return o;
}

Outcome c02() {
    std::vector<std::pair<std::string, OperatorMatrix>> ms;
    const PotentialProfile p13(1.0, 0.0, quasi_alpha(13), 13);
    ms.emplace_back("aah-periodic", build_aah_chain(13, 1.0, p13));
    ms.emplace_back("aah-open", build_aah_chain(13, 1.0, p13, ChainBoundary::open));
    const PotentialProfile p55(1.0, 0.0, quasi_alpha(55), 55);
    ms.emplace_back("two-chain", build_two_chain(55, 1.0, 1.0, p55));
    const OperatorMatrix hc = build_haldane_cylinder(10, 8, 1.0, 0.2, std::numbers::pi / 2);
    const LatticeMap map = map_for(hc);
    ms.emplace_back("haldane", hc);
    ms.emplace_back("haldane+boundary",
                    add_boundary_potential(hc, map, PotentialProfile(1.0, 0.0, quasi_alpha(10), 10)));
    const OperatorMatrix hc2 = build_haldane_cylinder(10, 8, 1.0, 0.2, std::numbers::pi / 2, 2);
    ms.emplace_back("haldane+boundary(2 rows)",
                    add_boundary_potential(hc2, map_for(hc2), PotentialProfile(1.0, 0.0, quasi_alpha(10), 10)));
    ms.emplace_back("impurities-nn", add_impurities(hc, map, ImpuritySpec{5, 1, 0.0}));
    ms.emplace_back("impurities-nnn", add_impurities(hc, map, ImpuritySpec{5, 2, 0.0}));
    ms.emplace_back("domain-wall", add_domain_wall(hc, map, 0.0));
    ms.emplace_back("four-site-a", build_four_site(FourSiteKind::adjacent, 1.0, 0.0));
    ms.emplace_back("four-site-b", build_four_site(FourSiteKind::non_adjacent, 1.0, 0.0));
    double worst = 0.0;
    std::string where;
    for (const auto& [name, H] : ms) {
        const double m = max_abs_imag(decompose(H));
        if (m >= worst) {
            worst = m;
            where = name;
        }
    }
    return {worst < 1e-10, std::to_string(ms.size()) + " builders, max |Im| " + fmt(worst, 3) + " (" + where + ")"};
}

Outcome c03() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> uV(0.1, 3.0), uh(0.0, 3.0);
    std::uniform_int_distribution<int> uL(5, 300);
    double worst = 0.0, worst_simpson = 0.0;
    for (int k = 0; k < 200; ++k) {
        const int L = uL(rng);
        const double V = uV(rng), h = uh(rng);
        const Rational a = quasi_alpha(L);
        const PotentialProfile p(V, h, a, L);
        const double avg = eps_i_average(p);
        const double closed = eps_i_closed_form(V, h, a.value(), L);
        worst = std::max(worst, std::abs(avg - closed));
        worst_simpson = std::max(worst_simpson, std::abs(oracle::simpson_eps_i(V, h, a.value(), L) - closed));
    }
    return {worst < 1e-8 && worst_simpson < 1e-8,
            "200 tuples, quadrature vs closed form " + fmt(worst, 3) + ", Simpson vs closed form " + fmt(worst_simpson, 3)};
}

SweepConfig transition_config() {
    SweepConfig c;
    c.model.t2 = 0.2;
    c.sizes = {{20, 20}};
    c.V = Range::single(1.0);
    c.h = {0.0, 2.2, 0.005};
    c.observables = {"max_abs_im", "max_abs_im_edge", "gap", "zeros", "fidelity"};
    c.output_dir = (g_cache / "transitions").string();
    c.workers = workers();
    return c;
}

struct Curves {
    std::vector<double> hs, im_edge, im_full, eg_re, gap;
};

Curves curves_of(const std::vector<SweepRecord>& recs) {
    Curves c;
    for (const auto& r : recs) {
        if (!r.ok) continue;
        c.hs.push_back(r.h);
        c.im_edge.push_back(r.obs.max_abs_im_edge);
        c.im_full.push_back(r.obs.max_abs_im);
        c.eg_re.push_back(r.obs.eg_re);
        c.gap.push_back(r.obs.gap);
    }
    return c;
}

Outcome c04() {
    const SweepConfig cfg = transition_config();
    const SizeScanResult r = run_size_scan(cfg);
    if (r.rows.empty() || !r.sweep.failures.empty())
        return {false, "sweep failed: " + (r.sweep.failures.empty() ? std::string("no rows") : r.sweep.failures[0])};
    const SizeScanRow& row = r.rows[0];
    const Curves c = curves_of(r.sweep.records);
    const double step = cfg.h.step;
    const double h1 = row.h1, h2 = row.h2;
    auto near_jump = [&](double h) {
        for (double j : row.jump_points)
            if (std::abs(j - h) <= 2 * step + 1e-9) return true;
        return false;
    };
    const bool main_clause = std::abs(h1 - 0.97) <= 0.05 && std::abs(h2 - 1.41) <= 0.05 && near_jump(h1) && near_jump(h2);

    // Degraded clause on the same curve the onset detector used.
    double scale = 0.0;
    for (double v : c.im_edge) scale = std::max(scale, v);
    bool degraded = std::isfinite(h1) && std::isfinite(h2) && h1 < h2 && scale > 0.0;
    for (size_t k = 0; degraded && k < c.hs.size(); ++k) {
        const double h = c.hs[k];
        if (h > h1 + 1e-9 && h < h2 - 1e-9 && !(c.im_edge[k] > 0.0)) degraded = false;
        if ((h < h1 - 1e-9 || h > h2 + 1e-9) && !(c.im_edge[k] < 1e-6 * scale)) degraded = false;
    }
    std::ostringstream jumps;
    for (double j : row.jump_points) jumps << fmt(j, 4) << ' ';
    Outcome o;
    o.pass = main_clause || degraded;
    o.detail = "h1=" + fmt(h1) + " h2=" + fmt(h2) + " (targets 0.97, 1.41 +/- 0.05); jump points [" + jumps.str() +
               "]; " + (main_clause ? "quantitative clause holds" : "quantitative clause fails") + "; degraded clause " +
               (degraded ? "holds" : "fails");
    return o;
}

Outcome c05() {
    const SweepConfig cfg = transition_config();
    const SizeScanResult r = run_size_scan(cfg);
    if (r.rows.empty()) return {false, "no transition scan"};
    const Curves c = curves_of(r.sweep.records);
    const JumpProfile jp = derivative_jumps(c.hs, c.eg_re);
    const double step = cfg.h.step;
    std::vector<double> ts;
    for (double t : {r.rows[0].h1, r.rows[0].h2})
        if (std::isfinite(t)) ts.push_back(t);
    if (ts.size() < 2 || jp.jumps.empty()) return {false, "fewer than two transitions detected"};

    // jumps[k] sits between hs[k] and hs[k+1]
    auto mid = [&](size_t k) { return 0.5 * (c.hs[k] + c.hs[k + 1]); };
    std::vector<double> elsewhere;
    for (size_t k = 0; k < jp.jumps.size(); ++k) {
        bool near = false;
        for (double t : ts) near |= std::abs(mid(k) - t) <= 2 * step + 1e-9;
        if (!near) elsewhere.push_back(jp.jumps[k]);
    }
    std::nth_element(elsewhere.begin(), elsewhere.begin() + static_cast<long>(elsewhere.size() / 2), elsewhere.end());
    const double med = elsewhere.empty() ? 0.0 : elsewhere[elsewhere.size() / 2];

    bool jumps_ok = true, minima_ok = true;
    std::ostringstream d;
    for (double t : ts) {
        double best = 0.0;
        for (size_t k = 0; k < jp.jumps.size(); ++k)
            if (std::abs(mid(k) - t) <= 2 * step + 1e-9) best = std::max(best, jp.jumps[k]);
        const double ratio = med > 0.0 ? best / med : INFINITY;
        jumps_ok &= ratio > 10.0;
        bool has_min = false;
        for (size_t k = 1; k + 1 < c.gap.size(); ++k) {
            if (std::abs(c.hs[k] - t) > 2 * step + 1e-9) continue;
            const double g = std::log(c.gap[k]);
            if (g <= std::log(c.gap[k - 1]) && g <= std::log(c.gap[k + 1])) has_min = true;
        }
        minima_ok &= has_min;
        d << "h=" << fmt(t) << " jump/median=" << fmt(ratio, 3) << " log-gap minimum " << (has_min ? "yes" : "no") << "; ";
    }
    return {jumps_ok && minima_ok, d.str() + "median elsewhere " + fmt(med, 3)};
}

Outcome c06() {
    SweepConfig cfg;
    cfg.model.t2 = 0.2;
    cfg.sizes = {{10, 20}};
    cfg.selector.rule = SelectorRule::max_edge_density;
    cfg.observables = {"ipr"};
    const double hs[3] = {0.3, 1.3, 2.3}, target[3] = {0.11, 0.25, 0.75}, tol[3] = {0.05, 0.07, 0.07};
    double val[3];
    bool anchors = true;
    for (int k = 0; k < 3; ++k) {
        val[k] = observe(cfg, cfg.sizes[0], 1.0, hs[k], 0.0).ipr_edge;
        anchors &= std::abs(val[k] - target[k]) <= tol[k];
    }
    const bool minimum = val[0] < val[1] && val[1] < val[2] && std::abs(val[0] - 0.1) <= 0.03;
    return {anchors || minimum,
            "max-edge-density state, IPR on the top row: " + fmt(val[0], 3) + ", " + fmt(val[1], 3) + ", " + fmt(val[2], 3) +
                " (anchors 0.11, 0.25, 0.75: " + (anchors ? "match" : "no match") + "; ordering and 1/L_x clause: " +
                (minimum ? "holds" : "fails") + ")"};
}

SweepConfig npt_config(std::vector<SizeSpec> sizes, const std::string& tag) {
    SweepConfig c;
    c.model.t2 = 0.2;
    c.sizes = std::move(sizes);
    c.V = Range::single(1.0);
    c.h = {0.0, 3.0, 0.02};
    c.observables = {"fidelity", "zeros"};
    c.output_dir = (g_cache / tag).string();
    c.workers = workers();
    return c;
}

const std::vector<SizeSpec> kNptSizes = {{21, 6}, {34, 6}, {55, 6}, {89, 6}, {144, 6}, {233, 6}};

Outcome c07() {
    const auto progress = [](int done, int total) {
        if (done % 50 == 0 || done == total) std::cerr << "  c07 " << done << "/" << total << "\n";
    };
    const SizeScanResult lx = run_size_scan(npt_config(kNptSizes, "npt-lx"), progress);
    const SizeScanResult ly = run_size_scan(npt_config({{21, 4}, {21, 6}, {21, 8}, {21, 10}}, "npt-ly"), progress);
    if (!lx.sweep.failures.empty() || !ly.sweep.failures.empty()) return {false, "sweep had failed points"};
    std::ostringstream d;
    d << "NPT(L_x):";
    for (const auto& r : lx.rows) d << ' ' << r.Lx << ':' << r.npt;
    bool constant = !ly.rows.empty();
    d << "; NPT(L_y @21):";
    for (const auto& r : ly.rows) {
        d << ' ' << r.Ly << ':' << r.npt;
        constant &= r.npt == ly.rows[0].npt;
    }
    bool fit_ok = false;
    if (lx.npt_fit) {
        fit_ok = lx.npt_fit->slope >= 0.03 && lx.npt_fit->slope <= 0.07 && lx.npt_fit->intercept >= 0.5 &&
                 lx.npt_fit->intercept <= 1.5;
        d << "; fit NPT = " << fmt(lx.npt_fit->slope, 3) << " L_x + " << fmt(lx.npt_fit->intercept, 3);
    }
    d << (constant ? "; constant in L_y" : "; varies with L_y");
    return {fit_ok && constant, d.str()};
}

Outcome c08() {
    const SizeScanResult lx = run_size_scan(npt_config(kNptSizes, "npt-lx"));
    bool ok = lx.rows.size() == kNptSizes.size();
    std::ostringstream d;
    for (const auto& r : lx.rows) {
        const int z = oracle::brute_zero_count(quasi_alpha(r.Lx).p, quasi_alpha(r.Lx).q, r.Lx);
        ok &= std::abs(r.npt - r.n_im_zeros) <= 1 && z == r.n_im_zeros;
        d << r.Lx << ": NPT " << r.npt << " zeros " << r.n_im_zeros << " (enumerated " << z << "); ";
    }
    return {ok, d.str()};
}

Outcome c09() {
    const EdgeSetup s;
    const DomainWallReport r = domain_wall_analysis(s);
    const double bound = 5 * s.h * s.h;
    const bool pert = !r.predicted.empty() && r.max_perturbation_error < bound;
    const bool ell = r.ellipse && r.ellipse->rms_residual < 0.1 * r.ellipse->b;
    const bool corr = r.pearson_mean > 0.8;
    std::ostringstream d;
    d << "perturbation max error " << fmt(r.max_perturbation_error, 3) << " (< " << bound << " " << (pert ? "ok" : "fails")
      << "); ";
    if (r.ellipse)
        d << "ellipse a=" << fmt(r.ellipse->a, 3) << " b=" << fmt(r.ellipse->b, 3) << " rms/b=" << fmt(r.ellipse->rms_residual / r.ellipse->b, 3)
          << " (" << (ell ? "ok" : "fails") << "); ";
    else
        d << "ellipse fit unavailable: " << r.ellipse_error << "; ";
    d << "Pearson r " << fmt(r.pearson_mean, 3) << " (" << (corr ? "ok" : "fails") << "), v_f " << fmt(r.fermi.v_f, 3);
    return {pert && ell && corr, d.str()};
}

SweepConfig impurity_config(int sep) {
    SweepConfig c;
    c.model.t2 = 0.2;
    c.model.impurity_separation = sep;
    c.sizes = {{20, 20}};
    c.V = Range::single(0.0);
    c.h = Range::single(0.0);
    c.gamma = {0.0, 6.0, 0.02};
    c.observables = {"max_abs_im"};
    c.output_dir = (g_cache / (sep == 1 ? "impurity-nn" : "impurity-nnn")).string();
    c.workers = workers();
    return c;
}

Outcome c10() {
    const ImpurityScanResult nn = run_impurity_scan(impurity_config(1));
    const ImpurityScanResult nnn = run_impurity_scan(impurity_config(2));
    auto list = [](const ImpurityScanResult& r) {
        std::ostringstream s;
        for (const auto& e : r.events) s << fmt(e.gamma, 4) << (e.breaking ? "" : "(restoring)") << ' ';
        return s.str();
    };
    const bool ok = nn.events.size() == 1 && nnn.events.size() == 2 && nnn.events[0].gamma < nnn.events[1].gamma;
    std::ostringstream d;
    d << "NN events [" << list(nn) << "] NNN events [" << list(nnn) << "]";
    if (nn.events.size() == 1) d << "; NN vs 3.356: " << fmt(nn.events[0].gamma - 3.356, 3);
    if (nnn.events.size() == 2)
        d << "; NNN vs 2.000, 3.400: " << fmt(nnn.events[0].gamma - 2.0, 3) << ", " << fmt(nnn.events[1].gamma - 3.4, 3);
    return {ok, d.str()};
}

Outcome c11() {
    SweepConfig c;
    c.model.kind = "two-chain";
    c.sizes = {{55, 2}};
    c.V = {0.0, 2.0, 0.1};
    c.h = {0.0, 3.0, 0.1};
    c.observables = {"ipr"};
    c.output_dir = (g_cache / "two-chain").string();
    c.workers = workers();
    const SweepResult r = run_phase_diagram(c);
    const RegionMap m = classify_regions(r.records, 2.0 / 55, 0.5);
    return {m.three_contiguous && r.failures.empty(),
            "components per region (extended, intermediate, localized): " + std::to_string(m.components[0]) + ", " +
                std::to_string(m.components[1]) + ", " + std::to_string(m.components[2])};
}

Outcome c12() {
    std::vector<std::pair<std::string, CMatrix>> suite;
    for (double g : {0.0, 0.5, 1.0, 2.0, 2.5, 4.0, 6.0}) {
        suite.emplace_back("four-site-a g=" + fmt(g), build_four_site(FourSiteKind::adjacent, 1.0, g).entries);
        suite.emplace_back("four-site-b g=" + fmt(g), build_four_site(FourSiteKind::non_adjacent, 1.0, g).entries);
    }
    for (int L : {5, 8, 12})
        for (double h : {0.0, 0.5, 1.5}) {
            const PotentialProfile p(1.0, h, quasi_alpha(L), L);
            suite.emplace_back("aah L=" + std::to_string(L), build_aah_chain(L, 1.0, p).entries);
            suite.emplace_back("aah-open L=" + std::to_string(L), build_aah_chain(L, 1.0, p, ChainBoundary::open).entries);
        }
    for (int L : {5, 6}) {
        const PotentialProfile p(1.2, 0.7, quasi_alpha(L), L);
        suite.emplace_back("two-chain L=" + std::to_string(L), build_two_chain(L, 1.0, 0.8, p).entries);
    }
    const OperatorMatrix hc = build_haldane_cylinder(3, 2, 1.0, 0.2, std::numbers::pi / 2);
    const LatticeMap map = map_for(hc);
    suite.emplace_back("haldane 3x2", hc.entries);
    suite.emplace_back("haldane 3x2 + boundary",
                       add_boundary_potential(hc, map, PotentialProfile(1.0, 0.6, quasi_alpha(3), 3)).entries);
    suite.emplace_back("haldane 3x2 + impurities", add_impurities(hc, map, ImpuritySpec{1, 1, 1.3}).entries);
    suite.emplace_back("haldane 3x2 + wall", add_domain_wall(hc, map, 0.4).entries);
    const OperatorMatrix hc2 = build_haldane_cylinder(2, 3, 1.0, 0.3, 1.0);
    suite.emplace_back("haldane 2x3 phi=1", hc2.entries);

    double worst = 0.0;
    std::string where;
    for (const auto& [name, H] : suite) {
        const std::vector<cplx> ref = oracle::eigenvalues(oracle::to_dense(H));
        double scale = 1.0;
        for (const cplx& z : ref) scale = std::max(scale, std::abs(z));
        for (const Spectrum& s : {decompose(H), eigenvalues_only(H)}) {
            const double e = oracle::multiset_distance(to_vec(s.eigenvalues), ref) / scale;
            if (e >= worst) {
                worst = e;
                where = name;
            }
        }
    }
    return {worst < 1e-7, std::to_string(suite.size()) + " matrices, worst relative deviation " + fmt(worst, 3) + " (" + where + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hqc acceptance checks"};
    std::vector<int> which;
    std::string cache = g_cache.string();
    app.add_option("--criterion", which, "criteria to run (default: all)")->check(CLI::Range(1, 12));
    app.add_option("--cache", cache, "directory for sweep caches");
    CLI11_PARSE(app, argc, argv);
    g_cache = cache;
    fs::create_directories(g_cache);
    if (which.empty())
        for (int i = 1; i <= 12; ++i) which.push_back(i);

    const std::array<Outcome (*)(), 12> fns = {c01, c02, c03, c04, c05, c06, c07, c08, c09, c10, c11, c12};
    bool all = true;
    for (int i : which) {
        Outcome o;
        try {
            o = fns[static_cast<size_t>(i - 1)]();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        all &= o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i << ": " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
