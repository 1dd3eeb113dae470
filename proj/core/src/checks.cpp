#include "hqc/checks.hpp"

#include <algorithm>
#include <cmath>

#include "hqc/errors.hpp"

namespace hqc {

using nlohmann::json;

Comparison compare(std::string quantity, double analytic, double numeric) {
    const double abs_err = std::abs(analytic - numeric);
    const double rel_err = analytic != 0.0 ? abs_err / std::abs(analytic) : abs_err;
    return {std::move(quantity), analytic, numeric, abs_err, rel_err};
}

json comparisons_json(const std::vector<Comparison>& c) {
    json a = json::array();
    for (const auto& x : c)
        a.push_back({{"quantity", x.quantity},
                     {"analytic", x.analytic},
                     {"numeric", x.numeric},
                     {"abs_err", x.abs_err},
                     {"rel_err", x.rel_err}});
    return a;
}

void resolve_edge_degeneracies(Spectrum& spec, const std::vector<int>& support, double tol) {
    const int n = spec.size();
    int i = 0;
    while (i < n) {
        int j = i + 1;
        while (j < n && spec.eigenvalues[j].real() - spec.eigenvalues[i].real() < tol) ++j;
        if (j - i > 1) {
            const CMatrix S = spec.right_vectors.middleCols(i, j - i);
            CMatrix St(static_cast<Eigen::Index>(support.size()), S.cols());
            for (size_t r = 0; r < support.size(); ++r) St.row(static_cast<Eigen::Index>(r)) = S.row(support[r]);
            const CMatrix P = St.adjoint() * St;
            Eigen::SelfAdjointEigenSolver<CMatrix> es(P);
            spec.right_vectors.middleCols(i, j - i) = S * es.eigenvectors().rowwise().reverse();
        }
        i = j;
    }
}

json EdgeSetup::to_json() const {
    const Rational a = effective_alpha();
    return {{"L_x", Lx},   {"L_y", Ly},       {"t1", t1},           {"t2", t2},
            {"phi", phi},  {"V", V},          {"h", h},             {"gamma", gamma},
            {"alpha_p", a.p}, {"alpha_q", a.q}, {"gap_edge", gap_edge}, {"edge_cut", edge_cut},
            {"ref_edge_cut", ref_edge_cut}};
}

namespace {

struct Reference {
    LatticeMap map;
    Spectrum spec;
    std::vector<double> edge_dens;
    std::vector<int> top;  // top-edge states with |E| < gap_edge
};

Reference bare_reference(const EdgeSetup& s) {
    Reference r{LatticeMap::honeycomb(s.Lx, s.Ly), {}, {}, {}};
    const OperatorMatrix H0 = build_haldane_cylinder(s.Lx, s.Ly, s.t1, s.t2, s.phi);
    r.spec = decompose_hermitian(H0.entries);
    resolve_edge_degeneracies(r.spec, r.map.boundary_sites());
    r.edge_dens = edge_densities(r.spec, r.map);
    for (int k = 0; k < r.spec.size(); ++k)
        if (std::abs(r.spec.eigenvalues[k].real()) < s.gap_edge && r.edge_dens[static_cast<size_t>(k)] > s.ref_edge_cut)
            r.top.push_back(k);
    return r;
}

FermiVelocity fermi_from(const Reference& r) {
    std::vector<int> c = r.top;
    std::stable_sort(c.begin(), c.end(), [&](int a, int b) {
        return std::abs(r.spec.eigenvalues[a].real()) < std::abs(r.spec.eigenvalues[b].real());
    });
    if (c.size() < 2) throw InputError("fewer than two top-edge levels in the gap");
    FermiVelocity f;
    f.e1 = r.spec.eigenvalues[c[0]].real();
    f.e2 = r.spec.eigenvalues[c[1]].real();
    f.k1 = edge_momentum(r.spec.right_vectors.col(c[0]), r.map);
    f.k2 = edge_momentum(r.spec.right_vectors.col(c[1]), r.map);
    f.v_f = fit_fermi_velocity(f.e1, f.k1, f.e2, f.k2);
    return f;
}

std::vector<double> top_row_density(const CVector& psi, const LatticeMap& map) {
    std::vector<double> p(static_cast<size_t>(map.Lx()), 0.0);
    double sum = 0.0;
    for (int x = 0; x < map.Lx(); ++x) {
        for (int i : map.boundary_sites_of_cell(x)) p[static_cast<size_t>(x)] += std::norm(psi[i]);
        sum += p[static_cast<size_t>(x)];
    }
    if (!(sum > 0.0)) throw UndefinedObservableError("state has no weight on the top row");
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

FermiVelocity edge_fermi_velocity(const EdgeSetup& s) { return fermi_from(bare_reference(s)); }

DomainWallReport domain_wall_analysis(const EdgeSetup& s) {
    const LatticeMap map = LatticeMap::honeycomb(s.Lx, s.Ly);
    const Rational a = s.effective_alpha();
    const PotentialProfile profile(s.V, s.h, a, s.Lx);
    OperatorMatrix H = build_haldane_cylinder(s.Lx, s.Ly, s.t1, s.t2, s.phi);
    H = add_boundary_potential(H, map, profile);
    H = add_domain_wall(H, map, s.gamma);

    DomainWallReport rep;
    rep.spectrum = decompose(H);
    rep.edge_dens = edge_densities(rep.spectrum, map);
    for (int k = 0; k < rep.spectrum.size(); ++k)
        if (std::abs(rep.spectrum.eigenvalues[k].real()) < s.gap_edge &&
            rep.edge_dens[static_cast<size_t>(k)] > s.edge_cut)
            rep.window.push_back(k);

    std::vector<cplx> wev;
    for (int k : rep.window) wev.push_back(rep.spectrum.eigenvalues[k]);
    try {
        rep.ellipse = half_ellipse_fit(wev);
    } catch (const FitError& e) {
        rep.ellipse_error = e.what();
    }

    const Reference ref = bare_reference(s);
    PerturbationOptions po;
    po.reference = PerturbationReference::bare_lattice;
    po.domain_gamma = s.gamma;
    for (int k : ref.top) {
        const cplx E = ref.spec.eigenvalues[k] +
                       perturbation_energy(ref.spec.right_vectors.col(k), profile, map, po);
        cplx best = wev.empty() ? cplx(NAN, NAN) : wev.front();
        for (const cplx& w : wev)
            if (std::abs(w - E) < std::abs(best - E)) best = w;
        rep.predicted.push_back(E);
        rep.matched.push_back(best);
        rep.max_perturbation_error = std::max(rep.max_perturbation_error, std::abs(best - E));
    }

    rep.fermi = fermi_from(ref);
    rep.eps_i = eps_i_average(profile);
    rep.analytic_profile = chiral_wavefunction(profile, rep.fermi.v_f, 0.0, rep.eps_i, s.gamma);
    if (!rep.window.empty()) {
        rep.numeric_profile.assign(static_cast<size_t>(s.Lx), 0.0);
        int kmax = rep.window.front();
        for (int k : rep.window) {
            const auto p = top_row_density(rep.spectrum.right_vectors.col(k), map);
            for (size_t x = 0; x < p.size(); ++x) rep.numeric_profile[x] += p[x] / static_cast<double>(rep.window.size());
            if (rep.spectrum.eigenvalues[k].imag() > rep.spectrum.eigenvalues[kmax].imag()) kmax = k;
        }
        rep.pearson_mean = pearson(rep.analytic_profile, rep.numeric_profile);
        rep.pearson_max_im = pearson(rep.analytic_profile, top_row_density(rep.spectrum.right_vectors.col(kmax), map));
    }
    return rep;
}

Comparison level_spacing_check(const EdgeSetup& s) {
    const FermiVelocity f = edge_fermi_velocity(s);
    const LatticeMap map = LatticeMap::honeycomb(s.Lx, s.Ly);
    const PotentialProfile profile(s.V, s.h, s.effective_alpha(), s.Lx);
    const OperatorMatrix H =
        add_boundary_potential(build_haldane_cylinder(s.Lx, s.Ly, s.t1, s.t2, s.phi), map, profile);
    const Spectrum spec = decompose(H);
    const auto ed = edge_densities(spec, map);
    // The edge branch bends toward the gap edges; the linear relation holds
    // around E = 0, so only the inner half of the gap is used. Degenerate
    // levels count once.
    std::vector<double> re;
    for (int k = 0; k < spec.size(); ++k)
        if (std::abs(spec.eigenvalues[k].real()) < 0.5 * s.gap_edge && ed[static_cast<size_t>(k)] > s.ref_edge_cut)
            re.push_back(spec.eigenvalues[k].real());
    std::sort(re.begin(), re.end());
    re.erase(std::unique(re.begin(), re.end(), [](double a, double b) { return std::abs(a - b) < 1e-6; }), re.end());
    if (re.size() < 2) throw InputError("fewer than two in-gap edge levels");
    const double numeric = (re.back() - re.front()) / static_cast<double>(re.size() - 1);
    const auto q = quantized_energies(f.v_f, profile, 0, 1);
    return compare("edge level spacing", std::abs(q[1].eps_r - q[0].eps_r), numeric);
}

std::vector<Comparison> theory_check(const EdgeSetup& s) {
    std::vector<Comparison> out;
    const Rational a = s.effective_alpha();
    const PotentialProfile profile(s.V, s.h, a, s.Lx);
    out.push_back(compare("eps_i", eps_i_closed_form(s.V, s.h, a.value(), s.Lx), eps_i_average(profile)));
    out.push_back(level_spacing_check(s));

    const DomainWallReport dw = domain_wall_analysis(s);
    out.push_back(compare("perturbation max |E0+E1 - E|", 0.0, dw.max_perturbation_error));
    out.push_back(compare("domain-wall profile pearson r", 1.0, dw.pearson_mean));
    if (dw.ellipse) out.push_back(compare("half-ellipse rms / b", 0.0, dw.ellipse->rms_residual / dw.ellipse->b));

    for (FourSiteKind kind : {FourSiteKind::non_adjacent, FourSiteKind::adjacent}) {
        const auto eps = exceptional_points(kind, s.t1);
        const std::string tag = kind == FourSiteKind::adjacent ? "adjacent" : "non-adjacent";
        if (kind == FourSiteKind::non_adjacent) {
            out.push_back(compare("four-site " + tag + " EP1", (std::sqrt(5.0) - 1.0) * s.t1, eps.at(0)));
            out.push_back(compare("four-site " + tag + " EP2", (std::sqrt(5.0) + 1.0) * s.t1, eps.at(1)));
        } else {
            out.push_back(compare("four-site " + tag + " EP", std::sqrt(5.0) / 2.0 * s.t1, eps.at(0)));
        }
    }
    return out;
}

}  // namespace hqc
