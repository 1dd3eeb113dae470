#include <cmath>

#include "hqc/errors.hpp"
#include "hqc/lattice.hpp"

namespace hqc {

namespace {

void check_same_map(const OperatorMatrix& H, const LatticeMap& map) {
    if (H.dim() != map.size()) throw DimensionError("operator dimension does not match the lattice map");
}

std::string base_model(const std::string& model) { return model.substr(0, model.find('+')); }

}  // namespace

OperatorMatrix build_aah_chain(int L, double t, const PotentialProfile& profile, ChainBoundary boundary) {
    if (L < 2) throw DimensionError("AAH chain needs L >= 2");
    if (profile.size() != L) throw DimensionError("profile length differs from chain length");
    OperatorMatrix H;
    H.entries = CMatrix::Zero(L, L);
    for (int m = 0; m + 1 < L; ++m) {
        H.entries(m, m + 1) += t;
        H.entries(m + 1, m) += t;
    }
    if (boundary == ChainBoundary::periodic) {
        H.entries(0, L - 1) += t;
        H.entries(L - 1, 0) += t;
    }
    for (int m = 0; m < L; ++m) H.entries(m, m) += profile[m];
    H.meta.model = boundary == ChainBoundary::periodic ? "aah_chain" : "aah_chain_open";
    H.meta.L_x = L;
    H.meta.L_y = 1;
    H.meta.t1 = t;
    H.meta.V = profile.V();
    H.meta.h = profile.h();
    H.meta.alpha_p = profile.alpha().p;
    H.meta.alpha_q = profile.alpha().q;
    return H;
}

OperatorMatrix build_two_chain(int L, double t, double lambda, const PotentialProfile& profile,
                               ChainBoundary boundary) {
    if (L < 2) throw DimensionError("two-chain model needs L >= 2");
    if (profile.size() != L) throw DimensionError("profile length differs from chain length");
    const LatticeMap map = LatticeMap::two_chain(L);
    OperatorMatrix H;
    H.entries = CMatrix::Zero(2 * L, 2 * L);
    for (int j = 0; j < 2; ++j) {
        for (int m = 0; m < L; ++m) {
            if (m + 1 == L && boundary == ChainBoundary::open) break;
            const int a = map.index({m, j});
            const int b = map.index({m + 1, j});
            H.entries(a, b) += t;
            H.entries(b, a) += t;
        }
    }
    for (int m = 0; m < L; ++m) H.entries(m, m) += profile[m];
    for (int m = 1; m < L; m += 2) {
        const int a = map.index({m, 0});
        const int b = map.index({m, 1});
        H.entries(a, b) += lambda;
        H.entries(b, a) += lambda;
    }
    H.meta.model = boundary == ChainBoundary::periodic ? "two_chain" : "two_chain_open";
    H.meta.L_x = L;
    H.meta.L_y = 2;
    H.meta.t1 = t;
    H.meta.lambda = lambda;
    H.meta.V = profile.V();
    H.meta.h = profile.h();
    H.meta.alpha_p = profile.alpha().p;
    H.meta.alpha_q = profile.alpha().q;
    return H;
}

std::vector<Bond> haldane_bonds(const LatticeMap& map, double t1, double t2, double phi) {
    using S = Sublattice;
    std::vector<Bond> bonds;
    const int Lx = map.Lx(), Ly = map.Ly();
    const cplx up = t2 * std::polar(1.0, phi);
    const cplx dn = t2 * std::polar(1.0, -phi);
    static constexpr int nnn[3][2] = {{1, 0}, {-1, 1}, {0, -1}};
    for (int y = 0; y < Ly; ++y) {
        for (int x = 0; x < Lx; ++x) {
            const int a = map.index({x, y, S::A});
            bonds.push_back({a, map.index({x, y, S::B}), t1});
            bonds.push_back({a, map.index({x - 1, y, S::B}), t1});
            if (y > 0) bonds.push_back({a, map.index({x, y - 1, S::B}), t1});
            for (const auto& d : nnn) {
                const int ty = y + d[1];
                if (ty < 0 || ty >= Ly) continue;
                bonds.push_back({a, map.index({x + d[0], ty, S::A}), up});
                bonds.push_back({map.index({x, y, S::B}), map.index({x + d[0], ty, S::B}), dn});
            }
        }
    }
    return bonds;
}

OperatorMatrix build_haldane_cylinder(int Lx, int Ly, double t1, double t2, double phi, int boundary_rows) {
    if (Lx < 2) throw DimensionError("Haldane cylinder needs L_x >= 2");
    const LatticeMap map = LatticeMap::honeycomb(Lx, Ly, boundary_rows);
    const int N = map.size();
    OperatorMatrix H;
    H.entries = CMatrix::Zero(N, N);
    for (const Bond& b : haldane_bonds(map, t1, t2, phi)) {
        H.entries(b.to, b.from) += b.amplitude;
        H.entries(b.from, b.to) += std::conj(b.amplitude);
    }
    H.meta.model = "haldane_cylinder";
    H.meta.L_x = Lx;
    H.meta.L_y = Ly;
    H.meta.t1 = t1;
    H.meta.t2 = t2;
    H.meta.phi = phi;
    H.meta.boundary_rows = boundary_rows;
    return H;
}

LatticeMap map_for(const OperatorMatrix& H) {
    const std::string base = base_model(H.meta.model);
    if (base == "haldane_cylinder") return LatticeMap::honeycomb(H.meta.L_x, H.meta.L_y, H.meta.boundary_rows);
    if (base == "two_chain" || base == "two_chain_open") return LatticeMap::two_chain(H.meta.L_x);
    if (base == "aah_chain" || base == "aah_chain_open") return LatticeMap::chain(H.meta.L_x);
    if (base == "four_site") return LatticeMap::four_site();
    throw InputError("no lattice map for model '" + H.meta.model + "'");
}

OperatorMatrix add_boundary_potential(const OperatorMatrix& H, const LatticeMap& map, const PotentialProfile& profile) {
    check_same_map(H, map);
    if (profile.size() != map.Lx()) throw DimensionError("profile length must equal L_x");
    OperatorMatrix out = H;
    if (profile.V() != 0.0) {
        for (int n = 0; n < map.Lx(); ++n)
            for (int i : map.boundary_sites_of_cell(n)) out.entries(i, i) += profile[n];
    }
    out.meta.model += "+boundary_potential";
    out.meta.V = profile.V();
    out.meta.h = profile.h();
    out.meta.alpha_p = profile.alpha().p;
    out.meta.alpha_q = profile.alpha().q;
    return out;
}

std::pair<int, int> impurity_sites(const LatticeMap& map, const ImpuritySpec& spec) {
    if (spec.separation != 1 && spec.separation != 2)
        throw PlacementError("impurity separation must be 1 or 2");
    if (spec.anchor < 0 || spec.anchor >= map.Lx())
        throw PlacementError("impurity anchor is not a boundary cell");
    if (spec.separation >= map.Lx()) throw PlacementError("boundary too short for the impurity pair");
    if (map.kind() == LatticeKind::honeycomb_cylinder) {
        // Top zigzag chain: B(n) - A(n+1) - B(n+1) - ...
        const int y = map.Ly() - 1;
        const int first = map.index({spec.anchor, y, Sublattice::B});
        const int second = spec.separation == 1 ? map.index({spec.anchor + 1, y, Sublattice::A})
                                                : map.index({spec.anchor + 1, y, Sublattice::B});
        return {first, second};
    }
    const int second_cell = map.wrap_x(spec.anchor + spec.separation);
    return {map.boundary_sites_of_cell(spec.anchor).front(), map.boundary_sites_of_cell(second_cell).front()};
}

OperatorMatrix add_impurities(const OperatorMatrix& H, const LatticeMap& map, const ImpuritySpec& spec) {
    check_same_map(H, map);
    impurity_sites(map, spec);
    OperatorMatrix out = H;
    if (spec.gamma != 0.0) {
        const auto [first, second] = impurity_sites(map, spec);
        out.entries(first, first) += cplx(0.0, spec.gamma * spec.w1);
        out.entries(second, second) += cplx(0.0, spec.gamma * spec.w2);
    }
    out.meta.model += "+impurities";
    out.meta.impurity = spec.to_json();
    return out;
}

OperatorMatrix add_domain_wall(const OperatorMatrix& H, const LatticeMap& map, double gamma) {
    check_same_map(H, map);
    if (gamma < 0.0) throw InputError("domain wall strength must be non-negative");
    OperatorMatrix out = H;
    const int Lx = map.Lx();
    const int gain_end = Lx / 2;
    const int loss_begin = (Lx + 1) / 2;
    if (gamma != 0.0) {
        for (int n = 0; n < Lx; ++n) {
            double s = 0.0;
            if (n < gain_end) s = 1.0;
            else if (n >= loss_begin) s = -1.0;
            if (s == 0.0) continue;
            for (int i : map.boundary_sites_of_cell(n)) out.entries(i, i) += cplx(0.0, s * gamma);
        }
    }
    out.meta.model += "+domain_wall";
    out.meta.gamma = gamma;
    return out;
}

OperatorMatrix build_four_site(FourSiteKind kind, double t, double gamma) {
    if (!(t > 0.0)) throw InputError("four-site hopping must be positive");
    OperatorMatrix H;
    H.entries = CMatrix::Zero(4, 4);
    for (int m = 0; m < 3; ++m) {
        H.entries(m, m + 1) = t;
        H.entries(m + 1, m) = t;
    }
    const cplx ig(0.0, gamma);
    H.entries(0, 0) = ig;
    if (kind == FourSiteKind::non_adjacent) H.entries(2, 2) = ig;
    else H.entries(1, 1) = ig;
    H.meta.model = "four_site";
    H.meta.L_x = 4;
    H.meta.L_y = 1;
    H.meta.t1 = t;
    H.meta.gamma = gamma;
    H.meta.impurity = kind == FourSiteKind::adjacent ? "adjacent" : "non-adjacent";
    return H;
}

}  // namespace hqc
