#include "hqc/lattice.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "hqc/errors.hpp"
#include "hqc/io.hpp"

namespace hqc {

std::string to_string(LatticeKind kind) {
    switch (kind) {
        case LatticeKind::chain: return "chain";
        case LatticeKind::two_chain: return "two-chain";
        case LatticeKind::honeycomb_cylinder: return "honeycomb-cylinder";
        case LatticeKind::four_site: return "four-site";
    }
    return "unknown";
}

LatticeMap LatticeMap::chain(int L) {
    if (L < 1) throw DimensionError("chain length must be positive");
    return LatticeMap(LatticeKind::chain, L, 1, 1);
}

LatticeMap LatticeMap::two_chain(int L) {
    if (L < 1) throw DimensionError("two-chain length must be positive");
    return LatticeMap(LatticeKind::two_chain, L, 2, 1);
}

LatticeMap LatticeMap::honeycomb(int Lx, int Ly, int boundary_rows) {
    if (Lx < 1) throw DimensionError("L_x must be positive");
    if (Ly < 2) throw GeometryError("honeycomb cylinder needs L_y >= 2; use the chain builders");
    if (boundary_rows != 1 && boundary_rows != 2)
        throw GeometryError("boundary_rows must be 1 or 2");
    return LatticeMap(LatticeKind::honeycomb_cylinder, Lx, Ly, boundary_rows);
}

LatticeMap LatticeMap::four_site() { return LatticeMap(LatticeKind::four_site, 4, 1, 1); }

int LatticeMap::size() const {
    switch (kind_) {
        case LatticeKind::chain: return lx_;
        case LatticeKind::two_chain: return 2 * lx_;
        case LatticeKind::honeycomb_cylinder: return 2 * lx_ * ly_;
        case LatticeKind::four_site: return 4;
    }
    return 0;
}

int LatticeMap::wrap_x(int x) const {
    int r = x % lx_;
    return r < 0 ? r + lx_ : r;
}

int LatticeMap::index(const Site& s) const {
    const int x = wrap_x(s.x);
    if (s.y < 0 || s.y >= ly_) throw GeometryError("row index outside the open y range");
    if (kind_ == LatticeKind::honeycomb_cylinder)
        return 2 * (s.y * lx_ + x) + static_cast<int>(s.sub);
    if (s.sub != Sublattice::A) throw GeometryError("sublattice B exists only on the honeycomb");
    return s.y * lx_ + x;
}

Site LatticeMap::site(int idx) const {
    if (idx < 0 || idx >= size()) throw DimensionError("flat index out of range");
    if (kind_ == LatticeKind::honeycomb_cylinder) {
        const int cell = idx / 2;
        return {cell % lx_, cell / lx_, static_cast<Sublattice>(idx % 2)};
    }
    return {idx % lx_, idx / lx_, Sublattice::A};
}

std::vector<int> LatticeMap::boundary_sites_of_cell(int cell) const {
    const int x = wrap_x(cell);
    switch (kind_) {
        case LatticeKind::chain:
        case LatticeKind::four_site:
        case LatticeKind::two_chain:
            return {x};
        case LatticeKind::honeycomb_cylinder: {
            std::vector<int> out{index({x, ly_ - 1, Sublattice::B})};
            if (rows_ == 2) out.push_back(index({x, ly_ - 1, Sublattice::A}));
            return out;
        }
    }
    return {};
}

std::vector<int> LatticeMap::boundary_sites() const {
    std::vector<int> out;
    for (int n = 0; n < lx_; ++n)
        for (int i : boundary_sites_of_cell(n)) out.push_back(i);
    return out;
}

bool LatticeMap::is_boundary(int idx) const {
    const Site s = site(idx);
    switch (kind_) {
        case LatticeKind::chain:
        case LatticeKind::four_site: return true;
        case LatticeKind::two_chain: return s.y == 0;
        case LatticeKind::honeycomb_cylinder:
            if (s.y != ly_ - 1) return false;
            return s.sub == Sublattice::B || rows_ == 2;
    }
    return false;
}

bool is_fibonacci(long n) {
    if (n < 1) return false;
    long a = 1, b = 1;
    while (b < n) {
        const long c = a + b;
        a = b;
        b = c;
    }
    return b == n;
}

Rational quasi_alpha(int L) {
    if (L < 1) throw InputError("alpha needs a positive length");
    if (L <= 2) return {1, L};
    if (is_fibonacci(L)) {
        long a = 1, b = 1;
        while (b < L) {
            const long c = a + b;
            a = b;
            b = c;
        }
        return {a, b};
    }
    const double target = L * (std::sqrt(5.0) - 1.0) / 2.0;
    long best = 1;
    double best_d = 1e300;
    for (long p = 1; p < L; ++p) {
        if (std::gcd(p, static_cast<long>(L)) != 1) continue;
        const double d = std::abs(p - target);
        if (d < best_d) {
            best_d = d;
            best = p;
        }
    }
    return {best, L};
}

PotentialProfile::PotentialProfile(double V, double h, Rational alpha, int length)
    : V_(V), h_(h), alpha_(alpha) {
    if (alpha.q <= 0) throw InputError("alpha denominator must be positive");
    if (length < 0) throw DimensionError("negative profile length");
    values_.resize(static_cast<size_t>(length));
    const double ch = std::cosh(h), sh = std::sinh(h);
    for (int n = 0; n < length; ++n) {
        const double th = phase(n);
        values_[static_cast<size_t>(n)] = V * cplx(std::cos(th) * ch, -std::sin(th) * sh);
    }
}

double PotentialProfile::phase(int n) const {
    long r = (alpha_.p * static_cast<long>(n)) % alpha_.q;
    if (r < 0) r += alpha_.q;
    return 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(alpha_.q);
}

nlohmann::json ImpuritySpec::to_json() const {
    return {{"anchor", anchor}, {"separation", separation}, {"gamma", gamma}, {"weights", {w1, w2}}};
}

nlohmann::json ModelParams::to_json() const {
    nlohmann::json j;
    j["model"] = model;
    j["L_x"] = L_x;
    j["L_y"] = L_y;
    j["t1"] = t1;
    j["t2"] = t2;
    j["phi"] = phi;
    j["V"] = V;
    j["h"] = h;
    j["alpha_p"] = alpha_p;
    j["alpha_q"] = alpha_q;
    j["gamma"] = gamma;
    j["lambda"] = lambda;
    j["boundary_rows"] = boundary_rows;
    j["impurity"] = impurity;
    return j;
}

ModelParams ModelParams::from_json(const nlohmann::json& j) {
    ModelParams m;
    m.model = j.at("model").get<std::string>();
    m.L_x = j.at("L_x").get<int>();
    m.L_y = j.at("L_y").get<int>();
    m.t1 = j.at("t1").get<double>();
    m.t2 = j.at("t2").get<double>();
    m.phi = j.at("phi").get<double>();
    m.V = j.at("V").get<double>();
    m.h = j.at("h").get<double>();
    m.alpha_p = j.at("alpha_p").get<long>();
    m.alpha_q = j.at("alpha_q").get<long>();
    m.gamma = j.at("gamma").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.boundary_rows = j.at("boundary_rows").get<int>();
    m.impurity = j.value("impurity", nlohmann::json());
    return m;
}

std::string ModelParams::hash() const { return sha256_hex(to_json().dump()); }

std::vector<int> translation_permutation(const LatticeMap& map) {
    std::vector<int> perm(static_cast<size_t>(map.size()));
    for (int i = 0; i < map.size(); ++i) {
        Site s = map.site(i);
        s.x += 1;
        perm[static_cast<size_t>(i)] = map.index(s);
    }
    return perm;
}

}  // namespace hqc
