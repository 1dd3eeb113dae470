#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace hqc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class LatticeKind { chain, two_chain, honeycomb_cylinder, four_site };
enum class Sublattice : int { A = 0, B = 1 };

std::string to_string(LatticeKind kind);

// Edges of the cylinder run along x and are zigzag terminated. The top row
// ends on dangling B sites, the bottom row on dangling A sites.
inline constexpr const char* kEdgeOrientation = "zigzag";

struct Site {
    int x = 0;
    int y = 0;
    Sublattice sub = Sublattice::A;
    bool operator==(const Site&) const = default;
};

// Flat index layout:
//   chain            idx = x
//   two-chain        idx = y*L + x      (y = 0 is the AAH chain, y = 1 the free chain)
//   honeycomb        idx = 2*(y*Lx + x) + sub
//   four-site        idx = x
// x is periodic everywhere, y is open.
class LatticeMap {
public:
    static LatticeMap chain(int L);
    static LatticeMap two_chain(int L);
    static LatticeMap honeycomb(int Lx, int Ly, int boundary_rows = 1);
    static LatticeMap four_site();

    LatticeKind kind() const { return kind_; }
    int Lx() const { return lx_; }
    int Ly() const { return ly_; }
    int size() const;
    int boundary_rows() const { return rows_; }

    int wrap_x(int x) const;
    // x is wrapped; y or sublattice out of range throws GeometryError.
    int index(const Site& s) const;
    Site site(int idx) const;

    // Sites carrying the boundary potential, ordered by cell. With two rows
    // the cell n contributes (B(n,Ly-1), A(n,Ly-1)) in that order.
    std::vector<int> boundary_sites() const;
    std::vector<int> boundary_sites_of_cell(int cell) const;
    bool is_boundary(int idx) const;

private:
    LatticeMap(LatticeKind k, int lx, int ly, int rows) : kind_(k), lx_(lx), ly_(ly), rows_(rows) {}
    LatticeKind kind_;
    int lx_;
    int ly_;
    int rows_;
};

struct Rational {
    long p = 0;
    long q = 1;
    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
    bool operator==(const Rational&) const = default;
};

bool is_fibonacci(long n);
// F_{n-1}/F_n when L is a Fibonacci number; otherwise p/L with p the integer
// coprime to L closest to L*(sqrt(5)-1)/2.
Rational quasi_alpha(int L);

class PotentialProfile {
public:
    PotentialProfile() = default;
    PotentialProfile(double V, double h, Rational alpha, int length);

    double V() const { return V_; }
    double h() const { return h_; }
    Rational alpha() const { return alpha_; }
    int size() const { return static_cast<int>(values_.size()); }
    const std::vector<cplx>& values() const { return values_; }
    cplx operator[](int n) const { return values_[static_cast<size_t>(n)]; }
    // 2*pi*alpha*n reduced modulo 2*pi through exact integer arithmetic.
    double phase(int n) const;

private:
    double V_ = 0.0;
    double h_ = 0.0;
    Rational alpha_{};
    std::vector<cplx> values_;
};

// Impurities sit on consecutive sites of the boundary chain. On the
// honeycomb top edge the chain runs B(n) - A(n+1) - B(n+1), so the pair is
// B(anchor) with A(anchor+1) (NN) or B(anchor+1) (NNN). Chains use sites
// anchor and anchor + separation.
struct ImpuritySpec {
    int anchor = 0;       // boundary cell
    int separation = 1;   // 1 = NN, 2 = NNN
    double gamma = 0.0;
    double w1 = 1.0;
    double w2 = 0.5;
    nlohmann::json to_json() const;
};

struct ModelParams {
    std::string model;
    int L_x = 0;
    int L_y = 0;
    double t1 = 0.0;
    double t2 = 0.0;
    double phi = 0.0;
    double V = 0.0;
    double h = 0.0;
    long alpha_p = 0;
    long alpha_q = 1;
    double gamma = 0.0;
    double lambda = 0.0;
    int boundary_rows = 1;
    nlohmann::json impurity;  // null when absent

    nlohmann::json to_json() const;
    static ModelParams from_json(const nlohmann::json& j);
    // SHA-256 of the canonical JSON dump, lowercase hex.
    std::string hash() const;
};

struct OperatorMatrix {
    CMatrix entries;
    ModelParams meta;
    int dim() const { return static_cast<int>(entries.rows()); }
};

enum class ChainBoundary { periodic, open };
enum class FourSiteKind { adjacent, non_adjacent };

OperatorMatrix build_aah_chain(int L, double t, const PotentialProfile& profile,
                               ChainBoundary boundary = ChainBoundary::periodic);
// Rungs couple site m of both chains for odd m (0-based).
OperatorMatrix build_two_chain(int L, double t, double lambda, const PotentialProfile& profile,
                               ChainBoundary boundary = ChainBoundary::periodic);
// Clockwise NNN circulation carries exp(+i phi). A->A hops along (1,0),
// (-1,1), (0,-1) in (a1,a2) cell units are clockwise; B->B the reverse.
OperatorMatrix build_haldane_cylinder(int Lx, int Ly, double t1, double t2, double phi,
                                      int boundary_rows = 1);
LatticeMap map_for(const OperatorMatrix& H);

OperatorMatrix add_boundary_potential(const OperatorMatrix& H, const LatticeMap& map,
                                      const PotentialProfile& profile);
OperatorMatrix add_impurities(const OperatorMatrix& H, const LatticeMap& map, const ImpuritySpec& spec);
// Flat indices of the (weight w1, weight w2) impurity sites.
std::pair<int, int> impurity_sites(const LatticeMap& map, const ImpuritySpec& spec);
// +i*gamma on cells x < Lx/2, -i*gamma on cells x >= Lx/2. For odd Lx the
// middle cell gets nothing so the added imaginary parts still cancel.
OperatorMatrix add_domain_wall(const OperatorMatrix& H, const LatticeMap& map, double gamma);
OperatorMatrix build_four_site(FourSiteKind kind, double t, double gamma);

// Independent enumeration of bonds, used by the translation check and tests.
struct Bond {
    int from;
    int to;
    cplx amplitude;  // H(to, from) += amplitude, H(from, to) += conj(amplitude)
};
std::vector<Bond> haldane_bonds(const LatticeMap& map, double t1, double t2, double phi);

// One-cell translation x -> x+1 as a permutation of flat indices.
std::vector<int> translation_permutation(const LatticeMap& map);

}  // namespace hqc
