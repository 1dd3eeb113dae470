#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqc/eigen.hpp"
#include "hqc/lattice.hpp"
#include "hqc/observables.hpp"
#include "hqc/theory.hpp"

namespace hqc {

struct Comparison {
    std::string quantity;
    double analytic = 0.0;
    double numeric = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
};
Comparison compare(std::string quantity, double analytic, double numeric);
nlohmann::json comparisons_json(const std::vector<Comparison>& c);

// Within each cluster of degenerate eigenvalues of a Hermitian spectrum,
// rotate to the eigenbasis of the projector on support (largest weight
// first). Separates top- and bottom-edge modes at equal energy.
void resolve_edge_degeneracies(Spectrum& hermitian, const std::vector<int>& support, double tol = 1e-8);

// Honeycomb cylinder with a boundary potential and an optional gain/loss wall.
struct EdgeSetup {
    int Lx = 20;
    int Ly = 20;
    double t1 = 1.0;
    double t2 = 0.2;
    double phi = 1.5707963267948966;
    double V = 1.0;
    double h = 0.2;
    double gamma = 0.2;
    std::optional<Rational> alpha;
    double gap_edge = 1.0;
    double edge_cut = 0.1;      // edge density for in-gap states of the full model
    double ref_edge_cut = 0.3;  // edge density for top-edge states of the bare lattice

    Rational effective_alpha() const { return alpha ? *alpha : quasi_alpha(Lx); }
    nlohmann::json to_json() const;
};

struct FermiVelocity {
    double v_f = 0.0;
    double e1 = 0.0, k1 = 0.0;
    double e2 = 0.0, k2 = 0.0;
};
// From the two top-edge levels of the bare lattice nearest E = 0.
FermiVelocity edge_fermi_velocity(const EdgeSetup& s);

struct DomainWallReport {
    Spectrum spectrum;
    std::vector<double> edge_dens;
    std::vector<int> window;  // in-gap states with edge density above edge_cut
    std::optional<EllipseFit> ellipse;
    std::string ellipse_error;
    std::vector<cplx> predicted;  // E0 + E1 per bare top-edge state
    std::vector<cplx> matched;    // nearest in-gap eigenvalue of the full model
    double max_perturbation_error = 0.0;
    FermiVelocity fermi;
    double eps_i = 0.0;
    std::vector<double> analytic_profile;
    std::vector<double> numeric_profile;  // mean of the window states' top-row densities
    double pearson_mean = 0.0;
    double pearson_max_im = 0.0;  // against the window state with the largest Im E
};

DomainWallReport domain_wall_analysis(const EdgeSetup& s);

// Level spacing 2 pi |v_f| / L against the mean adjacent Re spacing of the
// distinct top-edge levels with |Re E| < gap_edge / 2 in the h-deformed
// model without the wall.
Comparison level_spacing_check(const EdgeSetup& s);

// The comparison table written by the theory-check command.
std::vector<Comparison> theory_check(const EdgeSetup& s);

}  // namespace hqc
