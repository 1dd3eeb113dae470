#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hqc/lattice.hpp"

namespace hqc {

struct ChiralModeParams {
    double v_f = 1.0;
    int n = 0;
    double eps_r = 0.0;
    double eps_i = 0.0;
};

struct EllipseFit {
    double a = 0.0;
    double b = 0.0;
    double rms_residual = 0.0;  // rms of |Im E| - b*sqrt(1 - Re^2/a^2)
};

// Imaginary part of V(x) on the continuum, -V sin(2 pi alpha x) sinh h.
double imag_potential(const PotentialProfile& profile, double x);

// psi(x) = exp(i eps_r x / v_f) exp( int_0^x (Im V - eps_i + d) / v_f ) on
// x = 0..L (L+1 samples, unnormalized, psi(0) = 1). d is the gain/loss
// term +gamma / -gamma of the domain wall. Trapezoid on the site grid.
std::vector<cplx> chiral_amplitude(const PotentialProfile& profile, double v_f, double eps_r, double eps_i,
                                   std::optional<double> domain_gamma = std::nullopt);
// |psi(x)|^2 on x = 0..L-1, normalized to unit sum.
std::vector<double> chiral_wavefunction(const PotentialProfile& profile, double v_f, double eps_r, double eps_i,
                                        std::optional<double> domain_gamma = std::nullopt);

// (1/L) int_0^L Im V(x) dx by Gauss-Kronrod quadrature, panel per unit length.
double eps_i_average(const PotentialProfile& profile);
double eps_i_closed_form(double V, double h, double alpha, int L);

// eps_r = 2 pi n v_f / L (the value that makes psi(L) = psi(0)); eps_i shared.
std::vector<ChiralModeParams> quantized_energies(double v_f, const PotentialProfile& profile, int n_min, int n_max);

// v_f = dE/dk from two levels with known lattice momenta k (k difference
// wrapped into (-pi, pi]).
double fit_fermi_velocity(double e1, double k1, double e2, double k2);
// Lattice momentum of a state under the one-cell translation, arg <psi|T|psi>.
double edge_momentum(const CVector& state, const LatticeMap& map);

enum class PerturbationReference {
    bare_lattice,       // psi0 from H without boundary potential: E1 = sum |psi|^2 V cos(theta + i h) to first order in h
    hermitian_potential // psi0 from H with the real potential V cos(theta): E1 = -i h V sum |psi|^2 sin(theta)
};

struct PerturbationOptions {
    PerturbationReference reference = PerturbationReference::bare_lattice;
    std::optional<double> domain_gamma;  // adds i*gamma*sum s_n |psi_n|^2
};

cplx perturbation_energy(const CVector& psi0, const PotentialProfile& profile, const LatticeMap& map,
                         const PerturbationOptions& opt = {});

// Least squares on Re^2/a^2 + Im^2/b^2 = 1 over (Re E, |Im E|).
EllipseFit half_ellipse_fit(const std::vector<cplx>& edge_eigenvalues);


std::array<cplx, 4> four_site_eigs_closed(FourSiteKind kind, double t, double gamma);
std::vector<double> exceptional_points(FourSiteKind kind, double t);

}  // namespace hqc
