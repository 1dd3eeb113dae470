#pragma once

// Reference computations that share no code with the library: they are the
// second route for every derived check in the test suite.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Dense = std::vector<std::vector<cplx>>;

// Upper Hessenberg form by Householder reflections (similarity transform).
Dense hessenberg(Dense A);
// Monic characteristic polynomial of A, coefficients c[0..N] with c[N] = 1,
// via Hyman-style recurrence on the Hessenberg form.
std::vector<cplx> charpoly(const Dense& A);
// Characteristic polynomial by Faddeev-LeVerrier (second route, small N).
std::vector<cplx> charpoly_leverrier(const Dense& A);
// det(A - z I) evaluated directly on the Hessenberg form.
cplx hessenberg_det(const Dense& Hs, cplx z);
// Roots of a monic polynomial by Aberth-Ehrlich iteration.
std::vector<cplx> poly_roots(const std::vector<cplx>& c);
// Eigenvalues as characteristic roots, Newton-polished on hessenberg_det.
std::vector<cplx> eigenvalues(const Dense& A);
// Determinant by cofactor (Laplace) expansion, N <= 12.
cplx cofactor_det(const Dense& A);

// Honeycomb cylinder rebuilt from real-space geometry: sites placed in the
// plane, NN at distance 1/sqrt(3), NNN at distance 1 (lattice constant 1),
// NNN phase sign from the turn direction through the shared neighbour.
Dense haldane_geometric(int Lx, int Ly, double t1, double t2, double phi);

// Sign changes of -sin(2 pi p n / q) around the ring, by direct enumeration.
int brute_zero_count(long p, long q, int L);

// (1/L) int_0^L -V sin(2 pi alpha x) sinh(h) dx by composite Simpson.
double simpson_eps_i(double V, double h, double alpha, int L, int panels_per_unit = 200);

// Greedy-free multiset distance: max over a of min over b |a - b| (and reverse).
double multiset_distance(const std::vector<cplx>& a, const std::vector<cplx>& b);

Dense to_dense(const Eigen::MatrixXcd& M);

}  // namespace oracle
