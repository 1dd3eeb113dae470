#include "hqc/theory.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hqc/errors.hpp"

namespace hqc {

namespace {

constexpr double kPi = std::numbers::pi;

// Domain-wall sign per cell, same split as add_domain_wall.
double domain_sign(int n, int L) {
    if (n < L / 2) return 1.0;
    if (n >= (L + 1) / 2) return -1.0;
    return 0.0;
}

}  // namespace

double imag_potential(const PotentialProfile& profile, double x) {
    return -profile.V() * std::sin(2.0 * kPi * profile.alpha().value() * x) * std::sinh(profile.h());
}

std::vector<cplx> chiral_amplitude(const PotentialProfile& profile, double v_f, double eps_r, double eps_i,
                                   std::optional<double> domain_gamma) {
    if (v_f == 0.0) throw SingularParameterError("Fermi velocity must be nonzero");
    const int L = profile.size();
    if (L < 1) throw DimensionError("empty profile");
    const double sh = std::sinh(profile.h());
    auto integrand = [&](int n) {
        // Site values through the exactly reduced phase, so x = L closes on x = 0.
        double f = -profile.V() * std::sin(profile.phase(n)) * sh - eps_i;
        if (domain_gamma) f += *domain_gamma * domain_sign(n % L, L);
        return f / v_f;
    };
    std::vector<cplx> psi(static_cast<size_t>(L) + 1);
    double acc = 0.0;
    psi[0] = 1.0;
    for (int x = 1; x <= L; ++x) {
        acc += 0.5 * (integrand(x - 1) + integrand(x));
        psi[static_cast<size_t>(x)] = std::polar(std::exp(acc), eps_r * x / v_f);
    }
    return psi;
}

std::vector<double> chiral_wavefunction(const PotentialProfile& profile, double v_f, double eps_r, double eps_i,
                                        std::optional<double> domain_gamma) {
    const auto psi = chiral_amplitude(profile, v_f, eps_r, eps_i, domain_gamma);
    std::vector<double> p(psi.size() - 1);
    double s = 0.0;
    for (size_t x = 0; x < p.size(); ++x) {
        p[x] = std::norm(psi[x]);
        s += p[x];
    }
    if (!(s > 0.0) || !std::isfinite(s)) throw UndefinedObservableError("chiral wavefunction is not normalizable");
    for (double& v : p) v /= s;
    return p;
}

double eps_i_average(const PotentialProfile& profile) {
    const int L = profile.size();
    if (L < 1) throw DimensionError("empty profile");
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto f = [&](double x) { return imag_potential(profile, x); };
    double total = 0.0;
    for (int n = 0; n < L; ++n) total += GK::integrate(f, static_cast<double>(n), static_cast<double>(n + 1), 0);
    return total / L;
}

double eps_i_closed_form(double V, double h, double alpha, int L) {
    const double x = kPi * alpha * L;
    if (x == 0.0) return 0.0;
    const double s = std::sin(x);
    return -V * s * s / x * std::sinh(h);
}

std::vector<ChiralModeParams> quantized_energies(double v_f, const PotentialProfile& profile, int n_min, int n_max) {
    if (v_f == 0.0) throw SingularParameterError("Fermi velocity must be nonzero");
    const int L = profile.size();
    const double ei = eps_i_average(profile);
    std::vector<ChiralModeParams> out;
    for (int n = n_min; n <= n_max; ++n) out.push_back({v_f, n, 2.0 * kPi * n * v_f / L, ei});
    return out;
}

double fit_fermi_velocity(double e1, double k1, double e2, double k2) {
    double dk = std::remainder(k2 - k1, 2.0 * kPi);
    if (dk == 0.0) throw SingularParameterError("levels share the same momentum");
    return (e2 - e1) / dk;
}

double edge_momentum(const CVector& state, const LatticeMap& map) {
    const auto perm = translation_permutation(map);
    cplx s = 0.0;
    // sum_x conj(psi(x)) psi(x+1) = e^{ik} for a plane wave e^{ikx}
    for (int i = 0; i < map.size(); ++i) s += std::conj(state[i]) * state[perm[static_cast<size_t>(i)]];
    return std::arg(s);
}

cplx perturbation_energy(const CVector& psi0, const PotentialProfile& profile, const LatticeMap& map,
                         const PerturbationOptions& opt) {
    if (psi0.size() != map.size()) throw DimensionError("state size differs from the lattice");
    if (profile.size() != map.Lx()) throw DimensionError("profile length must equal L_x");
    const double norm = psi0.squaredNorm();
    if (!(norm > 0.0)) throw UndefinedObservableError("zero state");
    const double V = profile.V(), h = profile.h();
    cplx e1 = 0.0;
    for (int n = 0; n < map.Lx(); ++n) {
        double p = 0.0;
        for (int i : map.boundary_sites_of_cell(n)) p += std::norm(psi0[i]);
        p /= norm;
        const double th = profile.phase(n);
        if (opt.reference == PerturbationReference::bare_lattice) e1 += p * V * std::cos(th);
        e1 += cplx(0.0, -h * V * p * std::sin(th));
        if (opt.domain_gamma) e1 += cplx(0.0, *opt.domain_gamma * domain_sign(n, map.Lx()) * p);
    }
    return e1;
}

EllipseFit half_ellipse_fit(const std::vector<cplx>& ev) {
    if (ev.size() < 5) throw FitError("half-ellipse fit needs at least five eigenvalues");
    const auto m = static_cast<Eigen::Index>(ev.size());
    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        X(k, 0) = std::pow(ev[static_cast<size_t>(k)].real(), 2);
        X(k, 1) = std::pow(ev[static_cast<size_t>(k)].imag(), 2);
    }
    Eigen::Vector2d scale(X.col(0).cwiseAbs().maxCoeff(), X.col(1).cwiseAbs().maxCoeff());
    if (!(scale[0] > 0.0) || !(scale[1] > 0.0)) throw FitError("points are collinear with an axis");
    X.col(0) /= scale[0];
    X.col(1) /= scale[1];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < 2) throw FitError("degenerate point set");
    const Eigen::Vector2d c = qr.solve(y);
    const double u = c[0] / scale[0], w = c[1] / scale[1];
    if (!(u > 0.0) || !(w > 0.0)) throw FitError("least-squares conic is not an ellipse");
    EllipseFit f;
    f.a = 1.0 / std::sqrt(u);
    f.b = 1.0 / std::sqrt(w);
    double ss = 0.0;
    for (const cplx& z : ev) {
        const double r = std::abs(z.imag()) - f.b * std::sqrt(std::max(0.0, 1.0 - z.real() * z.real() / (f.a * f.a)));
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / static_cast<double>(ev.size()));
    return f;
}

std::array<cplx, 4> four_site_eigs_closed(FourSiteKind kind, double t, double gamma) {
    const double s5 = std::sqrt(5.0);
    const cplx ig(0.0, gamma);
    const double t2 = t * t, g2 = gamma * gamma;
    cplx r1, r2;
    if (kind == FourSiteKind::non_adjacent) {
        r1 = std::sqrt(cplx(-g2 - 2.0 * (s5 - 3.0) * t2, 0.0));
        r2 = std::sqrt(cplx(2.0 * (s5 + 3.0) * t2 - g2, 0.0));
    } else {
        const cplx inner = std::sqrt(cplx(5.0 * t2 - 4.0 * g2, 0.0));
        r1 = std::sqrt(-g2 - 2.0 * t * inner + 6.0 * t2);
        r2 = std::sqrt(-g2 + 2.0 * t * inner + 6.0 * t2);
    }
    return {0.5 * (-r1 + ig), 0.5 * (r1 + ig), 0.5 * (-r2 + ig), 0.5 * (r2 + ig)};
}

std::vector<double> exceptional_points(FourSiteKind kind, double t) {
    if (!(t > 0.0)) throw InputError("hopping must be positive");
    const double s5 = std::sqrt(5.0);
    if (kind == FourSiteKind::non_adjacent) return {(s5 - 1.0) * t, (s5 + 1.0) * t};
    auto broken = [&](double g) {
        for (const cplx& l : four_site_eigs_closed(kind, t, g))
            if (std::abs(l.imag() - 0.5 * g) > 1e-12 * t) return true;
        return false;
    };
    const double step = 0.01 * t;
    double lo = 0.0, hi = step;
    while (!broken(hi)) {
        lo = hi;
        hi += step;
        if (hi > 100.0 * t) return {};
    }
    while (hi - lo > 1e-14 * t) {
        const double mid = 0.5 * (lo + hi);
        (broken(mid) ? hi : lo) = mid;
    }
    return {0.5 * (lo + hi)};
}

}  // namespace hqc
