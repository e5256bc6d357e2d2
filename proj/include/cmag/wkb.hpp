#ifndef CMAG_WKB_HPP
#define CMAG_WKB_HPP

// Eikonal phase and transport amplitudes in complexified coordinates.
//
// With S~ = phi~ + f(z) and w = w(z) the curve B~(z, w(z)) = B(x0), the
// amplitudes solve
//   (w - w(z)) [8 V d_w + F] a~_{j+1} = 4 d_z d_w a~_j,   [8 V d_w + F] a~_0 = 0,
// where d_z phi~(z, w) - d_z phi~(z, w(z)) = (w - w(z)) V and
// B~(z, w) - B(x0) = (w - w(z)) F.

#include <array>
#include <string>
#include <vector>

#include <cmag/cseries.hpp>

namespace cmag
{

struct IdentityCheck {
    std::string name;
    int j = -1;            // amplitude index, -1 for phase identities
    double max_coeff = 0;  // largest offending coefficient
    int worst_degree = -1; // total degree of that coefficient
    double scale = 0;      // majorant of that coefficient
    bool ok = true;
};

struct WKBSolution {
    BiSeries Btilde;
    BiSeries phi;
    UniSeries w_curve;
    UniSeries f;
    BiSeries S;
    BiSeries V, F, J;
    UniSeries p, q; // d_w J and d_z d_w J on the curve
    UniSeries A0;
    std::vector<UniSeries> A; // z-only parts, A[0] = A0
    std::vector<BiSeries> K;  // a~_j = J (K_j + A_j), K_0 = 0
    std::vector<BiSeries> amplitudes;
    cplx mu{};
    int N = 0;
    std::array<double, 2> trusted_radii{};
    std::vector<IdentityCheck> checks;
};

// phi~ with 4 d_z d_w phi~ = B~ and phi~(z, 0) = phi~(0, w) = 0.
BiSeries poisson_series(const BiSeries &Btilde);

struct EikonalPhase {
    UniSeries f;
    BiSeries S;
};
EikonalPhase eikonal_phase(const BiSeries &phi, const UniSeries &w_curve);

struct DividedData {
    BiSeries V;
    BiSeries F;
};
DividedData divided_data(const BiSeries &phi, const BiSeries &Btilde, const UniSeries &w_curve, double tol = 1e-10);

struct FirstTransport {
    cplx mu{};
    BiSeries J;
    UniSeries p, q;
    UniSeries A0;
    BiSeries a0;
};
FirstTransport first_transport(const BiSeries &Btilde, const DividedData &vf, const UniSeries &w_curve);

// a~_{j+1} = J (K_{j+1} + A_{j+1}).
struct TransportStep {
    BiSeries a;
    BiSeries K;
    UniSeries A;
};
TransportStep transport_step(const WKBSolution &sol, int j, double tol = 1e-10);

// Largest admissible N for a degree cap.
int max_transport_order(int cap) noexcept;

// Full construction; throws GammaRejection for B(x0) = 0 or d_zbar B(x0) = 0,
// ConfigError when the cap cannot carry N steps, IdentityFailure when a
// series identity fails.
WKBSolution solve_wkb(const BiSeries &Btilde, int N, double tol = 1e-10);

// Eikonal, transport and compatibility identities for every stored order.
std::vector<IdentityCheck> verify_identities(const WKBSolution &sol, double tol = 1e-10);

struct BoundFit {
    double m_fitted = 0.0;
    std::vector<double> per_j_norms;
    std::array<double, 2> polydisc{};
    double sigma = 0.0; // fitted exponent in |a_j| ~ C m^j j^{sigma j}
    double m_sigma = 0.0;
};

// Sup-norms on the distinguished boundary |z| = R1, |w| = R2 (32 x 32 mesh).
BoundFit fit_growth(const WKBSolution &sol, double R1, double R2);

} // namespace cmag

#endif
