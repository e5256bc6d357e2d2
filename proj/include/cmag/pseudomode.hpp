#ifndef CMAG_PSEUDOMODE_HPP
#define CMAG_PSEUDOMODE_HPP

// Cut-off pseudomode u_h = chi e^{-P/h} sum_j h^j a_j in the original gauge,
// P = S + i theta with grad theta = M - A, M = (-d_2 phi, d_1 phi).

#include <array>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <cmag/fieldmodel.hpp>
#include <cmag/wkb.hpp>

namespace cmag
{

struct CutoffSpec {
    double r_in = 0.0;
    double r_out = 0.0;
    double delta = 0.0;
    double M1 = 0.0; // M1 |x|^2 <= Re P(x) <= M2 |x|^2 on D(0, r_out); M1 > 0 unless built indefinite
    double M2 = 0.0;
};

// Smooth step: 1 for t <= 0, 0 for t >= 1, built from e^{-1/t}.
// Returns (psi, psi', psi'').
std::array<double, 3> smooth_step(double t);

struct CutoffJet {
    double chi = 0.0;
    Point grad{};
    double lap = 0.0;
};
// chi(xi) = psi((|xi| - r_in) / (r_out - r_in)), xi relative to x0.
CutoffJet cutoff_jet(const CutoffSpec &c, const Point &xi);

// theta(x) = int_0^1 (M - A)(x0 + t (x - x0)) . (x - x0) dt at absolute points.
// Throws ConfigError when curl(M - A) = Re-realified B~ - B exceeds 1e-6 at a point.
std::vector<cplx> compute_theta(const FieldSpec &spec, const WKBSolution &sol, const std::vector<Point> &points);

struct NRule {
    bool adaptive = false;
    int N = 1;        // fixed order
    double m = 0.0;   // adaptive: N(h) = floor((e m h)^{-1/7}); m <= 0 takes fit_growth
};

struct PseudomodeConfig {
    NRule rule;
    double delta = -1.0;     // <= 0 selects delta automatically
    double max_radius = 2.0; // upper bound on the radius used for delta selection
    // Build even when Re P is indefinite at x0 (M1 < 0 then); for measurements only.
    bool allow_indefinite = false;
};

struct PointEval {
    cplx u{};
    cplx residual{};     // (L_A - h mu) u
    cplx cutoff_part{};  // commutator contribution
    cplx interior_part{};
};

class Pseudomode
{
public:
    Pseudomode(FieldSpec spec, std::shared_ptr<const WKBSolution> sol, PseudomodeConfig cfg = {});

    const FieldSpec &spec() const noexcept
    {
        return spec_;
    }
    const WKBSolution &solution() const noexcept
    {
        return *sol_;
    }
    const CutoffSpec &cutoff() const noexcept
    {
        return cut_;
    }
    const NRule &rule() const noexcept
    {
        return rule_;
    }
    // Radius trusted for the series (min of field radius and coefficient ratio estimate).
    double analytic_radius() const noexcept
    {
        return radius_;
    }
    double series_radius() const noexcept
    {
        return series_radius_;
    }
    double m_used() const noexcept
    {
        return m_;
    }
    bool indefinite() const noexcept
    {
        return indefinite_;
    }

    // N for this h; `clipped` reports that the adaptive value exceeded the budget.
    int N_used(double h, bool *clipped = nullptr) const;

    cplx theta(const Point &x) const;
    cplx phase(const Point &x) const; // P = S + i theta
    // Quadratic coefficients of Re P at x0 in the form Q1 u^2 - 2 Q2 u v + Q3 v^2.
    std::array<double, 3> phase_quadratic(double eps = 2e-3) const;

    PointEval evaluate(const Point &x, double h, int N) const;
    // Sum_{1 <= j <= N} h^j |a_j(x)|.
    double correction_sum(const Point &x, double h, int N) const;
    // Largest geometric tail bound of sum h^j a_j on |x - x0| = r_out.
    double tail_estimate(double h, int N) const;

private:
    struct Local;
    void eval_series(const Point &xi, int N, Local &out) const;

    FieldSpec spec_;
    std::shared_ptr<const WKBSolution> sol_;
    NRule rule_;
    CutoffSpec cut_;
    double radius_ = 0.0;
    double series_radius_ = 0.0;
    double m_ = 0.0;
    bool indefinite_ = false;
    int max_cap_ = 0;
    // derived series
    BiSeries Sz_, Sw_, phiz_, phiw_, thetaM_;
    std::vector<BiSeries> az_, aw_, lap_;
};

// Evaluable u_h.
struct Assembled {
    const Pseudomode *pm = nullptr;
    double h = 0.0;
    int N = 0;
    bool clipped = false;
    cplx operator()(const Point &x) const;
};
Assembled assemble(const Pseudomode &pm, double h);

struct QuadConfig {
    Point center{};
    double half_width = 1.0;
    int min_points = 64;
    double points_per_sqrt_h = 8.0;
    int workers = 0;
};

struct QuadResult {
    double value = 0.0;           // integral at the doubled resolution
    double error_estimate = 0.0;  // |I_2n - I_n|
    int points_per_axis = 0;      // 2n
};

// Tensor Gauss-Legendre on center + [-w, w]^2 with n points per axis, for K
// integrands at once (evaluated in parallel, summed pairwise in node order).
std::vector<double> tensor_gauss_legendre(const std::function<void(const Point &, double *)> &f, int K,
                                          const Point &center, double half_width, int n, int workers = 0);

int quadrature_points(double half_width, double h, const QuadConfig &q);

// L^2 norm with a two-resolution error estimate; throws QuadratureRefusal when
// the estimate exceeds 1% of the squared norm.
QuadResult norm_L2(const std::function<cplx(const Point &)> &u, double h, const QuadConfig &q);

struct ResidualReport {
    double h = 0.0;
    int N_used = 0;
    std::string evaluator = "series_exact";
    double u_norm = 0.0;
    double residual_norm = 0.0;
    double ratio = 0.0;
    int quadrature_points = 0;
    double tail_estimate = 0.0;
    double cutoff_norm = 0.0;   // commutator part alone
    double interior_norm = 0.0; // chi h^{N+2} Delta a_N part alone
};

// quad.center and quad.half_width are replaced by x0 and r_out.
ResidualReport residual_series_exact(const Pseudomode &pm, double h, int N = -1, int workers = 0, QuadConfig quad = {});

enum class DecayModel { power, stretched };

struct DecayFit {
    DecayModel model = DecayModel::power;
    double slope = 0.0; // power: exponent of h; stretched: coefficient of h^{-1/7}
    double C = 0.0;     // stretched: ratio ~ exp(-C / h^{1/7}), C = -slope
    double intercept = 0.0;
    double r2 = 0.0;
    int points = 0;
};

// Needs >= 4 reports spanning >= one decade of h (PreconditionError otherwise).
DecayFit fit_decay(const std::vector<ResidualReport> &reports, DecayModel model);

// "# cmag-wkb v1" header, then h,N_used,evaluator,u_norm,residual_norm,ratio,quad_points,tail_estimate.
void write_reports_csv(std::ostream &os, const std::vector<ResidualReport> &reports);
std::string format_double(double x);

} // namespace cmag

#endif
