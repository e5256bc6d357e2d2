#include <cmag/pseudomode.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmag/errors.hpp>
#include <cmag/parallel.hpp>

namespace cmag
{

namespace
{

const cplx I(0.0, 1.0);

struct GslInit {
    GslInit()
    {
        gsl_set_error_handler_off();
    }
} gsl_init;

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace *w) const
    {
        gsl_integration_workspace_free(w);
    }
};

constexpr std::size_t kQagLimit = 64;

gsl_integration_workspace *thread_workspace()
{
    thread_local std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
        gsl_integration_workspace_alloc(kQagLimit));
    return ws.get();
}

// -int_0^1 A(x0 + t xi) . xi dt by adaptive Gauss-Kronrod, real and imaginary parts.
cplx theta_A(const MagneticField &field, const Point &x0, const Point &xi)
{
    if (xi[0] == 0.0 && xi[1] == 0.0) {
        return 0.0;
    }
    struct Ctx {
        const MagneticField *f;
        Point x0, xi;
        int part;
    } ctx{&field, x0, xi, 0};
    gsl_function F;
    F.function = [](double t, void *p) {
        const auto *c = static_cast<const Ctx *>(p);
        const auto A = c->f->A({c->x0[0] + t * c->xi[0], c->x0[1] + t * c->xi[1]});
        const cplx v = A[0] * c->xi[0] + A[1] * c->xi[1];
        return c->part == 0 ? v.real() : v.imag();
    };
    F.params = &ctx;
    double out[2];
    for (int part = 0; part < 2; ++part) {
        ctx.part = part;
        double err = 0.0;
        const int st = gsl_integration_qag(&F, 0.0, 1.0, 1e-15, 1e-13, kQagLimit, GSL_INTEG_GAUSS21,
                                           thread_workspace(), &out[part], &err);
        if (st != GSL_SUCCESS && st != GSL_EROUND) {
            throw DomainError(std::string("theta: line integral of A did not converge: ") + gsl_strerror(st));
        }
    }
    return -cplx(out[0], out[1]);
}

// theta_M coefficients: the degree-n part of xi . M~ divided by n, where
// xi . M~ = -i (z d_z - w d_w) phi~.
BiSeries theta_M_series(const BiSeries &phi)
{
    BiSeries t(phi.cap(), phi.center());
    for (const auto &term : phi.terms()) {
        const int n = term.alpha + term.beta;
        if (n > 0) {
            t.at(term.alpha, term.beta) = -I * (static_cast<double>(term.alpha - term.beta) / n) * term.value;
        }
    }
    return t;
}

struct Powers {
    std::vector<cplx> zp, wp;
    void fill(const Point &xi, int cap)
    {
        zp.assign(static_cast<std::size_t>(cap) + 1, 1.0);
        wp.assign(static_cast<std::size_t>(cap) + 1, 1.0);
        const cplx z(xi[0], xi[1]), w(xi[0], -xi[1]);
        for (int k = 1; k <= cap; ++k) {
            zp[static_cast<std::size_t>(k)] = zp[static_cast<std::size_t>(k) - 1] * z;
            wp[static_cast<std::size_t>(k)] = wp[static_cast<std::size_t>(k) - 1] * w;
        }
    }
};

cplx eval_with(const BiSeries &a, const Powers &p)
{
    const auto raw = a.raw();
    cplx s{};
    std::size_t idx = 0;
    for (int d = 0; d <= a.cap(); ++d) {
        for (int b = 0; b <= d; ++b, ++idx) {
            s += raw[idx] * p.zp[static_cast<std::size_t>(d - b)] * p.wp[static_cast<std::size_t>(b)];
        }
    }
    return s;
}

// Real gradient from Wirtinger parts: d_1 = d_z + d_w, d_2 = i (d_z - d_w).
std::array<cplx, 2> real_grad(cplx dz, cplx dw)
{
    return {dz + dw, I * (dz - dw)};
}

double lambda_min(double Q1, double Q2, double Q3)
{
    // form Q1 u^2 - 2 Q2 u v + Q3 v^2
    const double m = 0.5 * (Q1 + Q3);
    const double r = std::hypot(0.5 * (Q1 - Q3), Q2);
    return m - r;
}

// Ratio-test radius from the two top nonzero diagonals of a series.
double ratio_radius(const BiSeries &a)
{
    std::vector<double> m;
    for (int d = 0; d <= a.cap(); ++d) {
        m.push_back(a.max_abs_in_degrees(d, d));
    }
    for (int d = a.cap(); d >= 2; --d) {
        if (m[static_cast<std::size_t>(d)] > 0.0 && m[static_cast<std::size_t>(d) - 1] > 0.0) {
            return m[static_cast<std::size_t>(d) - 1] / m[static_cast<std::size_t>(d)];
        }
    }
    return std::numeric_limits<double>::infinity();
}

double ratio_radius(const UniSeries &a)
{
    for (int k = a.cap(); k >= 2; --k) {
        if (std::abs(a[k]) > 0.0 && std::abs(a[k - 1]) > 0.0) {
            return std::abs(a[k - 1]) / std::abs(a[k]);
        }
    }
    return std::numeric_limits<double>::infinity();
}

} // namespace

std::array<double, 3> smooth_step(double t)
{
    if (t <= 0.0) {
        return {1.0, 0.0, 0.0};
    }
    if (t >= 1.0) {
        return {0.0, 0.0, 0.0};
    }
    auto g = [](double s) { return std::exp(-1.0 / s); };
    auto g1 = [&](double s) { return g(s) / (s * s); };
    auto g2 = [&](double s) { return g(s) * (1.0 / (s * s * s * s) - 2.0 / (s * s * s)); };
    const double a = g(1.0 - t), b = g(t);
    const double a1 = -g1(1.0 - t), b1 = g1(t);
    const double a2 = g2(1.0 - t), b2 = g2(t);
    const double s = a + b;
    const double n = a1 * b - a * b1;
    const double n1 = a2 * b - a * b2;
    return {a / s, n / (s * s), n1 / (s * s) - 2.0 * n * (a1 + b1) / (s * s * s)};
}

CutoffJet cutoff_jet(const CutoffSpec &c, const Point &xi)
{
    CutoffJet j;
    const double r = std::hypot(xi[0], xi[1]);
    if (r <= c.r_in) {
        j.chi = 1.0;
        return j;
    }
    if (r >= c.r_out) {
        return j;
    }
    const double dr = c.r_out - c.r_in;
    const auto p = smooth_step((r - c.r_in) / dr);
    j.chi = p[0];
    const double d1 = p[1] / dr, d2 = p[2] / (dr * dr);
    j.grad = {d1 * xi[0] / r, d1 * xi[1] / r};
    j.lap = d2 + d1 / r;
    return j;
}

std::vector<cplx> compute_theta(const FieldSpec &spec, const WKBSolution &sol, const std::vector<Point> &points)
{
    const auto tM = theta_M_series(sol.phi);
    std::vector<cplx> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        const Point xi{points[i][0] - spec.base[0], points[i][1] - spec.base[1]};
        const cplx Bs = realify(spec.Btilde, xi[0], xi[1]);
        const cplx Bf = spec.field->B(points[i]);
        if (std::abs(Bs - Bf) > 1e-6 * std::max(1.0, std::abs(Bf))) {
            std::ostringstream os;
            os << "inconsistent field: curl(M - A) = " << Bs - Bf << " at (" << points[i][0] << ", " << points[i][1]
               << "); the Taylor data of B does not match A";
            throw ConfigError(os.str());
        }
        out[i] = realify(tM, xi[0], xi[1]) + theta_A(*spec.field, spec.base, xi);
    });
    return out;
}

struct Pseudomode::Local {
    cplx S, Sz, Sw, phiz, phiw, thetaM;
    std::vector<cplx> a, az, aw;
    cplx lapN;
};

Pseudomode::Pseudomode(FieldSpec spec, std::shared_ptr<const WKBSolution> sol, PseudomodeConfig cfg)
    : spec_(std::move(spec)), sol_(std::move(sol)), rule_(cfg.rule)
{
    if (!sol_ || sol_->amplitudes.empty()) {
        throw ConfigError("pseudomode: no WKB solution");
    }
    for (const auto &c : sol_->checks) {
        if (!c.ok) {
            throw IdentityFailure("pseudomode: WKB solution has a failed identity: " + c.name);
        }
    }
    const auto &S = sol_->S;
    Sz_ = differentiate(S, Var::z);
    Sw_ = differentiate(S, Var::w);
    phiz_ = differentiate(sol_->phi, Var::z);
    phiw_ = differentiate(sol_->phi, Var::w);
    thetaM_ = theta_M_series(sol_->phi);
    max_cap_ = S.cap();
    for (const auto &a : sol_->amplitudes) {
        az_.push_back(differentiate(a, Var::z));
        aw_.push_back(differentiate(a, Var::w));
        lap_.push_back(differentiate(az_.back(), Var::w) * 4.0);
        max_cap_ = std::max(max_cap_, a.cap());
    }

    series_radius_ = ratio_radius(sol_->w_curve);
    for (const auto &a : sol_->amplitudes) {
        series_radius_ = std::min(series_radius_, ratio_radius(a));
    }
    radius_ = std::min({spec_.analytic_radius, series_radius_, cfg.max_radius});

    // delta: largest sampled radius <= radius/2 with Re P >= lambda_min(Q)/2 |x|^2
    const auto q = phase_quadratic();
    const double lmin = lambda_min(q[0], q[1], q[2]);
    indefinite_ = !(lmin > 0.0);
    if (indefinite_ && !cfg.allow_indefinite) {
        std::ostringstream os;
        os << "pseudomode: Re P is not positive definite at x0 (quadratic part " << q[0] << " u^2 - 2 (" << q[1]
           << ") u v + " << q[2] << " v^2, smallest eigenvalue " << lmin << ")";
        throw GammaRejection(os.str());
    }
    // half of lambda_min when positive; otherwise 1.5 lambda_min leaves the same slack below
    cut_.M1 = lmin - 0.5 * std::abs(lmin);
    const double rmax = 0.5 * radius_;
    constexpr int kRadii = 48, kAngles = 48;
    double delta = rmax;
    if (cfg.delta > 0.0) {
        delta = cfg.delta;
    } else {
        for (int k = 1; k <= kRadii; ++k) {
            const double r = rmax * k / kRadii;
            bool ok = true;
            for (int a = 0; a < kAngles && ok; ++a) {
                const double ang = 2.0 * M_PI * a / kAngles;
                const Point x{spec_.base[0] + r * std::cos(ang), spec_.base[1] + r * std::sin(ang)};
                ok = phase(x).real() >= cut_.M1 * r * r;
            }
            if (!ok) {
                delta = rmax * (k - 1) / kRadii;
                break;
            }
        }
        if (!(delta > 0.0)) {
            throw DomainError("pseudomode: Re P violates the quadratic lower bound arbitrarily close to x0");
        }
    }
    cut_.delta = delta;
    cut_.r_out = delta;
    cut_.r_in = 0.5 * delta;

    // M2 and the curl-consistency check on samples of D(0, r_out)
    std::vector<Point> samples;
    for (int k = 1; k <= 8; ++k) {
        for (int a = 0; a < 16; ++a) {
            const double r = cut_.r_out * k / 8.0, ang = 2.0 * M_PI * a / 16.0;
            samples.push_back({spec_.base[0] + r * std::cos(ang), spec_.base[1] + r * std::sin(ang)});
        }
    }
    const auto th = compute_theta(spec_, *sol_, samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Point xi{samples[i][0] - spec_.base[0], samples[i][1] - spec_.base[1]};
        const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
        const double reP = realify(S, xi[0], xi[1]).real() - th[i].imag();
        cut_.M2 = std::max(cut_.M2, reP / r2);
        if (reP < cut_.M1 * r2 * (1.0 - 1e-9)) {
            std::ostringstream os;
            os << "pseudomode: Re P below M1 |x|^2 at distance " << std::sqrt(r2) << " (explicit delta too large?)";
            throw DomainError(os.str());
        }
    }

    m_ = rule_.m;
    if (rule_.adaptive && !(m_ > 0.0)) {
        m_ = fit_growth(*sol_, 0.25 * radius_, 0.25 * radius_).m_fitted;
    }
}

int Pseudomode::N_used(double h, bool *clipped) const
{
    if (!(h > 0.0)) {
        throw DomainError("pseudomode: h must be positive");
    }
    const int budget = static_cast<int>(sol_->amplitudes.size()) - 1;
    int N = rule_.N;
    if (rule_.adaptive) {
        const double v = std::pow(std::exp(1.0) * m_ * h, -1.0 / 7.0);
        N = v >= budget + 1 ? budget + 1 : static_cast<int>(std::floor(v));
    }
    N = std::max(N, 0);
    const bool over = N > budget;
    if (clipped != nullptr) {
        *clipped = over;
    }
    return std::min(N, budget);
}

cplx Pseudomode::theta(const Point &x) const
{
    const Point xi{x[0] - spec_.base[0], x[1] - spec_.base[1]};
    return realify(thetaM_, xi[0], xi[1]) + theta_A(*spec_.field, spec_.base, xi);
}

cplx Pseudomode::phase(const Point &x) const
{
    const Point xi{x[0] - spec_.base[0], x[1] - spec_.base[1]};
    return realify(sol_->S, xi[0], xi[1]) + I * theta(x);
}

std::array<double, 3> Pseudomode::phase_quadratic(double eps) const
{
    const auto f = [&](double u, double v) { return phase({spec_.base[0] + u, spec_.base[1] + v}).real(); };
    const double f0 = f(0.0, 0.0);
    auto est = [&](double e) {
        const double q1 = (f(e, 0) + f(-e, 0) - 2 * f0) / (2 * e * e);
        const double q3 = (f(0, e) + f(0, -e) - 2 * f0) / (2 * e * e);
        const double q2 = -(f(e, e) - f(e, -e) - f(-e, e) + f(-e, -e)) / (8 * e * e);
        return std::array<double, 3>{q1, q2, q3};
    };
    const auto a = est(eps), b = est(0.5 * eps);
    return {(4 * b[0] - a[0]) / 3, (4 * b[1] - a[1]) / 3, (4 * b[2] - a[2]) / 3};
}

void Pseudomode::eval_series(const Point &xi, int N, Local &out) const
{
    thread_local Powers p;
    p.fill(xi, max_cap_);
    out.S = eval_with(sol_->S, p);
    out.Sz = eval_with(Sz_, p);
    out.Sw = eval_with(Sw_, p);
    out.phiz = eval_with(phiz_, p);
    out.phiw = eval_with(phiw_, p);
    out.thetaM = eval_with(thetaM_, p);
    out.a.resize(static_cast<std::size_t>(N) + 1);
    out.az.resize(out.a.size());
    out.aw.resize(out.a.size());
    for (int j = 0; j <= N; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        out.a[uj] = eval_with(sol_->amplitudes[uj], p);
        out.az[uj] = eval_with(az_[uj], p);
        out.aw[uj] = eval_with(aw_[uj], p);
    }
    out.lapN = eval_with(lap_[static_cast<std::size_t>(N)], p);
}

PointEval Pseudomode::evaluate(const Point &x, double h, int N) const
{
    if (!(h > 0.0)) {
        throw DomainError("pseudomode: h must be positive");
    }
    if (N < 0 || N >= static_cast<int>(sol_->amplitudes.size())) {
        throw ConfigError("pseudomode: N outside the computed amplitudes");
    }
    PointEval e;
    const Point xi{x[0] - spec_.base[0], x[1] - spec_.base[1]};
    const auto cj = cutoff_jet(cut_, xi);
    if (cj.chi == 0.0 && cj.grad[0] == 0.0 && cj.grad[1] == 0.0) {
        return e;
    }
    thread_local Local L;
    eval_series(xi, N, L);
    const cplx th = L.thetaM + theta_A(*spec_.field, spec_.base, xi);
    const cplx P = L.S + I * th;
    const auto A = spec_.field->A(x);
    const auto gS = real_grad(L.Sz, L.Sw);
    const auto gphi = real_grad(L.phiz, L.phiw);
    const std::array<cplx, 2> M{-gphi[1], gphi[0]};
    const std::array<cplx, 2> gP{gS[0] + I * (M[0] - A[0]), gS[1] + I * (M[1] - A[1])};

    cplx a{}, ga1{}, ga2{};
    double hp = 1.0;
    for (int j = 0; j <= N; ++j, hp *= h) {
        const auto uj = static_cast<std::size_t>(j);
        a += hp * L.a[uj];
        const auto g = real_grad(L.az[uj], L.aw[uj]);
        ga1 += hp * g[0];
        ga2 += hp * g[1];
    }
    const cplx E = std::exp(-P / h);
    const double hN2 = std::pow(h, N + 2);
    const cplx interior = cj.chi * hN2 * (-L.lapN);
    const cplx gchi_ga = cj.grad[0] * ga1 + cj.grad[1] * ga2;
    const cplx gP_gchi = gP[0] * cj.grad[0] + gP[1] * cj.grad[1];
    const cplx A_gchi = A[0] * cj.grad[0] + A[1] * cj.grad[1];
    const cplx cut = -2.0 * h * h * gchi_ga + (-h * h * cj.lap + 2.0 * h * gP_gchi + 2.0 * I * h * A_gchi) * a;
    e.u = cj.chi * E * a;
    e.interior_part = E * interior;
    e.cutoff_part = E * cut;
    e.residual = e.interior_part + e.cutoff_part;
    return e;
}

double Pseudomode::correction_sum(const Point &x, double h, int N) const
{
    const Point xi{x[0] - spec_.base[0], x[1] - spec_.base[1]};
    double s = 0.0, hp = h;
    for (int j = 1; j <= N; ++j, hp *= h) {
        s += hp * std::abs(realify(sol_->amplitudes[static_cast<std::size_t>(j)], xi[0], xi[1]));
    }
    return s;
}

double Pseudomode::tail_estimate(double h, int N) const
{
    double worst = 0.0;
    for (int k = 0; k < 16; ++k) {
        const double ang = 2.0 * M_PI * k / 16.0;
        const cplx z = std::polar(cut_.r_out, ang);
        double t = 0.0, hp = 1.0;
        for (int j = 0; j <= N; ++j, hp *= h) {
            t += hp * cmag::evaluate(sol_->amplitudes[static_cast<std::size_t>(j)], z, std::conj(z)).tail_bound;
        }
        worst = std::max(worst, t);
    }
    return worst;
}

cplx Assembled::operator()(const Point &x) const
{
    return pm->evaluate(x, h, N).u;
}

Assembled assemble(const Pseudomode &pm, double h)
{
    Assembled a;
    a.pm = &pm;
    a.h = h;
    a.N = pm.N_used(h, &a.clipped);
    if (a.clipped) {
        std::fprintf(stderr, "warning: adaptive N(h = %g) exceeds the degree budget; using N = %d\n", h, a.N);
    }
    return a;
}

std::vector<double> tensor_gauss_legendre(const std::function<void(const Point &, double *)> &f, int K,
                                          const Point &center, double half_width, int n, int workers)
{
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> tab(
        gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)), &gsl_integration_glfixed_table_free);
    if (!tab) {
        throw DomainError("tensor_gauss_legendre: cannot build the rule");
    }
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        gsl_integration_glfixed_point(-half_width, half_width, static_cast<std::size_t>(i), &x[static_cast<std::size_t>(i)],
                                      &w[static_cast<std::size_t>(i)], tab.get());
    }
    const auto un = static_cast<std::size_t>(n), uK = static_cast<std::size_t>(K);
    // per-row partial sums, rows combined pairwise in order
    std::vector<double> rows(un * uK);
    parallel_for(
        un,
        [&](std::size_t i) {
            std::vector<double> vals(uK), col(un * uK);
            for (std::size_t k = 0; k < un; ++k) {
                f({center[0] + x[i], center[1] + x[k]}, vals.data());
                for (std::size_t c = 0; c < uK; ++c) {
                    col[c * un + k] = w[i] * w[k] * vals[c];
                }
            }
            for (std::size_t c = 0; c < uK; ++c) {
                rows[c * un + i] = pairwise_sum(col.data() + c * un, un);
            }
        },
        workers);
    std::vector<double> out(uK);
    for (std::size_t c = 0; c < uK; ++c) {
        out[c] = pairwise_sum(rows.data() + c * un, un);
    }
    return out;
}

int quadrature_points(double half_width, double h, const QuadConfig &q)
{
    return std::max(q.min_points, static_cast<int>(std::ceil(q.points_per_sqrt_h * half_width / std::sqrt(h))));
}

QuadResult norm_L2(const std::function<cplx(const Point &)> &u, double h, const QuadConfig &q)
{
    const int n = quadrature_points(q.half_width, h, q);
    auto f = [&](const Point &x, double *v) { v[0] = std::norm(u(x)); };
    const double coarse = tensor_gauss_legendre(f, 1, q.center, q.half_width, n, q.workers)[0];
    const double fine = tensor_gauss_legendre(f, 1, q.center, q.half_width, 2 * n, q.workers)[0];
    QuadResult r;
    r.points_per_axis = 2 * n;
    r.error_estimate = std::abs(fine - coarse);
    if (r.error_estimate > 0.01 * std::abs(fine)) {
        std::ostringstream os;
        os << "norm_L2: quadrature does not resolve the integrand at h = " << h << " (estimate " << r.error_estimate
           << " vs value " << fine << "); need more than " << 2 * n << " points per axis";
        throw QuadratureRefusal(os.str(), 4 * n);
    }
    r.value = std::sqrt(std::max(fine, 0.0));
    return r;
}

ResidualReport residual_series_exact(const Pseudomode &pm, double h, int N, int workers, QuadConfig q)
{
    if (!(h > 0.0)) {
        throw DomainError("residual_series_exact: h must be positive");
    }
    if (N < 0) {
        N = pm.N_used(h);
    }
    q.center = pm.spec().base;
    q.half_width = pm.cutoff().r_out;
    q.workers = workers;
    const int n = quadrature_points(q.half_width, h, q);
    auto f = [&](const Point &x, double *v) {
        const auto e = pm.evaluate(x, h, N);
        v[0] = std::norm(e.u);
        v[1] = std::norm(e.residual);
        v[2] = std::norm(e.cutoff_part);
        v[3] = std::norm(e.interior_part);
    };
    const auto coarse = tensor_gauss_legendre(f, 4, q.center, q.half_width, n, workers);
    const auto fine = tensor_gauss_legendre(f, 4, q.center, q.half_width, 2 * n, workers);
    for (int c = 0; c < 2; ++c) {
        const double err = std::abs(fine[static_cast<std::size_t>(c)] - coarse[static_cast<std::size_t>(c)]);
        if (err > 0.01 * std::abs(fine[static_cast<std::size_t>(c)])) {
            std::ostringstream os;
            os << "residual_series_exact: quadrature does not resolve the " << (c == 0 ? "pseudomode" : "residual")
               << " at h = " << h << "; need more than " << 2 * n << " points per axis";
            throw QuadratureRefusal(os.str(), 4 * n);
        }
    }
    ResidualReport r;
    r.h = h;
    r.N_used = N;
    r.evaluator = "series_exact";
    r.u_norm = std::sqrt(fine[0]);
    r.residual_norm = std::sqrt(std::max(fine[1], 0.0));
    r.cutoff_norm = std::sqrt(std::max(fine[2], 0.0));
    r.interior_norm = std::sqrt(std::max(fine[3], 0.0));
    if (!(r.u_norm > 0.0)) {
        throw DomainError("residual_series_exact: pseudomode norm vanished");
    }
    r.ratio = r.residual_norm / r.u_norm;
    r.quadrature_points = (2 * n) * (2 * n);
    r.tail_estimate = pm.tail_estimate(h, N);
    return r;
}

DecayFit fit_decay(const std::vector<ResidualReport> &reports, DecayModel model)
{
    if (reports.size() < 4) {
        throw PreconditionError("fit_decay: need at least 4 reports");
    }
    double hmin = reports.front().h, hmax = hmin;
    for (const auto &r : reports) {
        hmin = std::min(hmin, r.h);
        hmax = std::max(hmax, r.h);
        if (!(r.ratio > 0.0)) {
            throw PreconditionError("fit_decay: ratios must be positive");
        }
    }
    if (hmax < 10.0 * hmin * (1.0 - 1e-12)) {
        throw PreconditionError("fit_decay: the h values must span at least one decade");
    }
    const double n = static_cast<double>(reports.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto &r : reports) {
        const double x = model == DecayModel::power ? std::log(r.h) : std::pow(r.h, -1.0 / 7.0);
        const double y = std::log(r.ratio);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    DecayFit fit;
    fit.model = model;
    fit.points = static_cast<int>(reports.size());
    const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    fit.slope = cxy / vx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.C = -fit.slope;
    fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    return fit;
}

std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_reports_csv(std::ostream &os, const std::vector<ResidualReport> &reports)
{
    os << "# cmag-wkb v1\n";
    os << "h,N_used,evaluator,u_norm,residual_norm,ratio,quad_points,tail_estimate\n";
    for (const auto &r : reports) {
        os << format_double(r.h) << ',' << r.N_used << ',' << r.evaluator << ',' << format_double(r.u_norm) << ','
           << format_double(r.residual_norm) << ',' << format_double(r.ratio) << ',' << r.quadrature_points << ','
           << format_double(r.tail_estimate) << '\n';
    }
}

} // namespace cmag
