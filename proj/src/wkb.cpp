#include <cmag/wkb.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <cmag/errors.hpp>

namespace cmag
{

namespace
{

// u(z) viewed as a series in (z, w) with the given cap.
BiSeries lift(const UniSeries &u, int cap, const BiSeries::Center &c = {})
{
    return BiSeries::lift_z(u, cap, c);
}

// X(z, w) - X(z, w(z)): vanishes on the curve.
BiSeries minus_on_curve(const BiSeries &X, const UniSeries &w)
{
    return X - lift(compose_w(X, w), X.cap(), X.center());
}

BiSeries abs_series(const BiSeries &a)
{
    BiSeries out(a.cap(), a.center());
    for (const auto &t : a.terms()) {
        out.at(t.alpha, t.beta) = std::abs(t.value);
    }
    return out;
}

UniSeries abs_series(const UniSeries &a)
{
    UniSeries out(a.cap());
    for (int k = 0; k <= a.cap(); ++k) {
        out.at(k) = std::abs(a[k]);
    }
    return out;
}

// Coefficient k passes when |residual_k| <= tol * majorant_k, the majorant
// being the same expression evaluated on absolute values (the size of the
// terms that cancel).
IdentityCheck check_series(const std::string &name, int j, const BiSeries &residual, const BiSeries &majorant,
                           double tol)
{
    IdentityCheck c;
    c.name = name;
    c.j = j;
    double worst = -1.0;
    for (const auto &t : residual.terms()) {
        const double m = std::max(majorant.coeff(t.alpha, t.beta).real(), 1e-300);
        const double r = std::abs(t.value) / m;
        if (r > worst) {
            worst = r;
            c.max_coeff = std::abs(t.value);
            c.scale = m;
            c.worst_degree = t.alpha + t.beta;
        }
    }
    c.ok = worst <= tol;
    return c;
}

IdentityCheck check_series(const std::string &name, int j, const UniSeries &residual, const UniSeries &majorant,
                           double tol)
{
    IdentityCheck c;
    c.name = name;
    c.j = j;
    double worst = -1.0;
    for (int k = 0; k <= residual.cap(); ++k) {
        const double m = std::max(majorant[k].real(), 1e-300);
        const double r = std::abs(residual[k]) / m;
        if (r > worst) {
            worst = r;
            c.max_coeff = std::abs(residual[k]);
            c.scale = m;
            c.worst_degree = k;
        }
    }
    c.ok = worst <= tol;
    return c;
}

} // namespace

BiSeries poisson_series(const BiSeries &Btilde)
{
    const int cap = Btilde.cap();
    BiSeries phi(cap, Btilde.center());
    for (int d = 0; d + 2 <= cap; ++d) {
        for (int b = 0; b <= d; ++b) {
            const int a = d - b;
            phi.at(a + 1, b + 1) = Btilde.coeff(a, b) / (4.0 * (a + 1) * (b + 1));
        }
    }
    return phi;
}

EikonalPhase eikonal_phase(const BiSeries &phi, const UniSeries &w_curve)
{
    const auto dz = differentiate(phi, Var::z);
    const auto on_curve = compose_w(dz, w_curve);
    EikonalPhase e;
    e.f = antiderivative(on_curve * -2.0, phi.cap());
    e.S = phi + lift(e.f, phi.cap(), phi.center());
    return e;
}

DividedData divided_data(const BiSeries &phi, const BiSeries &Btilde, const UniSeries &w_curve, double tol)
{
    const auto dz = differentiate(phi, Var::z);
    DividedData out;
    out.V = exact_divide_by_curve(minus_on_curve(dz, w_curve), w_curve, tol, "d_z phi(z,w) - d_z phi(z,w(z))").quotient;
    out.F = exact_divide_by_curve(Btilde - Btilde.coeff(0, 0), w_curve, tol, "B(z,w) - B(x0)").quotient;
    return out;
}

FirstTransport first_transport(const BiSeries &Btilde, const DividedData &vf, const UniSeries &w_curve)
{
    const int c = vf.V.cap(); // D - 2
    FirstTransport out;
    out.mu = Btilde.coeff(0, 0);
    const auto ratio = vf.F.truncated(c) * reciprocal(vf.V, "V") * 0.125;
    const auto H = antiderivative(ratio, Var::w, c + 1);
    out.J = exp_series(-minus_on_curve(H, w_curve));

    out.p = compose_w(differentiate(out.J, Var::w), w_curve);
    out.q = compose_w(differentiate(differentiate(out.J, Var::w), Var::z), w_curve);
    if (out.p.max_abs() == 0.0 && out.q.max_abs() == 0.0) {
        // J independent of w (F = 0): the compatibility condition is void
        out.A0 = UniSeries::constant(1.0, out.p.cap());
    } else {
        if (std::abs(out.p[0]) == 0.0) {
            throw PreconditionError("first_transport: d_w J vanishes at the base point");
        }
        const auto qp = out.q * reciprocal(out.p.truncated(out.q.cap()), "d_w J on the curve");
        out.A0 = exp_series(-antiderivative(qp, out.p.cap()));
    }
    out.a0 = lift(out.A0, c, Btilde.center()) * out.J.truncated(c);
    return out;
}

int max_transport_order(int cap) noexcept
{
    return cap / 3 - 2;
}

TransportStep transport_step(const WKBSolution &sol, int j, double tol)
{
    const auto &aj = sol.amplitudes.at(static_cast<std::size_t>(j));
    const int cj = aj.cap();
    if (cj < 4) {
        throw ConfigError("transport_step: degree cap exhausted");
    }
    const auto &w = sol.w_curve;
    const auto dzdw = differentiate(differentiate(aj, Var::w), Var::z); // cap cj - 2
    std::ostringstream nm;
    nm << "d_z d_w a_" << j;
    const auto T = exact_divide_by_curve(dzdw, w, tol, nm.str()).quotient; // cap cj - 3
    const int ct = T.cap();

    const auto JV2 = sol.J.truncated(ct) * sol.V.truncated(ct) * 2.0;
    const auto H = antiderivative(T * reciprocal(JV2, "2 J V"), Var::w, ct + 1);
    const auto K = minus_on_curve(H, w); // cap cj - 2

    const int cg = cj - 4;
    const auto Kz = differentiate(K, Var::z);
    const auto Kw = differentiate(K, Var::w);
    const auto Kzw = differentiate(Kz, Var::w);
    const auto Jz = differentiate(sol.J, Var::z).truncated(cg);
    const auto Jw = differentiate(sol.J, Var::w).truncated(cg);
    const auto bracket = Jw * Kz.truncated(cg) + Jz * Kw.truncated(cg) + Kzw.truncated(cg);
    const auto G = compose_w(bracket, w) * -1.0;

    TransportStep out;
    UniSeries c(cg + 1);
    if (G.max_abs() != 0.0) {
        const auto pA0 = sol.p.truncated(cg) * sol.A0.truncated(cg);
        c = antiderivative(G * reciprocal(pA0, "p A0"), cg + 1);
    }
    out.A = sol.A0.truncated(cg + 1) * c;
    const int ca = cg + 1; // cj - 3
    out.K = K.truncated(ca);
    out.a = sol.J.truncated(ca) * (out.K + lift(out.A, ca, aj.center()));
    return out;
}

namespace
{

// Majorant of 4 d_z d_w a~_j from d_z d_w [J (K_j + A_j)] expanded termwise.
BiSeries dzdw_majorant(const WKBSolution &sol, std::size_t j)
{
    const auto &aj = sol.amplitudes[j];
    const int c = aj.cap();
    BiSeries m = abs_series(differentiate(differentiate(aj, Var::w), Var::z) * 4.0);
    if (j >= sol.K.size() || j >= sol.A.size()) {
        return m;
    }
    const auto u = sol.K[j] + lift(sol.A[j], c, aj.center());
    const auto Jc = sol.J.truncated(c);
    const auto Jz = differentiate(Jc, Var::z), Jw = differentiate(Jc, Var::w);
    const auto uz = differentiate(u, Var::z), uw = differentiate(u, Var::w);
    const int c2 = c - 2;
    const auto terms = abs_series(differentiate(Jz, Var::w).truncated(c2)) * abs_series(u.truncated(c2)) +
                       abs_series(Jw.truncated(c2)) * abs_series(uz.truncated(c2)) +
                       abs_series(Jz.truncated(c2)) * abs_series(uw.truncated(c2)) +
                       abs_series(Jc.truncated(c2)) * abs_series(differentiate(uz, Var::w));
    return terms * 4.0 + m;
}

} // namespace

std::vector<IdentityCheck> verify_identities(const WKBSolution &sol, double tol)
{
    std::vector<IdentityCheck> out;
    const auto &w = sol.w_curve;
    const auto wabs = abs_series(w);
    const auto curve_majorant = [&](const BiSeries &X) { return compose_w(abs_series(X), wabs); };

    // eikonal: 2 d_w S = 2 d_w phi exactly, and d_z S vanishes on the curve
    {
        const auto Sw = differentiate(sol.S, Var::w) * 2.0;
        const auto Pw = differentiate(sol.phi, Var::w) * 2.0;
        out.push_back(check_series("eikonal d_w", -1, Sw - Pw, abs_series(Pw), tol));
        // 2 d_z phi(z, w(z)) + f'(z) = 0, the coefficient of d_w in E1 on the curve
        const auto dz2 = differentiate(sol.phi, Var::z) * 2.0;
        const auto fp = differentiate(sol.f);
        const auto r = compose_w(dz2, w).truncated(fp.cap()) + fp;
        const auto m = compose_w(abs_series(dz2), wabs).truncated(fp.cap()) + abs_series(fp);
        out.push_back(check_series("eikonal 2 d_z phi + f' on curve", -1, r, m, tol));
    }
    // implicit curve
    {
        const auto num = sol.Btilde - sol.mu;
        out.push_back(check_series("curve B(z,w(z)) = B(x0)", -1, compose_w(num, w), curve_majorant(num), tol));
    }
    // first transport: 8 [d_z phi - d_z phi|curve] d_w a0 + (B - mu) a0
    {
        const auto &a0 = sol.amplitudes.front();
        const int c = a0.cap() - 1;
        const auto dz = differentiate(sol.phi, Var::z);
        const auto numV = (dz - BiSeries::lift_z(compose_w(dz, w), dz.cap(), dz.center())).truncated(c);
        const auto numVabs = (abs_series(dz) + BiSeries::lift_z(curve_majorant(dz), dz.cap(), dz.center())).truncated(c);
        const auto a0w = differentiate(a0, Var::w);
        const auto Bm = sol.Btilde.truncated(c) - sol.mu;
        const auto r = numV * a0w * 8.0 + Bm * a0.truncated(c);
        const auto m = numVabs * abs_series(a0w) * 8.0 + abs_series(Bm) * abs_series(a0.truncated(c));
        out.push_back(check_series("first transport", 0, r, m, tol));
    }
    const std::size_t n = sol.amplitudes.size();
    for (std::size_t j = 0; j < n; ++j) {
        const auto &aj = sol.amplitudes[j];
        if (j >= 1) {
            // (w - w(z)) [8 V d_w + F] a_j - 4 d_z d_w a_{j-1}
            const int c = aj.cap();
            const auto ajw = differentiate(aj, Var::w);
            const auto Vc = sol.V.truncated(c - 1), Fc = sol.F.truncated(c - 1), ajc = aj.truncated(c - 1);
            const auto X = (Vc * ajw * 8.0 + Fc * ajc).truncated(c);
            const auto Xabs =
                (abs_series(Vc) * abs_series(ajw) * 8.0 + abs_series(Fc) * abs_series(ajc)).truncated(c);
            const auto factor = BiSeries::var_w(c, aj.center()) - lift(w, c, aj.center());
            const auto rhs =
                differentiate(differentiate(sol.amplitudes[j - 1], Var::w), Var::z).truncated(c) * 4.0;
            const auto r = factor * X - rhs;
            const auto m = abs_series(factor) * Xabs + dzdw_majorant(sol, j - 1).truncated(c);
            out.push_back(check_series("transport", static_cast<int>(j), r, m, tol));
        }
        if (aj.cap() >= 2) {
            const auto dd = differentiate(differentiate(aj, Var::w), Var::z) * 4.0;
            const auto m = dzdw_majorant(sol, j);
            out.push_back(check_series("compatibility", static_cast<int>(j), compose_w(dd, w), compose_w(m, wabs), tol));
        }
    }
    // normalization a0(x0) = 1, a_j(x0) = 0
    for (std::size_t j = 0; j < n; ++j) {
        const cplx target = j == 0 ? 1.0 : 0.0;
        IdentityCheck c;
        c.name = "normalization";
        c.j = static_cast<int>(j);
        c.max_coeff = std::abs(sol.amplitudes[j].coeff(0, 0) - target);
        c.worst_degree = 0;
        c.scale = 1.0;
        c.ok = c.max_coeff <= tol;
        out.push_back(c);
    }
    return out;
}

WKBSolution solve_wkb(const BiSeries &Btilde, int N, double tol)
{
    const cplx b0 = Btilde.coeff(0, 0);
    const double tau = 1e-9;
    if (!(std::abs(b0) > tau)) {
        throw GammaRejection("not in Gamma: B(x0) = 0");
    }
    if (!(std::abs(Btilde.coeff(0, 1)) > tau)) {
        throw GammaRejection("not in Gamma: d_zbar B(x0) = 0");
    }
    if (N < 0) {
        throw ConfigError("transport order N must be >= 0");
    }
    const int D = Btilde.cap();
    if (D < 3 * (N + 2)) {
        std::ostringstream os;
        os << "degree cap " << D << " cannot carry N = " << N << " transport steps (need D >= " << 3 * (N + 2) << ")";
        throw ConfigError(os.str());
    }

    WKBSolution sol;
    sol.Btilde = Btilde;
    sol.N = N;
    sol.w_curve = implicit_w(Btilde);
    sol.phi = poisson_series(Btilde);
    const auto eik = eikonal_phase(sol.phi, sol.w_curve);
    sol.f = eik.f;
    sol.S = eik.S;
    const auto vf = divided_data(sol.phi, Btilde, sol.w_curve, tol);
    sol.V = vf.V;
    sol.F = vf.F;
    const auto ft = first_transport(Btilde, vf, sol.w_curve);
    sol.mu = ft.mu;
    sol.J = ft.J;
    sol.p = ft.p;
    sol.q = ft.q;
    sol.A0 = ft.A0;
    sol.A.push_back(ft.A0);
    sol.K.push_back(BiSeries(ft.a0.cap(), Btilde.center()));
    sol.amplitudes.push_back(ft.a0);
    for (int j = 0; j < N; ++j) {
        auto step = transport_step(sol, j, tol);
        sol.amplitudes.push_back(std::move(step.a));
        sol.A.push_back(std::move(step.A));
        sol.K.push_back(std::move(step.K));
    }
    sol.checks = verify_identities(sol, tol);
    for (const auto &c : sol.checks) {
        if (!c.ok) {
            std::ostringstream os;
            os << "series identity failed: " << c.name;
            if (c.j >= 0) {
                os << " (j = " << c.j << ")";
            }
            os << " at degree " << c.worst_degree << ": |coefficient| = " << c.max_coeff << " > " << tol << " x "
               << c.scale;
            throw IdentityFailure(os.str());
        }
    }
    return sol;
}

BoundFit fit_growth(const WKBSolution &sol, double R1, double R2)
{
    if (!(R1 > 0.0 && R2 > 0.0)) {
        throw DomainError("fit_growth: polydisc radii must be positive");
    }
    BoundFit fit;
    fit.polydisc = {R1, R2};
    constexpr int mesh = 32;
    for (const auto &a : sol.amplitudes) {
        double sup = 0.0;
        for (int i = 0; i < mesh; ++i) {
            const cplx z = std::polar(R1, 2.0 * M_PI * i / mesh);
            for (int k = 0; k < mesh; ++k) {
                const cplx w = std::polar(R2, 2.0 * M_PI * k / mesh);
                sup = std::max(sup, std::abs(evaluate(a, z, w).value));
            }
        }
        fit.per_j_norms.push_back(sup);
    }
    // least m with norm_j <= m^{j+1} j^{7j}
    for (std::size_t j = 0; j < fit.per_j_norms.size(); ++j) {
        const double jj = static_cast<double>(j);
        const double denom = j == 0 ? 1.0 : std::pow(jj, 7.0 * jj);
        const double m = std::pow(fit.per_j_norms[j] / denom, 1.0 / (jj + 1.0));
        fit.m_fitted = std::max(fit.m_fitted, m);
    }
    if (fit.m_fitted == 0.0) {
        fit.m_fitted = 1.0;
    }
    // log |a_j| = c + j log m + sigma j log j over j with nonzero norms
    std::vector<std::array<double, 3>> rows;
    std::vector<double> rhs;
    for (std::size_t j = 0; j < fit.per_j_norms.size(); ++j) {
        if (fit.per_j_norms[j] > 0.0) {
            const double jj = static_cast<double>(j);
            rows.push_back({1.0, jj, j == 0 ? 0.0 : jj * std::log(jj)});
            rhs.push_back(std::log(fit.per_j_norms[j]));
        }
    }
    if (rows.size() >= 3) {
        double M[3][4] = {};
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    M[a][b] += rows[r][static_cast<std::size_t>(a)] * rows[r][static_cast<std::size_t>(b)];
                }
                M[a][3] += rows[r][static_cast<std::size_t>(a)] * rhs[r];
            }
        }
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r) {
                if (std::abs(M[r][col]) > std::abs(M[piv][col])) {
                    piv = r;
                }
            }
            std::swap(M[col], M[piv]);
            for (int r = 0; r < 3; ++r) {
                if (r != col && M[col][col] != 0.0) {
                    const double fct = M[r][col] / M[col][col];
                    for (int k = col; k < 4; ++k) {
                        M[r][k] -= fct * M[col][k];
                    }
                }
            }
        }
        fit.m_sigma = std::exp(M[1][3] / M[1][1]);
        fit.sigma = M[2][3] / M[2][2];
    }
    return fit;
}

} // namespace cmag
