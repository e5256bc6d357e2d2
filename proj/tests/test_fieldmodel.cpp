#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <cmag/errors.hpp>
#include <cmag/fieldmodel.hpp>

using namespace cmag;

namespace
{

constexpr double pi = M_PI;

// Wirtinger derivatives of B by central differences.
std::array<cplx, 2> fd_wirtinger(const MagneticField &f, const Point &x, double s)
{
    const cplx d1 = (f.B({x[0] + s, x[1]}) - f.B({x[0] - s, x[1]})) / (2 * s);
    const cplx d2 = (f.B({x[0], x[1] + s}) - f.B({x[0], x[1] - s})) / (2 * s);
    return {0.5 * (d1 - cplx(0, 1) * d2), 0.5 * (d1 + cplx(0, 1) * d2)};
}

Poly2 random_real_poly(std::mt19937_64 &rng, int deg)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Poly2 p;
    for (int d = 0; d <= deg; ++d) {
        for (int j = 0; j <= d; ++j) {
            p += Poly2::monomial(d - j, j, u(rng));
        }
    }
    return p;
}

} // namespace

TEST_CASE("Poly2 basics")
{
    const Poly2 p = Poly2::monomial(2, 1, 3.0) + Poly2::monomial(0, 0, cplx(0, 1));
    CHECK(p(2.0, 5.0) == cplx(60.0, 1.0));
    CHECK(p.d1()(2.0, 5.0) == cplx(60.0));
    CHECK(p.d2()(2.0, 5.0) == cplx(12.0));
    CHECK(p.integrate_x1().d1()(0.7, -0.2) == p(0.7, -0.2));
    CHECK(p.degree() == 3);
    const auto s = p.complexify({0.3, -0.4}, 5);
    CHECK(std::abs(realify(s, 0.1, 0.2) - p(0.4, -0.2)) < 1e-14);
}

TEST_CASE("wirtinger_at")
{
    const auto osc = make_oscillating();
    const auto spec = make_field_spec(osc, {pi / 3, -pi / 2}, 8);
    const auto w = wirtinger_at(spec);
    CHECK(std::abs(w.dzbar - 0.5 * std::cos(pi / 3)) < 1e-15);
    CHECK(std::abs(w.dz - 0.5 * std::cos(pi / 3)) < 1e-15);

    // at the origin the two halves of the d_zbar derivative cancel
    const auto s0 = make_field_spec(osc, {0.0, 0.0}, 8);
    const auto fd = fd_wirtinger(*osc, {0.0, 0.0}, 1e-4);
    CHECK(std::abs(wirtinger_at(s0).dzbar - fd[1]) < 1e-8);
    CHECK(std::abs(wirtinger_at(s0).dz - 1.0) < 1e-15);

    const auto constB = make_polynomial_potential(Poly2{}, Poly2::monomial(1, 0, 2.0));
    const auto wc = wirtinger_at(make_field_spec(constB, {0.1, 0.2}, 4));
    CHECK(wc.dz == cplx{});
    CHECK(wc.dzbar == cplx{});

    // B = x1 - i x2, i.e. B~ = w
    const auto lin = make_polynomial_potential(Poly2{}, Poly2::monomial(2, 0, 0.5) + Poly2::monomial(1, 1, cplx(0, -1)));
    const auto wl = wirtinger_at(make_field_spec(lin, {0.0, 0.0}, 4));
    CHECK(std::abs(wl.dz) < 1e-15);
    CHECK(std::abs(wl.dzbar - 1.0) < 1e-15);
}

TEST_CASE("wirtinger data agree with finite differences on builtins")
{
    const std::vector<std::pair<FieldPtr, Point>> cases{
        {make_oscillating(), {0.4, -1.1}},
        {make_miller_simon(cplx(1, 1), 1.0), {0.7, 0.3}},
        {make_exponential(0.4), {0.2, -0.5}},
        {make_polynomial_field(1.0, cplx(0, 1), 1.0), {0.3, 0.6}},
    };
    for (const auto &[f, x] : cases) {
        CAPTURE(f->name());
        const auto jet = f->B_jet(x);
        const auto fd = fd_wirtinger(*f, x, 1e-4);
        const double scale = std::max(std::abs(jet[1]), std::abs(jet[2]));
        CHECK(std::abs(jet[1] - fd[0]) <= 1e-7 * scale);
        CHECK(std::abs(jet[2] - fd[1]) <= 1e-7 * scale);
        const auto taylor = f->B_taylor(x, 3);
        CHECK(std::abs(taylor.coeff(0, 0) - f->B(x)) <= 1e-13 * std::abs(f->B(x)));
        CHECK(std::abs(taylor.coeff(1, 0) - jet[1]) <= 1e-13 * scale);
        CHECK(std::abs(taylor.coeff(0, 1) - jet[2]) <= 1e-13 * scale);
    }
}

TEST_CASE("Taylor data reproduce B nearby")
{
    const auto osc = make_oscillating();
    const Point x0{pi / 3, -pi / 2};
    const auto s = osc->B_taylor(x0, 24);
    for (const Point d : {Point{0.2, 0.1}, Point{-0.3, 0.25}, Point{0.0, -0.4}}) {
        CHECK(std::abs(realify(s, d[0], d[1]) - osc->B({x0[0] + d[0], x0[1] + d[1]})) < 1e-14);
    }
    const auto ms = make_miller_simon(cplx(1, 0.5), 1.5);
    const Point y0{1.0, 0.5};
    const auto sm = ms->B_taylor(y0, 20);
    const Point d{0.05, -0.04};
    CHECK(std::abs(realify(sm, d[0], d[1]) - ms->B({y0[0] + d[0], y0[1] + d[1]})) < 1e-12);
    CHECK_THROWS_AS(ms->B_taylor({0.0, 0.0}, 4), DomainError);
}

TEST_CASE("field spec consistency")
{
    class Wrong final : public MagneticField
    {
    public:
        std::string name() const override
        {
            return "wrong";
        }
        CVec2 A(const Point &x) const override
        {
            return {0.0, x[0]};
        }
        BiSeries B_taylor(const Point &, int cap) const override
        {
            return BiSeries::constant(2.0, cap);
        }
        double analytic_radius(const Point &) const override
        {
            return 1.0;
        }
    };
    CHECK_THROWS_AS(make_field_spec(std::make_shared<Wrong>(), {0.0, 0.0}, 4), ConfigError);
    const auto good = make_field_spec(make_oscillating(), {0.5, 0.5}, 4);
    CHECK(good.analytic_radius > 0.0);
}

TEST_CASE("compute_Q")
{
    const auto osc = make_field_spec(make_oscillating(), {pi / 3, -pi / 2}, 4);
    const auto r = compute_Q(osc);
    CHECK(std::abs(r.Q1 - std::sqrt(3.0) / 4) <= 1e-12);
    CHECK(std::abs(r.Q2) <= 1e-12);
    CHECK(std::abs(r.Q3 - 0.5) <= 1e-12);
    CHECK(r.in_gamma);
    CHECK(r.det2 == r.Q1 * r.Q3 - r.Q2 * r.Q2);
    CHECK(std::abs(r.B0 - cplx(std::sqrt(3.0) / 2, -1.0)) < 1e-15);

    const auto bad = compute_Q(*make_oscillating(), {pi / 2, -pi / 2});
    CHECK_FALSE(bad.in_gamma);
    REQUIRE(bad.failed_conditions.size() == 1);
    CHECK(bad.failed_conditions[0] == "d_zbar B(x) = 0");

    const auto real = make_polynomial_potential(Poly2::monomial(0, 1, -1.0), Poly2::monomial(2, 0, 1.0));
    const auto rr = compute_Q(make_field_spec(real, {0.3, 0.2}, 4));
    CHECK(std::abs(rr.det2) < 1e-15);
    CHECK_FALSE(rr.in_gamma);
}

TEST_CASE("polynomial example Q values and closed form")
{
    const cplx a = 1.0, b(0.0, 1.0), c = 1.0;
    const auto spec = make_field_spec(make_polynomial_field(a, b, c), {0.0, 0.0}, 6);
    const auto r = compute_Q(spec);
    CHECK(std::abs(r.Q1 - 0.25) < 1e-15);
    CHECK(std::abs(r.Q2) < 1e-15);
    CHECK(std::abs(r.Q3 - 0.25) < 1e-15);
    CHECK(std::abs(r.det2 - 1.0 / 16) < 1e-15);
    CHECK(r.in_gamma);

    // coefficient formulas for a2 = d = e = g = 0, on random admissible data
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 20; ++k) {
        const double a1 = std::abs(u(rng)) + 0.1, b1 = u(rng), b2 = u(rng), c1 = u(rng), c2 = u(rng);
        const auto s = make_field_spec(make_polynomial_field(a1, cplx(b1, b2), cplx(c1, c2)), {0.0, 0.0}, 4);
        const auto q = compute_Q(s);
        const double den = (b1 - c2) * (b1 - c2) + (b2 + c1) * (b2 + c1);
        const double q1 = 0.5 * a1 * (b1 * b1 + b2 * b2 + b2 * c1 - b1 * c2) / den;
        const double q2 = -0.5 * a1 * (b1 * c1 + b2 * c2) / den;
        const double q3 = 0.5 * a1 * (c1 * c1 + c2 * c2 + b2 * c1 - b1 * c2) / den;
        const double scale = std::abs(q1) + std::abs(q3) + 1.0;
        CHECK(std::abs(q.Q1 - q1) < 1e-12 * scale);
        CHECK(std::abs(q.Q2 - q2) < 1e-12 * scale);
        CHECK(std::abs(q.Q3 - q3) < 1e-12 * scale);
        // determinant with the squared bracket in the denominator
        const double det = a1 * a1 * (b2 * c1 - b1 * c2) / (4.0 * den);
        CHECK(std::abs(q.det2 - det) < 1e-11 * scale * scale);
    }
}

TEST_CASE("degenerate Q for real potentials")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto f = make_polynomial_potential(random_real_poly(rng, 4), random_real_poly(rng, 4));
        for (int k = 0; k < 10; ++k) {
            const Point x{u(rng), u(rng)};
            const auto r = compute_Q(*f, x);
            if (std::isnan(r.det2)) {
                continue; // d_zbar B vanished; not a Q evaluation
            }
            CHECK(std::abs(r.det2) <= 1e-12 * std::pow(std::abs(r.Q1) + std::abs(r.Q3), 2) + 1e-300);
        }
    }
}

TEST_CASE("gauge covariance of B")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto osc = make_oscillating();
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = random_real_poly(rng, 3);
        const auto shifted = make_gauge_shifted(osc, g);
        const Point x{u(rng), u(rng)};
        const auto a = compute_Q(*osc, x);
        const auto b = compute_Q(*shifted, x);
        CHECK(std::abs(a.B0 - b.B0) <= 1e-9 * std::abs(a.B0));
        CHECK(std::abs(a.dzbarB - b.dzbarB) <= 1e-9 * std::abs(a.dzbarB));
        // a real g leaves Im A and hence the Q-values untouched
        CHECK(std::abs(a.Q1 - b.Q1) <= 1e-12);
        CHECK(std::abs(a.Q2 - b.Q2) <= 1e-12);
        CHECK(std::abs(a.Q3 - b.Q3) <= 1e-12);
        // the curl of the shifted potential still matches B
        CHECK(std::abs(shifted->dA(x)[1][0] - shifted->dA(x)[0][1] - osc->B(x)) < 1e-12);
    }
    // complex g: Q moves by the Hessian of Im g
    const Poly2 g = Poly2::monomial(2, 0, cplx(0, 1));
    const auto shifted = make_gauge_shifted(osc, g);
    const Point x{0.3, 0.1};
    CHECK(std::abs(compute_Q(*shifted, x).Q1 - compute_Q(*osc, x).Q1 - 1.0) < 1e-12);
}

TEST_CASE("gamma scan of the oscillating field")
{
    const int n = 257;
    const auto raster = gamma_scan(*make_oscillating(), {-2 * pi, 2 * pi, -2 * pi, 2 * pi}, n, n, 2);
    int wrong = 0;
    for (int i2 = 0; i2 < n; ++i2) {
        for (int i1 = 0; i1 < n; ++i1) {
            // grid step pi/64; x2 = -pi/2 + 2 pi n at indices 96, 224
            const bool on_line = (i2 % 128) == 96;
            const int m = i1 % 128;
            const bool x1_ok = m > 0 && m < 64 && m != 32;
            wrong += raster.at(i1, i2).in_gamma != (on_line && x1_ok);
        }
    }
    CHECK(wrong == 0);
    CHECK(raster.count_in_gamma() == 2 * 2 * 62);

    const auto real_ms = gamma_scan(*make_miller_simon(1.0, 1.0), {-2, 2, -2, 2}, 33, 33);
    CHECK(real_ms.count_in_gamma() == 0);
    const auto exp_scan = gamma_scan(*make_exponential(0.4), {0.5, 1.5, 0.5, 1.5}, 17, 17);
    CHECK(exp_scan.count_in_gamma() == 0);
}

TEST_CASE("sampled conditions C1 and C2")
{
    const double c = 0.4;
    const auto ex = make_exponential(c);
    // Im A = c e^{|x|^2} (-x2, x1), so |Im A|^2 = c^2 |x|^2 e^{2|x|^2}
    const Point y{0.6, -0.3};
    const auto ay = ex->A(y);
    const double r2 = 0.45;
    CHECK(std::abs(std::norm(ay[0].imag()) + std::norm(ay[1].imag()) - c * c * r2 * std::exp(2 * r2)) < 1e-14);
    CHECK(std::abs(ex->B(y).imag() - 2 * c * (1 + r2) * std::exp(r2)) < 1e-14);

    // C2 with C = 0 holds near the origin, where c |x|^2 e^{|x|^2} <= 2 eps (1 + |x|^2) ...
    ConditionCheckConfig cfg;
    cfg.region = {-0.7, 0.7, -0.7, 0.7};
    cfg.density = 81;
    cfg.h = 1.0;
    cfg.epsilon = 0.45;
    cfg.has_C = true;
    cfg.C_const = 0.0;
    CHECK(check_C(*ex, cfg, Condition::C2, 1).pass);
    // ... but the extra factor e^{|x|^2} defeats it on larger discs
    cfg.region = {-3, 3, -3, 3};
    CHECK_FALSE(check_C(*ex, cfg, Condition::C2, 1).pass);

    ConditionCheckConfig autocfg;
    autocfg.region = {-8, 8, -8, 8};
    autocfg.density = 161;
    autocfg.epsilon = 0.45;
    CHECK_FALSE(check_C_any_sign(*ex, autocfg, Condition::C2).pass);
    autocfg.epsilon = 0.9;
    CHECK_FALSE(check_C_any_sign(*ex, autocfg, Condition::C1).pass);

    const auto ms = make_miller_simon(cplx(1, 1), 1.0);
    autocfg.epsilon = 0.9;
    CHECK(check_C_any_sign(*ms, autocfg, Condition::C1).pass);
    autocfg.epsilon = 0.45;
    CHECK(check_C_any_sign(*ms, autocfg, Condition::C2).pass);

    cfg.has_C = true;
    cfg.C_const = 10.0;
    cfg.epsilon = 0.45;
    CHECK(check_C(*ms, cfg, Condition::C1, 1).pass);
    CHECK(check_C(*ms, cfg, Condition::C2, 1).pass);

    // Im A = 0 and Re B bounded below: C = -eps h inf Re B suffices
    const auto real = make_polynomial_potential(Poly2{}, Poly2::monomial(1, 0, 2.0));
    ConditionCheckConfig rc;
    rc.epsilon = 0.5;
    rc.has_C = true;
    rc.C_const = -0.5 * 1.0 * 2.0;
    const auto v = check_C(*real, rc, Condition::C1, 1);
    CHECK(v.pass);
    CHECK(std::abs(v.min_slack) < 1e-12);

    rc.epsilon = 0.7;
    CHECK_THROWS_AS(check_C(*real, rc, Condition::C2, 1), ConfigError);
}

TEST_CASE("trend hypotheses")
{
    const std::vector<double> radii{1.0, 1.5, 2.0, 2.5, 3.0};
    const auto ex = check_H(*make_exponential(0.4), radii);
    CHECK(ex.H2.diverges);
    CHECK_FALSE(ex.H1.diverges);
    CHECK(ex.H3.diverges);

    // A1 = 0, A2 = x1 (x1^8 / 9 + x2^8) + i x1 (x1^2 / 3 + x2^2)
    const Poly2 a2 = Poly2::monomial(9, 0, 1.0 / 9) + Poly2::monomial(1, 8, 1.0) +
                     Poly2::monomial(3, 0, cplx(0, 1.0 / 3)) + Poly2::monomial(1, 2, cplx(0, 1));
    const auto f16 = make_polynomial_potential(Poly2{}, a2);
    CHECK(std::abs(f16->B({0.7, -0.4}) -
                   cplx(std::pow(0.7, 8) + std::pow(0.4, 8), 0.49 + 0.16)) < 1e-14);
    const auto h16 = check_H(*f16, radii);
    CHECK(h16.H2.diverges);
    CHECK_FALSE(h16.H3.diverges);
    CHECK(h16.H1.diverges);
    CHECK(h16.H1.sign == 1);

    const auto bounded = check_H(*make_oscillating(), radii);
    CHECK_FALSE(bounded.H1.diverges);
    CHECK_FALSE(bounded.H2.diverges);
    CHECK_FALSE(bounded.H3.diverges);
}

TEST_CASE("Weyl symbol and bracket")
{
    const auto osc = make_oscillating();
    const Point x0{pi / 3, -pi / 2};
    const auto a = osc->A(x0);
    const auto ws = weyl_bracket(*osc, x0, {a[0].real(), a[1].real()});
    CHECK(std::abs(ws.p) <= 1e-9);
    CHECK(std::abs(ws.bracket) <= 1e-6);

    const auto real = make_polynomial_potential(Poly2::monomial(0, 1, -1.0), Poly2::monomial(3, 0, 1.0));
    for (const Point xi : {Point{0.3, -0.1}, Point{2.0, 1.0}}) {
        const auto r = weyl_bracket(*real, {0.4, 0.9}, xi);
        CHECK(r.p.imag() == 0.0);
        CHECK(r.bracket == 0.0);
    }

    // A1 = x2 + i x1^2, A2 = x1 x2 + i x2, bracket derived by hand
    const auto poly = make_polynomial_potential(Poly2::monomial(0, 1, 1.0) + Poly2::monomial(2, 0, cplx(0, 1)),
                                                Poly2::monomial(1, 1, 1.0) + Poly2::monomial(0, 1, cplx(0, 1)));
    const double x1 = 0.3, x2 = 0.4, k1 = 0.5, k2 = -0.2;
    const double e1 = k1 - x2, e2 = k2 - x1 * x2, i1 = x1 * x1, i2 = x2;
    const double dRe1 = 2 * e2 * (-x2) - 2 * i1 * (2 * x1);
    const double dRe2 = 2 * e1 * (-1) + 2 * e2 * (-x1) - 2 * i2;
    const double dIm1 = -2 * (e1 * 2 * x1 + (-x2) * i2);
    const double dIm2 = -2 * (-i1 + (-x1) * i2 + e2);
    const double oracle = 2 * e1 * dIm1 + 2 * e2 * dIm2 + 2 * i1 * dRe1 + 2 * i2 * dRe2;
    const auto got = weyl_bracket(*poly, {x1, x2}, {k1, k2});
    CHECK(std::abs(got.bracket - oracle) < 1e-8);
    CHECK(std::abs(oracle) > 0.1);
    CHECK(std::abs(got.p - cplx(e1 * e1 + e2 * e2 - i1 * i1 - i2 * i2, -2 * (e1 * i1 + e2 * i2))) < 1e-15);
}
