#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <cmag/cseries.hpp>
#include <cmag/errors.hpp>

using namespace cmag;

namespace
{

BiSeries random_series(std::mt19937_64 &rng, int cap)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BiSeries s(cap);
    for (int d = 0; d <= cap; ++d) {
        for (int b = 0; b <= d; ++b) {
            s.at(d - b, b) = {u(rng), u(rng)};
        }
    }
    return s;
}

double max_diff(const BiSeries &a, const BiSeries &b)
{
    return (a - b).max_abs();
}

double max_diff(const UniSeries &a, const UniSeries &b)
{
    return (a - b).max_abs();
}

} // namespace

TEST_CASE("algebra on small series")
{
    const auto one = BiSeries::constant(1.0, 4);
    const auto zw = BiSeries::monomial(1, 1, 1.0, 4);
    const auto prod = (one + zw) * (one - zw);
    CHECK(prod.coeff(0, 0) == cplx(1.0));
    CHECK(prod.coeff(2, 2) == cplx(-1.0));
    CHECK(prod.terms().size() == 2);

    const auto a = zw + BiSeries::var_z(4) * cplx(0, 2);
    CHECK(max_diff(a + BiSeries(4), a) == 0.0);

    const auto trunc = BiSeries::var_z(1) * BiSeries::var_w(1);
    CHECK(trunc.is_zero());
    CHECK(trunc.terms().empty());
}

TEST_CASE("structural errors")
{
    CHECK_THROWS_AS(BiSeries(3) + BiSeries(4), StructuralError);
    CHECK_THROWS_AS(BiSeries(3) * BiSeries(3, {cplx(1.0), cplx(1.0)}), StructuralError);
    CHECK_THROWS_AS(UniSeries(2) * UniSeries(3), StructuralError);
    BiSeries s(2);
    CHECK_THROWS_AS(s.at(2, 1), StructuralError);
    CHECK(s.coeff(2, 1) == cplx{});
}

TEST_CASE("ring axioms on random series")
{
    std::mt19937_64 rng(12345);
    const int cap = 10;
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_series(rng, cap);
        const auto b = random_series(rng, cap);
        const auto c = random_series(rng, cap);
        const double scale = 1.0 + ((a * b) * c).max_abs();
        CHECK(max_diff((a * b) * c, a * (b * c)) <= 1e-13 * scale);
        CHECK(max_diff(a * b, b * a) <= 1e-13 * scale);
        CHECK(max_diff(a * (b + c), a * b + a * c) <= 1e-13 * scale);
        CHECK(max_diff(a + b, b + a) == 0.0);
    }
}

TEST_CASE("multiplication matches a naive double loop")
{
    std::mt19937_64 rng(7);
    const int cap = 6;
    const auto a = random_series(rng, cap);
    const auto b = random_series(rng, cap);
    BiSeries ref(cap);
    for (const auto &ta : a.terms()) {
        for (const auto &tb : b.terms()) {
            if (ta.alpha + tb.alpha + ta.beta + tb.beta <= cap) {
                ref.at(ta.alpha + tb.alpha, ta.beta + tb.beta) += ta.value * tb.value;
            }
        }
    }
    CHECK(max_diff(a * b, ref) <= 1e-14);
}

TEST_CASE("differentiate and antiderivative")
{
    const auto zw2 = BiSeries::monomial(1, 2, 1.0, 5);
    const auto d = differentiate(zw2, Var::w);
    CHECK(d.cap() == 4);
    CHECK(d.coeff(1, 1) == cplx(2.0));
    CHECK(d.terms().size() == 1);
    CHECK(differentiate(BiSeries::constant(3.0, 5), Var::z).is_zero());

    const auto i = antiderivative(BiSeries::monomial(1, 1, 1.0, 5), Var::w);
    CHECK(i.coeff(1, 2) == cplx(0.5));
    CHECK(antiderivative(BiSeries(5), Var::z).is_zero());

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_series(rng, 8).truncated(7).truncated(8);
        for (Var v : {Var::z, Var::w}) {
            const auto back = differentiate(antiderivative(a, v), v);
            CHECK(max_diff(back, a.truncated(7)) <= 1e-14);
        }
    }
}

TEST_CASE("antiderivative records dropped terms")
{
    const auto top = BiSeries::monomial(2, 1, 1.0, 3);
    const auto i = antiderivative(top, Var::z);
    CHECK(i.is_zero());
    CHECK(i.truncation_flag());
    const auto j = antiderivative(top, Var::z, 4);
    CHECK(j.coeff(3, 1) == cplx(1.0 / 3.0));
    CHECK_FALSE(j.truncation_flag());
}

TEST_CASE("compose_w")
{
    const cplx b(0.3, 1.0), c(2.0, -0.5);
    UniSeries w(6);
    w.at(1) = -b / c;
    const auto out = compose_w(BiSeries::var_w(6), w);
    CHECK(std::abs(out[1] + b / c) < 1e-15);
    CHECK(out.max_abs() == doctest::Approx(std::abs(b / c)));

    auto a = BiSeries::var_z(6) * BiSeries::var_z(6) + 2.0;
    const auto same = compose_w(a, w);
    CHECK(same[0] == cplx(2.0));
    CHECK(same[2] == cplx(1.0));

    UniSeries bad(6);
    bad.at(0) = 1.0;
    CHECK_THROWS_AS(compose_w(a, bad), DomainError);
}

TEST_CASE("exp_series")
{
    CHECK(max_diff(exp_series(BiSeries(6)), BiSeries::constant(1.0, 6)) == 0.0);
    const auto z = BiSeries::var_z(10);
    CHECK(max_diff(exp_series(z) * exp_series(-z), BiSeries::constant(1.0, 10)) <= 1e-15);

    std::mt19937_64 rng(3);
    const auto a = random_series(rng, 9);
    const auto e = exp_series(a);
    for (Var v : {Var::z, Var::w}) {
        const auto lhs = differentiate(e, v);
        const auto rhs = differentiate(a, v) * e.truncated(8);
        CHECK(max_diff(lhs, rhs) <= 1e-12 * (1.0 + lhs.max_abs()));
    }

    UniSeries u(8);
    u.at(1) = 1.0;
    const auto eu = exp_series(u);
    double fact = 1.0;
    for (int k = 0; k <= 8; ++k) {
        CHECK(std::abs(eu[k] - 1.0 / fact) < 1e-15);
        fact *= k + 1;
    }
}

TEST_CASE("reciprocal and pow")
{
    UniSeries one_minus_z(7);
    one_minus_z.at(0) = 1.0;
    one_minus_z.at(1) = -1.0;
    const auto geo = reciprocal(one_minus_z);
    for (int k = 0; k <= 7; ++k) {
        CHECK(geo[k] == cplx(1.0));
    }

    std::mt19937_64 rng(5);
    auto a = random_series(rng, 9);
    a.at(0, 0) = 2.0;
    const auto r = reciprocal(a);
    CHECK(max_diff(a * r, BiSeries::constant(1.0, 9)) <= 1e-12);
    CHECK(max_diff(reciprocal(r), a) <= 1e-10 * a.max_abs());

    CHECK_THROWS_AS(reciprocal(BiSeries::var_z(3), "V"), DivisionError);
    try {
        (void)reciprocal(BiSeries::var_z(3), "V");
    } catch (const DivisionError &e) {
        CHECK(std::string(e.what()).find("V") != std::string::npos);
    }

    const auto sq = pow_series(a, 0.5);
    CHECK(max_diff(sq * sq, a) <= 1e-12 * a.max_abs());
    const auto inv = pow_series(a, -1.0);
    CHECK(max_diff(inv, r) <= 1e-12 * r.max_abs());
}

TEST_CASE("exact_divide_by_curve")
{
    const int cap = 8;
    UniSeries w(cap);
    w.at(1) = cplx(-0.5, 0.25);
    w.at(2) = cplx(0.1, 0.3);
    w.at(5) = cplx(-0.2, 0.0);
    const auto factor = BiSeries::var_w(cap) - BiSeries::lift_z(w, cap);

    const auto q1 = exact_divide_by_curve(factor, w);
    CHECK(q1.quotient.cap() == cap - 1);
    CHECK(max_diff(q1.quotient, BiSeries::constant(1.0, cap - 1)) <= 1e-15);

    const auto g = BiSeries::constant(1.0, cap) + BiSeries::monomial(1, 1, 1.0, cap);
    const auto q2 = exact_divide_by_curve(factor * g, w);
    CHECK(max_diff(q2.quotient, g.truncated(cap - 1)) <= 1e-14);
    CHECK(q2.reconstruction <= 1e-14);

    std::mt19937_64 rng(11);
    const auto h = random_series(rng, cap);
    const auto q3 = exact_divide_by_curve(factor * h, w);
    CHECK(max_diff(q3.quotient, h.truncated(cap - 1)) <= 1e-13);

    CHECK_THROWS_AS(exact_divide_by_curve(factor + 1e-3, w), PreconditionError);
}

TEST_CASE("evaluate and realify")
{
    const auto c = BiSeries::constant(cplx(2.0, -1.0), 5);
    CHECK(evaluate(c, cplx(0.3, 0.1), cplx(-0.2)).value == cplx(2.0, -1.0));
    const auto zw = BiSeries::monomial(1, 1, 1.0, 5);
    CHECK(evaluate(zw, 2.0, 3.0).value == cplx(6.0));

    const double x1 = 0.3, x2 = -0.7;
    CHECK(std::abs(realify(zw, x1, x2) - (x1 * x1 + x2 * x2)) < 1e-15);
    CHECK(realify(BiSeries::var_z(5), x1, x2) == cplx(x1, x2));

    // centered series: evaluation subtracts the center
    const BiSeries::Center ctr{cplx(1.0), cplx(1.0)};
    const auto shifted = BiSeries::var_z(3, ctr);
    CHECK(evaluate(shifted, 1.5, 0.0).value == cplx(0.5));

    UniSeries geo(20);
    for (int k = 0; k <= 20; ++k) {
        geo.at(k) = 1.0;
    }
    const auto g2 = BiSeries::lift_z(geo, 20);
    const auto ev = evaluate(g2, 0.5, 0.0);
    CHECK(std::abs(ev.value - 2.0) < 1e-5);
    CHECK(ev.tail_bound == doctest::Approx(std::pow(0.5, 21) / 0.5));
}

TEST_CASE("implicit_w")
{
    const cplx a(1.0, 0.2), b(0.4, -1.0), c(0.7, 0.3);
    auto lin = BiSeries::constant(a, 10) + BiSeries::var_z(10) * b + BiSeries::var_w(10) * c;
    const auto w = implicit_w(lin);
    CHECK(std::abs(w[1] + b / c) < 1e-15);
    for (int k = 2; k <= 10; ++k) {
        CHECK(w[k] == cplx{});
    }
    const auto back = compose_w(lin, w);
    for (int k = 1; k <= 10; ++k) {
        CHECK(std::abs(back[k]) < 1e-15);
    }

    CHECK(implicit_w(BiSeries::constant(1.0, 6) + BiSeries::var_w(6)).max_abs() == 0.0);

    std::mt19937_64 rng(17);
    auto B = random_series(rng, 16);
    B.at(0, 1) = 1.5;
    const auto wr = implicit_w(B);
    CHECK(std::abs(wr[1] + B.coeff(1, 0) / B.coeff(0, 1)) < 1e-15);
    const auto r = compose_w(B, wr);
    double worst = 0.0;
    for (int k = 1; k <= 16; ++k) {
        worst = std::max(worst, std::abs(r[k]));
    }
    CHECK(worst <= 1e-11 * B.max_abs());

    CHECK_THROWS_AS(implicit_w(BiSeries::constant(1.0, 4) + BiSeries::var_z(4)), DomainError);
}
