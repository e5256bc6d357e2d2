#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>

#include <cmag/errors.hpp>
#include <cmag/serialize.hpp>

using namespace cmag;

namespace
{

bool same_bits(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

bool same_bits(const BiSeries &a, const BiSeries &b)
{
    if (a.cap() != b.cap() || a.truncation_flag() != b.truncation_flag()) {
        return false;
    }
    for (const auto &t : a.terms()) {
        const cplx v = b.coeff(t.alpha, t.beta);
        if (!same_bits(t.value.real(), v.real()) || !same_bits(t.value.imag(), v.imag())) {
            return false;
        }
    }
    return same_bits(a.center()[0].real(), b.center()[0].real()) &&
           same_bits(a.center()[1].imag(), b.center()[1].imag());
}

} // namespace

TEST_CASE("BiSeries round trip is bit-exact")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int trial = 0; trial < 50; ++trial) {
        BiSeries a(9, {cplx(u(rng), u(rng)), cplx(u(rng), u(rng))});
        for (const auto &t : a.terms()) {
            a.at(t.alpha, t.beta) = cplx(std::ldexp(u(rng), ex(rng)), std::ldexp(u(rng), ex(rng)));
        }
        a.at(1, 1) = cplx(std::numeric_limits<double>::denorm_min(), -std::numeric_limits<double>::max());
        a.at(0, 0) = cplx(-0.0, 0.1);
        a.set_truncation_flag(trial % 2 == 0);
        const auto text = to_json(a).dump();
        const auto b = biseries_from_json(json::parse(text));
        CHECK(same_bits(a, b));
        CHECK(to_json(b).dump() == text);
    }
}

TEST_CASE("UniSeries round trip")
{
    UniSeries a(std::vector<cplx>{cplx(0.1, 0.2), cplx(1.0 / 3.0, -2.0 / 7.0), cplx(1e-310, 1e300)});
    const auto b = uniseries_from_json(json::parse(to_json(a).dump()));
    for (int k = 0; k <= 2; ++k) {
        CHECK(same_bits(a[k].real(), b[k].real()));
        CHECK(same_bits(a[k].imag(), b[k].imag()));
    }
    CHECK_THROWS_AS(uniseries_from_json(json::parse(R"({"cap": 3, "coeffs": [[1,0]]})")), ConfigError);
}

TEST_CASE("WKBSolution dump is deterministic and round-trips")
{
    const auto spec = make_field_spec(make_oscillating(), {M_PI / 3, -M_PI / 2}, 15);
    const auto s1 = solve_wkb(spec.Btilde, 3);
    const auto s2 = solve_wkb(spec.Btilde, 3);
    const auto t1 = to_json(s1).dump();
    CHECK(t1 == to_json(s2).dump());
    const auto back = wkb_from_json(json::parse(t1));
    CHECK(to_json(back).dump() == t1);
    REQUIRE(back.amplitudes.size() == s1.amplitudes.size());
    for (std::size_t j = 0; j < back.amplitudes.size(); ++j) {
        CHECK(same_bits(back.amplitudes[j], s1.amplitudes[j]));
    }
    CHECK(back.mu == s1.mu);
}

TEST_CASE("field files")
{
    const Point x{0.3, -0.4};
    auto osc = field_from_json(json::parse(R"({"builtin": "oscillating"})"));
    CHECK(osc->B(x) == make_oscillating()->B(x));
    auto ms = field_from_json(json::parse(R"({"builtin": "miller_simon", "c": [1, 1], "alpha": 1})"));
    CHECK(ms->B(x) == make_miller_simon({1, 1}, 1)->B(x));
    auto ex = field_from_json(json::parse(R"({"builtin": "exponential", "c": 0.4})"));
    CHECK(ex->B(x) == make_exponential(0.4)->B(x));
    auto pf = field_from_json(json::parse(R"({"builtin": "polynomial", "a": 1, "b": 0, "c": 1})"));
    CHECK(std::abs(pf->B(x) - make_polynomial_field(1.0, 0.0, 1.0)->B(x)) < 1e-15);

    // A = (0, x1 + i x1 x2): B = 1 + i x2
    auto user = field_from_json(json::parse(R"({"A2": [[1, 0, 1, 0], [1, 1, 0, 1]]})"));
    CHECK(std::abs(user->B(x) - cplx(1.0, x[1])) < 1e-9);
    auto gauged = field_from_json(json::parse(R"({"A2": [[1, 0, 1]], "gauge": [[2, 1, 0.5, 0.25]]})"));
    CHECK(std::abs(gauged->B(x) - 1.0) < 1e-9);

    CHECK_THROWS_AS(field_from_json(json::parse(R"({"builtin": "nope"})")), ConfigError);
    CHECK_THROWS_AS(field_from_json(json::parse(R"({"x": 1})")), ConfigError);
    CHECK_THROWS_AS(field_from_json(json::parse(R"({"A1": [[1, -1, 1]]})")), ConfigError);
    CHECK_THROWS_AS(field_from_json(json::parse(R"({"A1": "x"})")), ConfigError);
}

TEST_CASE("report forms")
{
    const auto r = compute_Q(*make_oscillating(), {M_PI / 2, -M_PI / 2});
    const auto j = to_json(r);
    CHECK(j["in_gamma"] == false);
    CHECK(j["Q1"].is_null());
    const auto g = to_json(compute_Q(*make_oscillating(), {M_PI / 3, -M_PI / 2}));
    CHECK(g["in_gamma"] == true);
    CHECK(g["Q1"].get<double>() == doctest::Approx(std::sqrt(3.0) / 4));
}
