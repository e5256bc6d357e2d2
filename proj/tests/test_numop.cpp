#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include <cmag/errors.hpp>
#include <cmag/numop.hpp>

using namespace cmag;

namespace
{

constexpr double pi = M_PI;
const Point kOsc{pi / 3, -pi / 2};
const cplx I(0.0, 1.0);

// e^{i k.x} e^{-a |x - c|^2} and its closed-form image under L.
struct WavePacket {
    Point c;
    double a;
    Point k;
    cplx u(const Point &x) const
    {
        const double dx = x[0] - c[0], dy = x[1] - c[1];
        return std::exp(I * (k[0] * x[0] + k[1] * x[1]) - a * (dx * dx + dy * dy));
    }
    cplx Lu(const MagneticField &f, double h, const Point &x) const
    {
        const cplx g1 = I * k[0] - 2 * a * (x[0] - c[0]), g2 = I * k[1] - 2 * a * (x[1] - c[1]);
        const cplx v = u(x);
        const cplx lap = (g1 * g1 + g2 * g2 - 4 * a) * v;
        const auto A = f.A(x);
        const auto J = f.dA(x);
        return -h * h * lap + 2.0 * I * h * (A[0] * g1 + A[1] * g2) * v + I * h * (J[0][0] + J[1][1]) * v +
               (A[0] * A[0] + A[1] * A[1]) * v;
    }
};

double max_interior_error(const MagneticField &f, double h, const WavePacket &w, int n)
{
    const Grid2D g(n, 1.0, w.c);
    const auto u = sample(g, [&](const Point &x) { return w.u(x); });
    const auto Lu = apply_L(f, h, u).Lu;
    double e = 0.0;
    for (int j = 2; j < n - 2; ++j) {
        for (int i = 2; i < n - 2; ++i) {
            e = std::max(e, std::abs(Lu(i, j) - w.Lu(f, h, g.at(i, j))));
        }
    }
    return e;
}

} // namespace

TEST_CASE("grid basics and binary round trip")
{
    CHECK_THROWS_AS(Grid2D(15, 1.0), ConfigError);
    CHECK_THROWS_AS(Grid2D(32, 0.0), ConfigError);
    const Grid2D g(17, 2.0, {1.0, -1.0});
    CHECK(g.spacing() == 0.25);
    CHECK(g.at(0, 0)[0] == -1.0);
    CHECK(g.at(16, 16)[1] == 1.0);

    const auto u = sample(g, [](const Point &x) { return cplx(std::sin(x[0]), x[1] / 3.0); });
    std::stringstream ss;
    write_grid(ss, u);
    const std::string bytes = ss.str();
    const auto nl = bytes.find('\n');
    CHECK(bytes.substr(0, nl) == "17 2 1 -1");
    CHECK(bytes.size() == nl + 1 + 17 * 17 * 16);
    // first value: sin(-1) as little-endian binary64
    double first = 0.0;
    std::uint64_t b = 0;
    for (int k = 7; k >= 0; --k) {
        b = (b << 8) | static_cast<unsigned char>(bytes[nl + 1 + static_cast<std::size_t>(k)]);
    }
    std::memcpy(&first, &b, 8);
    CHECK(first == std::sin(-1.0));
    const auto v = read_grid(ss);
    CHECK(v.grid.n() == 17);
    CHECK(v.values == u.values);

    std::stringstream cut("17 2 1 -1\nabc");
    CHECK_THROWS_AS(read_grid(cut), ConfigError);
}

TEST_CASE("A = 0: plane wave packet")
{
    const auto zero = make_polynomial_potential(Poly2(), Poly2(), "zero");
    const WavePacket w{{0.0, 0.0}, 30.0, {3.0, -2.0}};
    const double h = 0.2;
    const Grid2D g(256, 1.0);
    const auto u = sample(g, [&](const Point &x) { return w.u(x); });
    const auto Lu = apply_L(*zero, h, u).Lu;
    // -h^2 Lap e^{ik.x} g = h^2 |k|^2 u + derivatives of the envelope
    double err = 0.0, scale = 0.0;
    for (int j = 2; j < 254; ++j) {
        for (int i = 2; i < 254; ++i) {
            err = std::max(err, std::abs(Lu(i, j) - w.Lu(*zero, h, g.at(i, j))));
            scale = std::max(scale, std::abs(Lu(i, j)));
        }
    }
    CHECK(err < 1e-5 * scale);
}

TEST_CASE("fourth-order consistency")
{
    const auto spec = make_field_spec(make_oscillating(), kOsc, 8);
    const WavePacket w{kOsc, 40.0, {1.0, 0.5}};
    std::vector<double> err;
    const std::vector<int> ns{96, 192, 384};
    for (int n : ns) {
        err.push_back(max_interior_error(*spec.field, 0.1, w, n));
    }
    // spacing halves (up to the n - 1 denominator)
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
        const double hs = (2.0 / (ns[k] - 1)) / (2.0 / (ns[k + 1] - 1));
        const double slope = std::log(err[k] / err[k + 1]) / std::log(hs);
        CHECK(slope > 3.7);
        CHECK(slope < 4.3);
    }
}

TEST_CASE("real potential: <Lu, u> is real")
{
    const auto f = make_polynomial_potential(Poly2::monomial(0, 1, -0.5) + Poly2::monomial(2, 1, 0.3),
                                             Poly2::monomial(1, 0, 0.5) + Poly2::monomial(0, 2, -0.2), "real");
    const WavePacket w{{0.05, -0.05}, 40.0, {2.0, 1.0}};
    const Grid2D g(384, 1.0);
    const auto u = sample(g, [&](const Point &x) { return w.u(x); });
    const auto Lu = apply_L(*f, 0.1, u).Lu;
    cplx s{};
    for (std::size_t k = 0; k < u.values.size(); ++k) {
        s += Lu.values[k] * std::conj(u.values[k]);
    }
    CHECK(std::abs(s.imag()) < 1e-8 * std::abs(s));
}

TEST_CASE("real gauge covariance")
{
    const auto spec = make_field_spec(make_oscillating(), kOsc, 8);
    Poly2 gp = Poly2::monomial(2, 0, 0.3) + Poly2::monomial(1, 1, -0.2) + Poly2::monomial(0, 3, 0.1);
    const auto shifted = make_gauge_shifted(spec.field, gp);
    const double h = 0.1;
    const WavePacket w{kOsc, 40.0, {0.5, 0.0}};
    const Grid2D g(384, 1.0, kOsc);
    const auto u = sample(g, [&](const Point &x) { return w.u(x); });
    const auto ug = sample(g, [&](const Point &x) { return std::exp(I * gp(x[0], x[1]).real() / h) * w.u(x); });
    const auto a = apply_L(*spec.field, h, u).Lu;
    const auto b = apply_L(*shifted, h, ug).Lu;
    double err = 0.0, scale = 0.0;
    for (int j = 2; j < 382; ++j) {
        for (int i = 2; i < 382; ++i) {
            const auto x = g.at(i, j);
            err = std::max(err, std::abs(b(i, j) - std::exp(I * gp(x[0], x[1]).real() / h) * a(i, j)));
            scale = std::max(scale, std::abs(a(i, j)));
        }
    }
    CHECK(err < 1e-4 * scale);
}

TEST_CASE("support check")
{
    const auto zero = make_polynomial_potential(Poly2(), Poly2(), "zero");
    const Grid2D g(64, 1.0);
    const auto wide = sample(g, [](const Point &x) { return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1]))); });
    CHECK_THROWS_AS(apply_L(*zero, 0.1, wide), DomainError);
    const auto r = apply_L(*zero, 0.1, wide, false);
    CHECK(r.support_violation);
    CHECK(r.Lu(0, 5) == cplx(0.0));
    CHECK(r.Lu(1, 5) == cplx(0.0));
    CHECK_THROWS_AS(apply_L(*zero, 0.0, wide), DomainError);
}

TEST_CASE("finite-difference residual against the series-exact evaluator")
{
    const auto spec = make_field_spec(make_oscillating(), kOsc, 24);
    PseudomodeConfig cfg;
    cfg.allow_indefinite = true;
    cfg.rule.N = 1;
    Pseudomode pm(spec, std::make_shared<const WKBSolution>(solve_wkb(spec.Btilde, 3)), cfg);
    const auto a = residual_series_exact(pm, 0.05, 1);
    const auto b = residual_finite_difference(pm, 0.05, 512, 1);
    CHECK(b.evaluator == "finite_difference");
    CHECK(std::abs(a.ratio - b.ratio) < 0.1 * a.ratio);
    CHECK(std::abs(a.u_norm - b.u_norm) < 1e-3 * a.u_norm);

    const auto ps = make_field_spec(make_polynomial_field(1.0, cplx(0, 1), 1.0), {0.0, 0.0}, 24);
    Pseudomode pp(ps, std::make_shared<const WKBSolution>(solve_wkb(ps.Btilde, 2)), cfg);
    const auto c = residual_series_exact(pp, 0.02, 1);
    const auto d = residual_finite_difference(pp, 0.02, 512, 1);
    CHECK(std::abs(c.ratio - d.ratio) < 0.1 * c.ratio);
}

TEST_CASE("magnetic inequalities")
{
    const auto spec = make_field_spec(make_oscillating(), kOsc, 8);
    const auto rep = verify_magnetic_inequalities(spec, 0.1, 50);
    CHECK(rep.trials == 50);
    CHECK(rep.ok());
    CHECK(rep.worst_slack_re >= -1e-6 * rep.rhs_re_at_worst);
    CHECK(rep.worst_slack_im >= -1e-6 * rep.rhs_im_at_worst);

    // A = 0: both left sides vanish
    const auto zero = make_polynomial_potential(Poly2(), Poly2(), "zero");
    const Grid2D g(128, 1.0);
    const auto u = sample(g, [](const Point &x) { return cplx(std::exp(-20 * (x[0] * x[0] + x[1] * x[1]))); });
    const auto s = magnetic_slack(*zero, 0.1, u);
    CHECK(s.lhs_re == 0.0);
    CHECK(s.lhs_im == 0.0);

    // constant real field b with the lowest Landau state: the first inequality is nearly tight
    const double bf = 2.0, h = 0.05;
    const auto landau = make_polynomial_potential(Poly2::monomial(0, 1, -0.5 * bf), Poly2::monomial(1, 0, 0.5 * bf),
                                                  "landau");
    const auto v = sample(Grid2D(256, 1.0),
                          [&](const Point &x) { return cplx(std::exp(-bf * (x[0] * x[0] + x[1] * x[1]) / (4 * h))); });
    const auto t = magnetic_slack(*landau, h, v);
    CHECK((t.rhs_re - t.lhs_re) / t.rhs_re <= 0.2);
    MESSAGE("Landau slack / rhs = " << (t.rhs_re - t.lhs_re) / t.rhs_re);
}
