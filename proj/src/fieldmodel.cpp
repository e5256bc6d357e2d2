#include <cmag/fieldmodel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include <cmag/errors.hpp>

namespace cmag
{

namespace
{

constexpr cplx I{0.0, 1.0};

// x0 + ((z + w) / 2, (z - w) / (2i)) as a pair of series.
std::array<BiSeries, 2> complex_coordinates(const Point &x0, int cap)
{
    const auto z = BiSeries::var_z(cap);
    const auto w = BiSeries::var_w(cap);
    return {(z + w) * 0.5 + x0[0], (z - w) * (1.0 / (2.0 * I)) + x0[1]};
}

BiSeries series_sin(const BiSeries &s)
{
    const auto e = exp_series(s * I);
    const auto em = exp_series(s * (-I));
    return (e - em) * (1.0 / (2.0 * I));
}

std::array<cplx, 3> jet_from_taylor(const BiSeries &b)
{
    return {b.coeff(0, 0), b.coeff(1, 0), b.coeff(0, 1)};
}

double sq(double v)
{
    return v * v;
}

} // namespace

// ---------------------------------------------------------------------------
// Poly2

Poly2::Poly2(std::map<std::pair<int, int>, cplx> c) : c_(std::move(c))
{
    prune();
}

Poly2 Poly2::constant(cplx c)
{
    return monomial(0, 0, c);
}

Poly2 Poly2::monomial(int i, int j, cplx c)
{
    std::map<std::pair<int, int>, cplx> m;
    m[{i, j}] = c;
    return Poly2(std::move(m));
}

void Poly2::prune()
{
    for (auto it = c_.begin(); it != c_.end();) {
        if (it->second == cplx{}) {
            it = c_.erase(it);
        } else {
            ++it;
        }
    }
}

int Poly2::degree() const noexcept
{
    int d = 0;
    for (const auto &[k, v] : c_) {
        d = std::max(d, k.first + k.second);
    }
    return d;
}

cplx Poly2::operator()(double x1, double x2) const
{
    cplx s{};
    for (const auto &[k, v] : c_) {
        s += v * std::pow(x1, k.first) * std::pow(x2, k.second);
    }
    return s;
}

Poly2 Poly2::d1() const
{
    std::map<std::pair<int, int>, cplx> out;
    for (const auto &[k, v] : c_) {
        if (k.first > 0) {
            out[{k.first - 1, k.second}] += v * static_cast<double>(k.first);
        }
    }
    return Poly2(std::move(out));
}

Poly2 Poly2::d2() const
{
    std::map<std::pair<int, int>, cplx> out;
    for (const auto &[k, v] : c_) {
        if (k.second > 0) {
            out[{k.first, k.second - 1}] += v * static_cast<double>(k.second);
        }
    }
    return Poly2(std::move(out));
}

Poly2 Poly2::integrate_x1() const
{
    std::map<std::pair<int, int>, cplx> out;
    for (const auto &[k, v] : c_) {
        out[{k.first + 1, k.second}] += v / static_cast<double>(k.first + 1);
    }
    return Poly2(std::move(out));
}

Poly2 Poly2::real_part() const
{
    std::map<std::pair<int, int>, cplx> out;
    for (const auto &[k, v] : c_) {
        out[k] = v.real();
    }
    return Poly2(std::move(out));
}

Poly2 Poly2::imag_part() const
{
    std::map<std::pair<int, int>, cplx> out;
    for (const auto &[k, v] : c_) {
        out[k] = v.imag();
    }
    return Poly2(std::move(out));
}

BiSeries Poly2::complexify(const Point &x0, int cap) const
{
    const auto xs = complex_coordinates(x0, cap);
    int d1max = 0, d2max = 0;
    for (const auto &[k, v] : c_) {
        d1max = std::max(d1max, k.first);
        d2max = std::max(d2max, k.second);
    }
    std::vector<BiSeries> p1{BiSeries::constant(1.0, cap)}, p2{BiSeries::constant(1.0, cap)};
    for (int i = 1; i <= d1max; ++i) {
        p1.push_back(p1.back() * xs[0]);
    }
    for (int j = 1; j <= d2max; ++j) {
        p2.push_back(p2.back() * xs[1]);
    }
    BiSeries out(cap);
    for (const auto &[k, v] : c_) {
        out += (p1[static_cast<std::size_t>(k.first)] * p2[static_cast<std::size_t>(k.second)]) * v;
    }
    return out;
}

Poly2 &Poly2::operator+=(const Poly2 &o)
{
    for (const auto &[k, v] : o.c_) {
        c_[k] += v;
    }
    prune();
    return *this;
}

Poly2 &Poly2::operator*=(cplx s)
{
    for (auto &[k, v] : c_) {
        v *= s;
    }
    prune();
    return *this;
}

Poly2 operator+(Poly2 a, const Poly2 &b)
{
    return a += b;
}

Poly2 operator-(Poly2 a, const Poly2 &b)
{
    Poly2 nb = b;
    nb *= -1.0;
    return a += nb;
}

Poly2 operator*(const Poly2 &a, const Poly2 &b)
{
    std::map<std::pair<int, int>, cplx> out;
    for (const auto &[ka, va] : a.coeffs()) {
        for (const auto &[kb, vb] : b.coeffs()) {
            out[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
        }
    }
    return Poly2(std::move(out));
}

Poly2 operator*(cplx s, Poly2 a)
{
    return a *= s;
}

// ---------------------------------------------------------------------------
// MagneticField defaults

CJac2 MagneticField::dA(const Point &x) const
{
    constexpr double s = 1e-3;
    CJac2 jac{};
    for (int j = 0; j < 2; ++j) {
        auto at = [&](double t) {
            Point p = x;
            p[static_cast<std::size_t>(j)] += t;
            return A(p);
        };
        const auto m2 = at(-2 * s), m1 = at(-s), p1 = at(s), p2 = at(2 * s);
        for (int i = 0; i < 2; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            jac[ii][static_cast<std::size_t>(j)] = (-p2[ii] + 8.0 * p1[ii] - 8.0 * m1[ii] + m2[ii]) / (12.0 * s);
        }
    }
    return jac;
}

cplx MagneticField::B(const Point &x) const
{
    const auto j = dA(x);
    return j[1][0] - j[0][1];
}

std::array<cplx, 3> MagneticField::B_jet(const Point &x) const
{
    return jet_from_taylor(B_taylor(x, 1));
}

// ---------------------------------------------------------------------------
// Builtin fields

namespace
{

class OscillatingField final : public MagneticField
{
public:
    explicit OscillatingField(double radius) : radius_(radius) {}

    std::string name() const override
    {
        return "oscillating";
    }
    CVec2 A(const Point &x) const override
    {
        return {-std::sin(x[0]) * x[1] + I * std::cos(x[1]), I * std::cos(x[1])};
    }
    CJac2 dA(const Point &x) const override
    {
        CJac2 j{};
        j[0][0] = -std::cos(x[0]) * x[1];
        j[0][1] = -std::sin(x[0]) - I * std::sin(x[1]);
        j[1][0] = 0.0;
        j[1][1] = -I * std::sin(x[1]);
        return j;
    }
    cplx B(const Point &x) const override
    {
        return {std::sin(x[0]), std::sin(x[1])};
    }
    std::array<cplx, 3> B_jet(const Point &x) const override
    {
        const double c1 = std::cos(x[0]), c2 = std::cos(x[1]);
        return {B(x), 0.5 * (c1 + c2), 0.5 * (c1 - c2)};
    }
    BiSeries B_taylor(const Point &x0, int cap) const override
    {
        const auto xs = complex_coordinates(x0, cap);
        return series_sin(xs[0]) + series_sin(xs[1]) * I;
    }
    double analytic_radius(const Point &) const override
    {
        return radius_;
    }

private:
    double radius_;
};

class MillerSimonField final : public MagneticField
{
public:
    MillerSimonField(cplx c, double alpha) : c_(c), alpha_(alpha)
    {
        if (!(alpha > 0.0)) {
            throw ConfigError("miller_simon: alpha must be positive");
        }
    }

    std::string name() const override
    {
        return "miller_simon";
    }
    CVec2 A(const Point &x) const override
    {
        const double g = std::pow(1.0 + std::hypot(x[0], x[1]), -alpha_);
        return {-c_ * x[1] * g, c_ * x[0] * g};
    }
    CJac2 dA(const Point &x) const override
    {
        const double r = std::hypot(x[0], x[1]);
        const double g = std::pow(1.0 + r, -alpha_);
        // g'(r) x_i x_j / r, which tends to 0 at the origin
        const double gp = -alpha_ * std::pow(1.0 + r, -alpha_ - 1.0);
        auto q = [&](double a, double b) { return r > 0.0 ? gp * a * b / r : 0.0; };
        CJac2 j{};
        j[0][0] = -c_ * q(x[1], x[0]);
        j[0][1] = -c_ * (g + q(x[1], x[1]));
        j[1][0] = c_ * (g + q(x[0], x[0]));
        j[1][1] = c_ * q(x[0], x[1]);
        return j;
    }
    cplx B(const Point &x) const override
    {
        const double r = std::hypot(x[0], x[1]);
        return c_ * (2.0 / std::pow(1.0 + r, alpha_) - alpha_ * r / std::pow(1.0 + r, alpha_ + 1.0));
    }
    std::array<cplx, 3> B_jet(const Point &x) const override
    {
        const double r = std::hypot(x[0], x[1]);
        if (r == 0.0) {
            // B has a conical point at the origin
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return {B(x), cplx(nan, nan), cplx(nan, nan)};
        }
        const double gp = -alpha_ * std::pow(1.0 + r, -alpha_ - 1.0);
        const double gpp = alpha_ * (alpha_ + 1.0) * std::pow(1.0 + r, -alpha_ - 2.0);
        const cplx dB = c_ * (3.0 * gp + r * gpp) / r;
        return {B(x), 0.5 * dB * cplx(x[0], -x[1]), 0.5 * dB * cplx(x[0], x[1])};
    }
    BiSeries B_taylor(const Point &x0, int cap) const override
    {
        if (std::hypot(x0[0], x0[1]) == 0.0) {
            throw DomainError("miller_simon: B is not real-analytic at the origin");
        }
        const auto xs = complex_coordinates(x0, cap);
        const auto r = pow_series(xs[0] * xs[0] + xs[1] * xs[1], 0.5);
        const auto u = r + 1.0;
        return (pow_series(u, -alpha_) * 2.0 - r * pow_series(u, -alpha_ - 1.0) * alpha_) * c_;
    }
    double analytic_radius(const Point &x0) const override
    {
        // |x| is analytic off the complex cone x1^2 + x2^2 = 0, whose distance
        // from a real point x0 is |x0| / sqrt(2).
        return 0.5 * std::hypot(x0[0], x0[1]);
    }

private:
    cplx c_;
    double alpha_;
};

class ExponentialField final : public MagneticField
{
public:
    ExponentialField(double c, double radius) : c_(c), radius_(radius) {}

    std::string name() const override
    {
        return "exponential";
    }
    CVec2 A(const Point &x) const override
    {
        const double e = std::exp(sq(x[0]) + sq(x[1]));
        return {-I * c_ * e * x[1], I * c_ * e * x[0]};
    }
    CJac2 dA(const Point &x) const override
    {
        const double e = std::exp(sq(x[0]) + sq(x[1]));
        const cplx k = I * c_ * e;
        CJac2 j{};
        j[0][0] = -k * 2.0 * x[0] * x[1];
        j[0][1] = -k * (1.0 + 2.0 * sq(x[1]));
        j[1][0] = k * (1.0 + 2.0 * sq(x[0]));
        j[1][1] = k * 2.0 * x[0] * x[1];
        return j;
    }
    cplx B(const Point &x) const override
    {
        const double r2 = sq(x[0]) + sq(x[1]);
        return 2.0 * I * c_ * (1.0 + r2) * std::exp(r2);
    }
    BiSeries B_taylor(const Point &x0, int cap) const override
    {
        const auto xs = complex_coordinates(x0, cap);
        const auto r2 = xs[0] * xs[0] + xs[1] * xs[1];
        return (r2 + 1.0) * exp_series(r2) * (2.0 * I * c_);
    }
    double analytic_radius(const Point &) const override
    {
        return radius_;
    }

private:
    double c_;
    double radius_;
};

class PolynomialPotential final : public MagneticField
{
public:
    PolynomialPotential(Poly2 a1, Poly2 a2, std::string name)
        : a1_(std::move(a1)), a2_(std::move(a2)), name_(std::move(name))
    {
        d11_ = a1_.d1();
        d12_ = a1_.d2();
        d21_ = a2_.d1();
        d22_ = a2_.d2();
        b_ = d21_ - d12_;
    }

    std::string name() const override
    {
        return name_;
    }
    CVec2 A(const Point &x) const override
    {
        return {a1_(x[0], x[1]), a2_(x[0], x[1])};
    }
    CJac2 dA(const Point &x) const override
    {
        CJac2 j{};
        j[0][0] = d11_(x[0], x[1]);
        j[0][1] = d12_(x[0], x[1]);
        j[1][0] = d21_(x[0], x[1]);
        j[1][1] = d22_(x[0], x[1]);
        return j;
    }
    cplx B(const Point &x) const override
    {
        return b_(x[0], x[1]);
    }
    BiSeries B_taylor(const Point &x0, int cap) const override
    {
        return b_.complexify(x0, cap);
    }
    double analytic_radius(const Point &) const override
    {
        return std::numeric_limits<double>::infinity();
    }

private:
    Poly2 a1_, a2_;
    Poly2 d11_, d12_, d21_, d22_, b_;
    std::string name_;
};

class GaugeShifted final : public MagneticField
{
public:
    GaugeShifted(FieldPtr base, Poly2 g) : base_(std::move(base)), g1_(g.d1()), g2_(g.d2())
    {
        h11_ = g1_.d1();
        h12_ = g1_.d2();
        h22_ = g2_.d2();
    }

    std::string name() const override
    {
        return base_->name() + "+grad(g)";
    }
    CVec2 A(const Point &x) const override
    {
        auto a = base_->A(x);
        a[0] += g1_(x[0], x[1]);
        a[1] += g2_(x[0], x[1]);
        return a;
    }
    CJac2 dA(const Point &x) const override
    {
        auto j = base_->dA(x);
        const cplx h12 = h12_(x[0], x[1]);
        j[0][0] += h11_(x[0], x[1]);
        j[0][1] += h12;
        j[1][0] += h12;
        j[1][1] += h22_(x[0], x[1]);
        return j;
    }
    cplx B(const Point &x) const override
    {
        return base_->B(x);
    }
    std::array<cplx, 3> B_jet(const Point &x) const override
    {
        return base_->B_jet(x);
    }
    BiSeries B_taylor(const Point &x0, int cap) const override
    {
        return base_->B_taylor(x0, cap);
    }
    double analytic_radius(const Point &x0) const override
    {
        return base_->analytic_radius(x0);
    }

private:
    FieldPtr base_;
    Poly2 g1_, g2_;
    Poly2 h11_, h12_, h22_;
};

} // namespace

FieldPtr make_oscillating(double trusted_radius)
{
    return std::make_shared<OscillatingField>(trusted_radius);
}

FieldPtr make_miller_simon(cplx c, double alpha)
{
    return std::make_shared<MillerSimonField>(c, alpha);
}

FieldPtr make_exponential(double c, double trusted_radius)
{
    return std::make_shared<ExponentialField>(c, trusted_radius);
}

FieldPtr make_polynomial_potential(Poly2 A1, Poly2 A2, std::string name)
{
    return std::make_shared<PolynomialPotential>(std::move(A1), std::move(A2), std::move(name));
}

FieldPtr make_polynomial_field(cplx a, cplx b, cplx c, const Poly2 *R)
{
    Poly2 rem;
    if (R != nullptr) {
        rem = *R;
    } else {
        const Poly2 r2 = Poly2::monomial(2, 0, 1.0) + Poly2::monomial(0, 2, 1.0);
        rem = r2 * r2 * r2;
    }
    const Poly2 B = Poly2::constant(a) + Poly2::monomial(1, 0, b) + Poly2::monomial(0, 1, c) + rem;
    return make_polynomial_potential(Poly2{}, B.integrate_x1(), "polynomial");
}

FieldPtr make_gauge_shifted(FieldPtr base, Poly2 g)
{
    return std::make_shared<GaugeShifted>(std::move(base), std::move(g));
}

// ---------------------------------------------------------------------------
// FieldSpec and Q-data

FieldSpec make_field_spec(FieldPtr field, const Point &x0, int cap, double analytic_radius)
{
    if (!field) {
        throw ConfigError("make_field_spec: no field");
    }
    FieldSpec spec;
    spec.base = x0;
    spec.Btilde = field->B_taylor(x0, cap);
    spec.analytic_radius = analytic_radius > 0.0 ? analytic_radius : field->analytic_radius(x0);
    if (!(spec.analytic_radius > 0.0)) {
        throw ConfigError("make_field_spec: analytic radius must be positive");
    }

    constexpr double s = 1e-3;
    auto Ai = [&](int comp, int dir, double t) {
        Point p = x0;
        p[static_cast<std::size_t>(dir)] += t;
        return field->A(p)[static_cast<std::size_t>(comp)];
    };
    auto d = [&](int comp, int dir) {
        return (-Ai(comp, dir, 2 * s) + 8.0 * Ai(comp, dir, s) - 8.0 * Ai(comp, dir, -s) + Ai(comp, dir, -2 * s)) /
               (12.0 * s);
    };
    const cplx curl = d(1, 0) - d(0, 1);
    const cplx b0 = spec.Btilde.coeff(0, 0);
    if (std::abs(curl - b0) > 1e-6 * std::max(1.0, std::abs(b0))) {
        std::ostringstream os;
        os << "field '" << field->name() << "': curl A = " << curl << " does not match the Taylor data B(x0) = " << b0;
        throw ConfigError(os.str());
    }
    spec.field = std::move(field);
    return spec;
}

Wirtinger wirtinger_at(const FieldSpec &spec)
{
    if (spec.Btilde.cap() < 1) {
        throw DomainError("wirtinger_at: Taylor data needs degree >= 1");
    }
    return {spec.Btilde.coeff(1, 0), spec.Btilde.coeff(0, 1)};
}

GammaReport gamma_report(const Point &x, const CVec2 &A, const CJac2 &jac, const std::array<cplx, 3> &bjet,
                         double tol)
{
    GammaReport r;
    r.x = x;
    r.B0 = bjet[0];
    r.dzB = bjet[1];
    r.dzbarB = bjet[2];
    r.imA_norm = std::hypot(A[0].imag(), A[1].imag());

    if (!(r.imA_norm <= tol)) {
        r.failed_conditions.emplace_back("Im A(x) != 0");
    }
    if (!(std::abs(r.B0) > tol)) {
        r.failed_conditions.emplace_back("B(x) = 0");
    }
    if (!(std::abs(r.dzbarB) > tol)) {
        r.failed_conditions.emplace_back("d_zbar B(x) = 0");
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.Q1 = r.Q2 = r.Q3 = r.det2 = nan;
        r.in_gamma = false;
        return r;
    }
    const cplx rho = r.dzB / r.dzbarB;
    r.Q1 = 0.25 * (r.B0 * (1.0 + rho)).real() + 0.5 * jac[0][0].imag();
    r.Q2 = 0.25 * (r.B0 * rho).imag() + 0.25 * (jac[1][0].imag() + jac[0][1].imag());
    r.Q3 = 0.25 * (r.B0 * (1.0 - rho)).real() + 0.5 * jac[1][1].imag();
    r.det2 = r.Q1 * r.Q3 - r.Q2 * r.Q2;
    if (!(r.Q1 > tol)) {
        r.failed_conditions.emplace_back("Q1 <= 0");
    }
    if (!(r.det2 > tol)) {
        r.failed_conditions.emplace_back("Q1 Q3 - Q2^2 <= 0");
    }
    r.in_gamma = r.failed_conditions.empty();
    return r;
}

GammaReport compute_Q(const FieldSpec &spec, double tol)
{
    const auto &f = *spec.field;
    const std::array<cplx, 3> jet{spec.Btilde.coeff(0, 0), spec.Btilde.coeff(1, 0), spec.Btilde.coeff(0, 1)};
    return gamma_report(spec.base, f.A(spec.base), f.dA(spec.base), jet, tol);
}

GammaReport compute_Q(const MagneticField &field, const Point &x, double tol)
{
    return gamma_report(x, field.A(x), field.dA(x), field.B_jet(x), tol);
}

Point GammaRaster::point(int i1, int i2) const
{
    const double t1 = n1 > 1 ? static_cast<double>(i1) / (n1 - 1) : 0.0;
    const double t2 = n2 > 1 ? static_cast<double>(i2) / (n2 - 1) : 0.0;
    return {region.x1min + t1 * (region.x1max - region.x1min), region.x2min + t2 * (region.x2max - region.x2min)};
}

std::size_t GammaRaster::count_in_gamma() const
{
    return static_cast<std::size_t>(
        std::count_if(reports.begin(), reports.end(), [](const GammaReport &r) { return r.in_gamma; }));
}

GammaRaster gamma_scan(const MagneticField &field, const Region &region, int n1, int n2, int workers)
{
    if (n1 < 1 || n2 < 1) {
        throw DomainError("gamma_scan: grid must have at least one point per axis");
    }
    GammaRaster raster;
    raster.region = region;
    raster.n1 = n1;
    raster.n2 = n2;
    raster.reports.resize(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));

    auto rows = [&](int begin, int end) {
        for (int i2 = begin; i2 < end; ++i2) {
            for (int i1 = 0; i1 < n1; ++i1) {
                raster.reports[static_cast<std::size_t>(i2) * static_cast<std::size_t>(n1) +
                               static_cast<std::size_t>(i1)] = compute_Q(field, raster.point(i1, i2));
            }
        }
    };
    workers = std::clamp(workers, 1, n2);
    if (workers == 1) {
        rows(0, n2);
        return raster;
    }
    std::vector<std::thread> pool;
    for (int k = 0; k < workers; ++k) {
        pool.emplace_back(rows, n2 * k / workers, n2 * (k + 1) / workers);
    }
    for (auto &t : pool) {
        t.join();
    }
    return raster;
}

// ---------------------------------------------------------------------------
// Sampled conditions

namespace
{

struct CSample {
    Point x;
    double excess; // |Im A|^2 - sign * eps * h * (Re|Im) B
};

std::vector<CSample> sample_condition(const MagneticField &field, const ConditionCheckConfig &cfg, Condition which,
                                      int sign)
{
    std::vector<CSample> out;
    const int n = std::max(cfg.density, 2);
    out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i2 = 0; i2 < n; ++i2) {
        for (int i1 = 0; i1 < n; ++i1) {
            const Point x{cfg.region.x1min + (cfg.region.x1max - cfg.region.x1min) * i1 / (n - 1),
                          cfg.region.x2min + (cfg.region.x2max - cfg.region.x2min) * i2 / (n - 1)};
            const auto a = field.A(x);
            const double lhs = sq(a[0].imag()) + sq(a[1].imag());
            const cplx b = field.B(x);
            const double part = which == Condition::C1 ? b.real() : b.imag();
            double excess = lhs - sign * cfg.epsilon * cfg.h * part;
            if (std::isnan(excess)) {
                excess = std::numeric_limits<double>::infinity();
            }
            out.push_back({x, excess});
        }
    }
    return out;
}

} // namespace

ConditionVerdict check_C(const MagneticField &field, const ConditionCheckConfig &cfg, Condition which, int sign)
{
    const double hi = which == Condition::C1 ? 1.0 : 0.5;
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < hi)) {
        std::ostringstream os;
        os << "check_C: epsilon must lie in (0, " << hi << ")";
        throw ConfigError(os.str());
    }
    if (sign != 1 && sign != -1) {
        throw ConfigError("check_C: sign must be +1 or -1");
    }
    ConditionVerdict v;
    v.which = which;
    v.sign = sign;
    const auto samples = sample_condition(field, cfg, which, sign);

    if (cfg.has_C) {
        v.C_used = cfg.C_const;
        v.min_slack = std::numeric_limits<double>::infinity();
        for (const auto &s : samples) {
            const double slack = cfg.C_const - s.excess;
            if (slack < v.min_slack) {
                v.min_slack = slack;
                v.worst = s.x;
            }
        }
        v.pass = v.min_slack >= 0.0;
        v.note = "explicit C";
        return v;
    }

    // Required C on nested discs of halving radius around the region center.
    const Point c{0.5 * (cfg.region.x1min + cfg.region.x1max), 0.5 * (cfg.region.x2min + cfg.region.x2max)};
    const double rmax =
        0.5 * std::min(cfg.region.x1max - cfg.region.x1min, cfg.region.x2max - cfg.region.x2min);
    constexpr int levels = 6;
    for (int k = levels - 1; k >= 0; --k) {
        const double R = rmax / std::ldexp(1.0, k);
        double req = -std::numeric_limits<double>::infinity();
        Point where = c;
        for (const auto &s : samples) {
            if (std::hypot(s.x[0] - c[0], s.x[1] - c[1]) <= R && s.excess > req) {
                req = s.excess;
                where = s.x;
            }
        }
        v.radii.push_back(R);
        v.required_C.push_back(req);
        v.worst = where;
    }
    const std::size_t n = v.required_C.size();
    const double last = v.required_C[n - 1] - v.required_C[n - 2];
    const double prev = v.required_C[n - 2] - v.required_C[n - 3];
    const double scale = 1.0 + std::abs(v.required_C[n - 1]);
    const bool finite = std::isfinite(v.required_C[n - 1]);
    v.pass = finite && (last <= 1e-9 * scale || (prev > 0.0 && last <= 0.75 * prev));
    v.C_used = v.required_C[n - 1];
    v.min_slack = finite ? 0.0 : -std::numeric_limits<double>::infinity();
    v.note = v.pass ? "required C levels off over the sampled discs" : "required C keeps growing with the disc radius";
    return v;
}

ConditionVerdict check_C_any_sign(const MagneticField &field, const ConditionCheckConfig &cfg, Condition which)
{
    auto plus = check_C(field, cfg, which, 1);
    if (plus.pass) {
        return plus;
    }
    auto minus = check_C(field, cfg, which, -1);
    return minus.pass ? minus : plus;
}

HypothesisReport check_H(const MagneticField &field, const std::vector<double> &radii)
{
    if (radii.size() < 3) {
        throw ConfigError("check_H: need at least three radii");
    }
    for (std::size_t k = 1; k < radii.size(); ++k) {
        if (!(radii[k] > radii[k - 1])) {
            throw ConfigError("check_H: radii must be increasing");
        }
    }
    constexpr int angles = 64;
    HypothesisReport rep;
    rep.H1.hypothesis = "H1";
    rep.H2.hypothesis = "H2";
    rep.H3.hypothesis = "H3";
    int pos = 0, neg = 0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double R = radii[k];
        double m1 = std::numeric_limits<double>::infinity(), m2 = m1, m3 = m1;
        for (int a = 0; a < angles; ++a) {
            const double t = 2.0 * M_PI * a / angles;
            const Point x{R * std::cos(t), R * std::sin(t)};
            const cplx b = field.B(x);
            const auto A = field.A(x);
            m1 = std::min(m1, std::abs(b.real()));
            m2 = std::min(m2, std::abs(b.imag()));
            m3 = std::min(m3, std::hypot(A[0].imag(), A[1].imag()));
            if (k + 1 == radii.size()) {
                pos += b.real() > 0.0;
                neg += b.real() < 0.0;
            }
        }
        rep.H1.min_values.push_back(m1);
        rep.H2.min_values.push_back(m2);
        rep.H3.min_values.push_back(m3);
    }
    rep.H1.sign = pos == angles ? 1 : (neg == angles ? -1 : 0);
    for (TrendVerdict *t : {&rep.H1, &rep.H2, &rep.H3}) {
        t->radii = radii;
        const auto &m = t->min_values;
        const std::size_t n = m.size();
        // values at the Gamma tolerance count as zero, not as slow growth
        t->diverges = m[n - 3] > kGammaTol && m[n - 2] >= 1.05 * m[n - 3] && m[n - 1] >= 1.05 * m[n - 2];
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (m[k] > 0.0 && std::isfinite(m[k])) {
                const double lx = std::log(radii[k]), ly = std::log(m[k]);
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
                ++cnt;
            }
        }
        const double den = cnt * sxx - sx * sx;
        t->growth_exponent = (cnt >= 2 && den != 0.0) ? (cnt * sxy - sx * sy) / den : 0.0;
    }
    if (rep.H1.sign == 0) {
        rep.H1.diverges = false;
    }
    return rep;
}

WeylSymbol weyl_bracket(const MagneticField &field, const Point &x, const Point &xi, double step)
{
    auto symbol = [&](const Point &y) {
        const auto a = field.A(y);
        const double e1 = xi[0] - a[0].real(), e2 = xi[1] - a[1].real();
        const double i1 = a[0].imag(), i2 = a[1].imag();
        return cplx(e1 * e1 + e2 * e2 - i1 * i1 - i2 * i2, -2.0 * (e1 * i1 + e2 * i2));
    };
    const auto a = field.A(x);
    const double eta[2] = {xi[0] - a[0].real(), xi[1] - a[1].real()};
    const double ima[2] = {a[0].imag(), a[1].imag()};

    double bracket = 0.0;
    for (int j = 0; j < 2; ++j) {
        Point p = x, m = x;
        p[static_cast<std::size_t>(j)] += step;
        m[static_cast<std::size_t>(j)] -= step;
        const cplx dp = (symbol(p) - symbol(m)) / (2.0 * step);
        // d_xi Re p = 2 eta, d_xi Im p = -2 Im A
        bracket += 2.0 * eta[j] * dp.imag() + 2.0 * ima[j] * dp.real();
    }
    return {symbol(x), bracket};
}

} // namespace cmag
