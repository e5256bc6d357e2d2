#ifndef CMAG_FIELDMODEL_HPP
#define CMAG_FIELDMODEL_HPP

// Complex vector potentials A : R^2 -> C^2, their curls B = d1 A2 - d2 A1,
// and the pointwise data deciding where the WKB construction applies.

#include <array>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <cmag/cseries.hpp>

namespace cmag
{

using Point = std::array<double, 2>;
using CVec2 = std::array<cplx, 2>;
// jac[i][j] = d A_i / d x_j
using CJac2 = std::array<CVec2, 2>;

inline constexpr double kGammaTol = 1e-9;

// Polynomial in (x1, x2) with complex coefficients.
class Poly2
{
public:
    Poly2() = default;
    explicit Poly2(std::map<std::pair<int, int>, cplx> c);

    static Poly2 constant(cplx c);
    static Poly2 monomial(int i, int j, cplx c);

    const std::map<std::pair<int, int>, cplx> &coeffs() const noexcept
    {
        return c_;
    }
    int degree() const noexcept;

    cplx operator()(double x1, double x2) const;
    Poly2 d1() const;
    Poly2 d2() const;
    // Antiderivative in x1 vanishing on x1 = 0.
    Poly2 integrate_x1() const;
    Poly2 real_part() const;
    Poly2 imag_part() const;

    // p(x0 + ((z + w) / 2, (z - w) / (2i))) as a series in (z, w).
    BiSeries complexify(const Point &x0, int cap) const;

    Poly2 &operator+=(const Poly2 &o);
    Poly2 &operator*=(cplx s);

private:
    void prune();
    std::map<std::pair<int, int>, cplx> c_;
};

Poly2 operator+(Poly2 a, const Poly2 &b);
Poly2 operator-(Poly2 a, const Poly2 &b);
Poly2 operator*(const Poly2 &a, const Poly2 &b);
Poly2 operator*(cplx s, Poly2 a);

class MagneticField
{
public:
    virtual ~MagneticField() = default;

    virtual std::string name() const = 0;
    virtual CVec2 A(const Point &x) const = 0;
    // Defaults to fourth-order central differences of A.
    virtual CJac2 dA(const Point &x) const;
    // Defaults to d1 A2 - d2 A1 from dA.
    virtual cplx B(const Point &x) const;
    // Complexified Taylor series of B at x0. There is no generic fallback:
    // every field must supply exact coefficients.
    virtual BiSeries B_taylor(const Point &x0, int cap) const = 0;
    // (B, d_z B, d_zbar B) at x.
    virtual std::array<cplx, 3> B_jet(const Point &x) const;
    // Radius around x0 on which the Taylor data are trusted.
    virtual double analytic_radius(const Point &x0) const = 0;
};

using FieldPtr = std::shared_ptr<const MagneticField>;

// A1 = -sin(x1) x2 + i cos(x2), A2 = i cos(x2); B = sin x1 + i sin x2.
FieldPtr make_oscillating(double trusted_radius = 1.0);

// A = c (-x2, x1) / (1 + |x|)^alpha.
FieldPtr make_miller_simon(cplx c, double alpha);

// A = i c exp(|x|^2) (-x2, x1).
FieldPtr make_exponential(double c, double trusted_radius = 1.0);

// Field with polynomial components A1, A2.
FieldPtr make_polynomial_potential(Poly2 A1, Poly2 A2, std::string name = "user_polynomial");

// B = a + b x1 + c x2 + R with A1 = 0 and A2 the x1-antiderivative of B.
// R defaults to (x1^2 + x2^2)^3.
FieldPtr make_polynomial_field(cplx a, cplx b, cplx c, const Poly2 *R = nullptr);

// A + grad g; B is unchanged.
FieldPtr make_gauge_shifted(FieldPtr base, Poly2 g);

// A field together with complexified Taylor data of B at a base point.
struct FieldSpec {
    FieldPtr field;
    Point base{};
    BiSeries Btilde;
    double analytic_radius = 1.0;
};

// Builds Btilde and checks it against a numerical curl of A at x0
// (1e-6 relative); throws ConfigError on mismatch.
FieldSpec make_field_spec(FieldPtr field, const Point &x0, int cap, double analytic_radius = -1.0);

struct Wirtinger {
    cplx dz;
    cplx dzbar;
};

Wirtinger wirtinger_at(const FieldSpec &spec);

struct GammaReport {
    Point x{};
    double Q1 = 0.0, Q2 = 0.0, Q3 = 0.0;
    double det2 = 0.0;
    double imA_norm = 0.0;
    cplx B0{};
    cplx dzB{};
    cplx dzbarB{};
    bool in_gamma = false;
    std::vector<std::string> failed_conditions;
};

// Q-data from a B-jet and the Jacobian of A.
GammaReport gamma_report(const Point &x, const CVec2 &A, const CJac2 &jac, const std::array<cplx, 3> &bjet,
                         double tol = kGammaTol);
GammaReport compute_Q(const FieldSpec &spec, double tol = kGammaTol);
GammaReport compute_Q(const MagneticField &field, const Point &x, double tol = kGammaTol);

struct Region {
    double x1min, x1max, x2min, x2max;
};

struct GammaRaster {
    Region region{};
    int n1 = 0, n2 = 0;
    // row-major over x2 (outer) then x1 (inner)
    std::vector<GammaReport> reports;
    Point point(int i1, int i2) const;
    const GammaReport &at(int i1, int i2) const
    {
        return reports[static_cast<std::size_t>(i2) * static_cast<std::size_t>(n1) + static_cast<std::size_t>(i1)];
    }
    std::size_t count_in_gamma() const;
};

GammaRaster gamma_scan(const MagneticField &field, const Region &region, int n1, int n2, int workers = 1);

enum class Condition { C1, C2 };

struct ConditionCheckConfig {
    double epsilon = 0.5;
    // Explicit constant; when absent the checker looks for a bounded C over
    // growing discs.
    bool has_C = false;
    double C_const = 0.0;
    Region region{-4.0, 4.0, -4.0, 4.0};
    int density = 101;
    double h = 1.0;
};

struct ConditionVerdict {
    Condition which = Condition::C1;
    int sign = 1;
    bool pass = false;
    double min_slack = 0.0;
    Point worst{};
    double C_used = 0.0;
    // Auto-C mode: required C on nested discs.
    std::vector<double> radii;
    std::vector<double> required_C;
    std::string note;
};

// Sampled, non-certified check of |Im A|^2 <= sign * eps * h * (Re|Im) B + C.
ConditionVerdict check_C(const MagneticField &field, const ConditionCheckConfig &cfg, Condition which, int sign);

// Tries both signs; the returned verdict is the passing one if any.
ConditionVerdict check_C_any_sign(const MagneticField &field, const ConditionCheckConfig &cfg, Condition which);

struct TrendVerdict {
    std::string hypothesis;
    bool diverges = false;
    std::vector<double> radii;
    std::vector<double> min_values;
    double growth_exponent = 0.0; // slope of log(min) against log(R)
    int sign = 0;                 // H1 only: +1, -1, or 0 when Re B changes sign
};

struct HypothesisReport {
    TrendVerdict H1, H2, H3;
};

// Heuristic trend check on circles (64 angles each).
HypothesisReport check_H(const MagneticField &field, const std::vector<double> &radii);

struct WeylSymbol {
    cplx p;
    double bracket;
};

// p(x, xi) and the Poisson bracket {Re p, Im p} = d_xi Re p . d_x Im p - d_x Re p . d_xi Im p.
WeylSymbol weyl_bracket(const MagneticField &field, const Point &x, const Point &xi, double step = 1e-5);

} // namespace cmag

#endif
