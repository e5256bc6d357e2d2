#ifndef CMAG_CSERIES_HPP
#define CMAG_CSERIES_HPP

// Truncated power series in one and two complex variables.
//
// A BiSeries stores every coefficient c_{a,b} of z^a w^b with a + b <= cap in
// a dense triangular array (degree-major). The cap is part of the value:
// differentiation lowers it, and binary operations require equal caps, so the
// number of trustworthy orders is tracked by the type instead of by comments.
// Lowering the cap is always explicit (truncated()).
//
// Complexification: a real-analytic a(x1, x2) near x0 is represented by
//   a~(z, w) = a(x0 + ((z + w) / 2, (z - w) / (2i)))
// so that a~(z, conj z) = a(x) and the Wirtinger derivatives of a become the
// plain partials d/dz, d/dw of a~.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cmag
{

using cplx = std::complex<double>;

enum class Var { z, w };

class UniSeries
{
public:
    UniSeries() : UniSeries(0) {}
    explicit UniSeries(int cap);
    explicit UniSeries(std::vector<cplx> coeffs);

    static UniSeries constant(cplx c, int cap);
    // The identity series z.
    static UniSeries identity(int cap);

    int cap() const noexcept
    {
        return static_cast<int>(c_.size()) - 1;
    }
    // Coefficient of z^k, zero beyond the cap.
    cplx operator[](int k) const noexcept
    {
        return (k >= 0 && k <= cap()) ? c_[static_cast<std::size_t>(k)] : cplx{};
    }
    cplx &at(int k);
    std::span<const cplx> coeffs() const noexcept
    {
        return c_;
    }

    // Lower the cap (dropping coefficients) or raise it (zero fill).
    UniSeries truncated(int cap) const;
    double max_abs() const noexcept;

    UniSeries &operator+=(const UniSeries &o);
    UniSeries &operator-=(const UniSeries &o);
    UniSeries &operator*=(cplx s);

private:
    std::vector<cplx> c_;
};

UniSeries operator+(UniSeries a, const UniSeries &b);
UniSeries operator-(UniSeries a, const UniSeries &b);
UniSeries operator-(UniSeries a);
UniSeries operator*(const UniSeries &a, const UniSeries &b);
UniSeries operator*(UniSeries a, cplx s);
UniSeries operator*(cplx s, UniSeries a);

// d/dz; the cap drops by one.
UniSeries differentiate(const UniSeries &a);
// Antiderivative vanishing at 0. out_cap < 0 keeps the input cap.
UniSeries antiderivative(const UniSeries &a, int out_cap = -1);
UniSeries exp_series(const UniSeries &a);
UniSeries reciprocal(const UniSeries &a, const std::string &name = "series");
cplx evaluate(const UniSeries &a, cplx z);

class BiSeries
{
public:
    using Center = std::array<cplx, 2>;

    struct Term {
        int alpha;
        int beta;
        cplx value;
    };

    BiSeries() : BiSeries(0) {}
    explicit BiSeries(int cap, Center center = {});

    static BiSeries constant(cplx c, int cap, Center center = {});
    static BiSeries monomial(int alpha, int beta, cplx c, int cap, Center center = {});
    static BiSeries var_z(int cap, Center center = {});
    static BiSeries var_w(int cap, Center center = {});
    // The series (z, w) -> u(z).
    static BiSeries lift_z(const UniSeries &u, int cap, Center center = {});

    static std::size_t index(int alpha, int beta) noexcept
    {
        const auto d = static_cast<std::size_t>(alpha + beta);
        return d * (d + 1) / 2 + static_cast<std::size_t>(beta);
    }
    static std::size_t size_for_cap(int cap) noexcept
    {
        const auto d = static_cast<std::size_t>(cap + 1);
        return d * (d + 1) / 2;
    }

    int cap() const noexcept
    {
        return cap_;
    }
    const Center &center() const noexcept
    {
        return center_;
    }
    cplx coeff(int alpha, int beta) const noexcept
    {
        if (alpha < 0 || beta < 0 || alpha + beta > cap_) {
            return {};
        }
        return c_[index(alpha, beta)];
    }
    cplx &at(int alpha, int beta);
    std::span<const cplx> raw() const noexcept
    {
        return c_;
    }

    bool is_zero() const noexcept;
    // Nonzero coefficients in degree-major order.
    std::vector<Term> terms() const;
    double max_abs() const noexcept;
    // Largest |c| over monomials of total degree in [lo, hi].
    double max_abs_in_degrees(int lo, int hi) const noexcept;

    BiSeries truncated(int cap) const;

    // Set when an antiderivative had to drop nonzero top-degree terms.
    bool truncation_flag() const noexcept
    {
        return truncated_;
    }
    void set_truncation_flag(bool v) noexcept
    {
        truncated_ = v;
    }

    BiSeries &operator+=(const BiSeries &o);
    BiSeries &operator-=(const BiSeries &o);
    BiSeries &operator*=(cplx s);

private:
    int cap_;
    Center center_;
    std::vector<cplx> c_;
    bool truncated_ = false;
};

bool same_structure(const BiSeries &a, const BiSeries &b) noexcept;

BiSeries operator+(BiSeries a, const BiSeries &b);
BiSeries operator-(BiSeries a, const BiSeries &b);
BiSeries operator-(BiSeries a);
BiSeries operator*(const BiSeries &a, const BiSeries &b);
BiSeries operator*(BiSeries a, cplx s);
BiSeries operator*(cplx s, BiSeries a);
BiSeries operator+(BiSeries a, cplx s);
BiSeries operator-(BiSeries a, cplx s);

BiSeries differentiate(const BiSeries &a, Var v);
BiSeries antiderivative(const BiSeries &a, Var v, int out_cap = -1);

// z -> a(z, w(z)); requires w(0) = 0. Result cap is min(a.cap, w.cap).
UniSeries compose_w(const BiSeries &a, const UniSeries &w_of_z);

BiSeries exp_series(const BiSeries &a);
BiSeries reciprocal(const BiSeries &a, const std::string &name = "series");
// a^p for a(0) != 0, principal branch of the constant term.
BiSeries pow_series(const BiSeries &a, double p);

struct CurveDivision {
    BiSeries quotient;           // cap = num.cap - 1
    double remainder = 0.0;      // max |num(z, w(z))| coefficient
    double reconstruction = 0.0; // max |(w - w(z)) q - num| coefficient
    double scale = 0.0;          // max |num| coefficient
};

// Factor (w - w(z)) out of a series that vanishes on the curve w = w(z).
// Throws PreconditionError when a coefficient of the restriction to the curve
// exceeds rel_tol * max(scale, m_k), m_k the same coefficient computed from
// absolute values.
CurveDivision exact_divide_by_curve(const BiSeries &num, const UniSeries &w_of_z, double rel_tol = 1e-10,
                                    const std::string &name = "numerator");

struct Evaluation {
    cplx value;
    double tail_bound; // geometric extrapolation from the last two diagonals
};

// Evaluate at absolute coordinates (z, w).
Evaluation evaluate(const BiSeries &a, cplx z, cplx w);
// a~(x1 + i x2, x1 - i x2) at an absolute real point.
cplx realify(const BiSeries &a, double x1, double x2);

// Unique w(z), w(0) = 0, with B~(z, w(z)) = B~(0, 0) up to the cap.
UniSeries implicit_w(const BiSeries &Btilde);

} // namespace cmag

#endif
