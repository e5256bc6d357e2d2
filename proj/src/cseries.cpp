#include <cmag/cseries.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <cmag/errors.hpp>

namespace cmag
{

namespace
{

void require_same_cap(const UniSeries &a, const UniSeries &b, const char *op)
{
    if (a.cap() != b.cap()) {
        std::ostringstream os;
        os << "UniSeries " << op << ": cap mismatch (" << a.cap() << " vs " << b.cap() << ")";
        throw StructuralError(os.str());
    }
}

void require_same_structure(const BiSeries &a, const BiSeries &b, const char *op)
{
    if (a.cap() != b.cap()) {
        std::ostringstream os;
        os << "BiSeries " << op << ": cap mismatch (" << a.cap() << " vs " << b.cap() << ")";
        throw StructuralError(os.str());
    }
    if (a.center() != b.center()) {
        throw StructuralError(std::string("BiSeries ") + op + ": center mismatch");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// UniSeries

UniSeries::UniSeries(int cap)
{
    if (cap < 0) {
        throw DomainError("UniSeries: negative cap");
    }
    c_.assign(static_cast<std::size_t>(cap) + 1, cplx{});
}

UniSeries::UniSeries(std::vector<cplx> coeffs) : c_(std::move(coeffs))
{
    if (c_.empty()) {
        c_.push_back(cplx{});
    }
}

UniSeries UniSeries::constant(cplx c, int cap)
{
    UniSeries s(cap);
    s.c_[0] = c;
    return s;
}

UniSeries UniSeries::identity(int cap)
{
    UniSeries s(cap);
    if (cap >= 1) {
        s.c_[1] = 1.0;
    }
    return s;
}

cplx &UniSeries::at(int k)
{
    if (k < 0 || k > cap()) {
        throw StructuralError("UniSeries::at: index beyond cap");
    }
    return c_[static_cast<std::size_t>(k)];
}

UniSeries UniSeries::truncated(int cap) const
{
    UniSeries s(cap);
    const int n = std::min(cap, this->cap());
    std::copy_n(c_.begin(), n + 1, s.c_.begin());
    return s;
}

double UniSeries::max_abs() const noexcept
{
    double m = 0.0;
    for (const auto &c : c_) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

UniSeries &UniSeries::operator+=(const UniSeries &o)
{
    require_same_cap(*this, o, "add");
    for (std::size_t k = 0; k < c_.size(); ++k) {
        c_[k] += o.c_[k];
    }
    return *this;
}

UniSeries &UniSeries::operator-=(const UniSeries &o)
{
    require_same_cap(*this, o, "sub");
    for (std::size_t k = 0; k < c_.size(); ++k) {
        c_[k] -= o.c_[k];
    }
    return *this;
}

UniSeries &UniSeries::operator*=(cplx s)
{
    for (auto &c : c_) {
        c *= s;
    }
    return *this;
}

UniSeries operator+(UniSeries a, const UniSeries &b)
{
    return a += b;
}

UniSeries operator-(UniSeries a, const UniSeries &b)
{
    return a -= b;
}

UniSeries operator-(UniSeries a)
{
    return a *= -1.0;
}

UniSeries operator*(const UniSeries &a, const UniSeries &b)
{
    require_same_cap(a, b, "mul");
    const int n = a.cap();
    UniSeries r(n);
    for (int i = 0; i <= n; ++i) {
        const cplx ai = a[i];
        if (ai == cplx{}) {
            continue;
        }
        for (int j = 0; i + j <= n; ++j) {
            r.at(i + j) += ai * b[j];
        }
    }
    return r;
}

UniSeries operator*(UniSeries a, cplx s)
{
    return a *= s;
}

UniSeries operator*(cplx s, UniSeries a)
{
    return a *= s;
}

UniSeries differentiate(const UniSeries &a)
{
    if (a.cap() == 0) {
        return UniSeries(0);
    }
    UniSeries r(a.cap() - 1);
    for (int k = 1; k <= a.cap(); ++k) {
        r.at(k - 1) = static_cast<double>(k) * a[k];
    }
    return r;
}

UniSeries antiderivative(const UniSeries &a, int out_cap)
{
    if (out_cap < 0) {
        out_cap = a.cap();
    }
    UniSeries r(out_cap);
    for (int k = 0; k <= a.cap() && k + 1 <= out_cap; ++k) {
        r.at(k + 1) = a[k] / static_cast<double>(k + 1);
    }
    return r;
}

UniSeries exp_series(const UniSeries &a)
{
    // e' = a' e, i.e. k e_k = sum_{j=1..k} j a_j e_{k-j}.
    const int n = a.cap();
    UniSeries e(n);
    e.at(0) = std::exp(a[0]);
    for (int k = 1; k <= n; ++k) {
        cplx s{};
        for (int j = 1; j <= k; ++j) {
            s += static_cast<double>(j) * a[j] * e[k - j];
        }
        e.at(k) = s / static_cast<double>(k);
    }
    return e;
}

UniSeries reciprocal(const UniSeries &a, const std::string &name)
{
    if (a[0] == cplx{}) {
        throw DivisionError("reciprocal: constant term of " + name + " vanishes");
    }
    const int n = a.cap();
    UniSeries r(n);
    const cplx inv = 1.0 / a[0];
    r.at(0) = inv;
    for (int k = 1; k <= n; ++k) {
        cplx s{};
        for (int j = 1; j <= k; ++j) {
            s += a[j] * r[k - j];
        }
        r.at(k) = -inv * s;
    }
    return r;
}

cplx evaluate(const UniSeries &a, cplx z)
{
    cplx acc{};
    for (int k = a.cap(); k >= 0; --k) {
        acc = acc * z + a[k];
    }
    return acc;
}

// ---------------------------------------------------------------------------
// BiSeries

BiSeries::BiSeries(int cap, Center center) : cap_(cap), center_(center)
{
    if (cap < 0) {
        throw DomainError("BiSeries: negative cap");
    }
    c_.assign(size_for_cap(cap), cplx{});
}

BiSeries BiSeries::constant(cplx c, int cap, Center center)
{
    BiSeries s(cap, center);
    s.c_[0] = c;
    return s;
}

BiSeries BiSeries::monomial(int alpha, int beta, cplx c, int cap, Center center)
{
    BiSeries s(cap, center);
    if (alpha + beta <= cap) {
        s.at(alpha, beta) = c;
    }
    return s;
}

BiSeries BiSeries::var_z(int cap, Center center)
{
    return monomial(1, 0, 1.0, cap, center);
}

BiSeries BiSeries::var_w(int cap, Center center)
{
    return monomial(0, 1, 1.0, cap, center);
}

BiSeries BiSeries::lift_z(const UniSeries &u, int cap, Center center)
{
    BiSeries s(cap, center);
    for (int k = 0; k <= std::min(cap, u.cap()); ++k) {
        s.at(k, 0) = u[k];
    }
    return s;
}

cplx &BiSeries::at(int alpha, int beta)
{
    if (alpha < 0 || beta < 0 || alpha + beta > cap_) {
        throw StructuralError("BiSeries::at: exponent pair beyond cap");
    }
    return c_[index(alpha, beta)];
}

bool BiSeries::is_zero() const noexcept
{
    return std::all_of(c_.begin(), c_.end(), [](const cplx &c) { return c == cplx{}; });
}

std::vector<BiSeries::Term> BiSeries::terms() const
{
    std::vector<Term> out;
    for (int d = 0; d <= cap_; ++d) {
        for (int b = 0; b <= d; ++b) {
            const cplx v = c_[index(d - b, b)];
            if (v != cplx{}) {
                out.push_back({d - b, b, v});
            }
        }
    }
    return out;
}

double BiSeries::max_abs() const noexcept
{
    double m = 0.0;
    for (const auto &c : c_) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

double BiSeries::max_abs_in_degrees(int lo, int hi) const noexcept
{
    double m = 0.0;
    lo = std::max(lo, 0);
    hi = std::min(hi, cap_);
    for (int d = lo; d <= hi; ++d) {
        for (int b = 0; b <= d; ++b) {
            m = std::max(m, std::abs(c_[index(d - b, b)]));
        }
    }
    return m;
}

BiSeries BiSeries::truncated(int cap) const
{
    BiSeries s(cap, center_);
    const auto n = std::min(s.c_.size(), c_.size());
    std::copy_n(c_.begin(), n, s.c_.begin());
    s.truncated_ = truncated_;
    return s;
}

BiSeries &BiSeries::operator+=(const BiSeries &o)
{
    require_same_structure(*this, o, "add");
    for (std::size_t k = 0; k < c_.size(); ++k) {
        c_[k] += o.c_[k];
    }
    truncated_ = truncated_ || o.truncated_;
    return *this;
}

BiSeries &BiSeries::operator-=(const BiSeries &o)
{
    require_same_structure(*this, o, "sub");
    for (std::size_t k = 0; k < c_.size(); ++k) {
        c_[k] -= o.c_[k];
    }
    truncated_ = truncated_ || o.truncated_;
    return *this;
}

BiSeries &BiSeries::operator*=(cplx s)
{
    for (auto &c : c_) {
        c *= s;
    }
    return *this;
}

bool same_structure(const BiSeries &a, const BiSeries &b) noexcept
{
    return a.cap() == b.cap() && a.center() == b.center();
}

BiSeries operator+(BiSeries a, const BiSeries &b)
{
    return a += b;
}

BiSeries operator-(BiSeries a, const BiSeries &b)
{
    return a -= b;
}

BiSeries operator-(BiSeries a)
{
    return a *= -1.0;
}

BiSeries operator*(const BiSeries &a, const BiSeries &b)
{
    require_same_structure(a, b, "mul");
    const int n = a.cap();
    BiSeries r(n, a.center());
    const auto ra = a.raw();
    const auto rb = b.raw();
    std::vector<cplx> acc(BiSeries::size_for_cap(n));
    for (int d1 = 0; d1 <= n; ++d1) {
        for (int b1 = 0; b1 <= d1; ++b1) {
            const cplx x = ra[BiSeries::index(d1 - b1, b1)];
            if (x == cplx{}) {
                continue;
            }
            const int a1 = d1 - b1;
            for (int d2 = 0; d1 + d2 <= n; ++d2) {
                const std::size_t out_base = BiSeries::index(a1 + d2, b1);
                const std::size_t in_base = BiSeries::index(d2, 0);
                // index(a1 + d2 - b2, b1 + b2) = out_base + b2 when the total degree is fixed.
                for (int b2 = 0; b2 <= d2; ++b2) {
                    acc[out_base + static_cast<std::size_t>(b2)] += x * rb[in_base + static_cast<std::size_t>(b2)];
                }
            }
        }
    }
    for (int d = 0; d <= n; ++d) {
        for (int bb = 0; bb <= d; ++bb) {
            r.at(d - bb, bb) = acc[BiSeries::index(d - bb, bb)];
        }
    }
    r.set_truncation_flag(a.truncation_flag() || b.truncation_flag());
    return r;
}

BiSeries operator*(BiSeries a, cplx s)
{
    return a *= s;
}

BiSeries operator*(cplx s, BiSeries a)
{
    return a *= s;
}

BiSeries operator+(BiSeries a, cplx s)
{
    a.at(0, 0) += s;
    return a;
}

BiSeries operator-(BiSeries a, cplx s)
{
    a.at(0, 0) -= s;
    return a;
}

BiSeries differentiate(const BiSeries &a, Var v)
{
    if (a.cap() == 0) {
        BiSeries r(0, a.center());
        return r;
    }
    BiSeries r(a.cap() - 1, a.center());
    for (int d = 1; d <= a.cap(); ++d) {
        for (int b = 0; b <= d; ++b) {
            const int al = d - b;
            const cplx c = a.coeff(al, b);
            if (v == Var::z && al > 0) {
                r.at(al - 1, b) = static_cast<double>(al) * c;
            } else if (v == Var::w && b > 0) {
                r.at(al, b - 1) = static_cast<double>(b) * c;
            }
        }
    }
    r.set_truncation_flag(a.truncation_flag());
    return r;
}

BiSeries antiderivative(const BiSeries &a, Var v, int out_cap)
{
    if (out_cap < 0) {
        out_cap = a.cap();
    }
    BiSeries r(out_cap, a.center());
    bool dropped = a.truncation_flag();
    for (int d = 0; d <= a.cap(); ++d) {
        for (int b = 0; b <= d; ++b) {
            const int al = d - b;
            const cplx c = a.coeff(al, b);
            if (c == cplx{}) {
                continue;
            }
            if (d + 1 > out_cap) {
                dropped = true;
                continue;
            }
            if (v == Var::z) {
                r.at(al + 1, b) = c / static_cast<double>(al + 1);
            } else {
                r.at(al, b + 1) = c / static_cast<double>(b + 1);
            }
        }
    }
    r.set_truncation_flag(dropped);
    return r;
}

UniSeries compose_w(const BiSeries &a, const UniSeries &w_of_z)
{
    if (w_of_z[0] != cplx{}) {
        throw DomainError("compose_w: curve must satisfy w(0) = 0");
    }
    const int n = std::min(a.cap(), w_of_z.cap());
    const UniSeries w = w_of_z.truncated(n);
    UniSeries result(n);
    UniSeries wpow = UniSeries::constant(1.0, n);
    for (int b = 0; b <= n; ++b) {
        // w(z)^b starts at z^b, so only alpha <= n - b contributes.
        UniSeries coef(n);
        bool any = false;
        for (int al = 0; al + b <= a.cap() && al <= n; ++al) {
            const cplx c = a.coeff(al, b);
            coef.at(al) = c;
            any = any || c != cplx{};
        }
        if (any) {
            result += coef * wpow;
        }
        if (b < n) {
            wpow = wpow * w;
        }
    }
    return result;
}

namespace
{

// Shared recursion for exp and pow: y_k determined from lower-degree terms via
// the Euler operator E = z d/dz + w d/dw (E multiplies degree-k parts by k).
//   exp: E y = (E a) y              ->  k y_k = sum d1 a_{d1} y_{k-d1}
//   pow: a E y = p y E a            ->  k a_0 y_k = sum (p d1 - (k - d1)) a_{d1} y_{k-d1}
template <typename Weight>
BiSeries euler_recursion(const BiSeries &a, cplx y0, cplx denom0, Weight weight)
{
    const int n = a.cap();
    BiSeries y(n, a.center());
    y.at(0, 0) = y0;
    for (int k = 1; k <= n; ++k) {
        for (int b = 0; b <= k; ++b) {
            const int al = k - b;
            cplx s{};
            for (int d1 = 1; d1 <= k; ++d1) {
                const double wgt = weight(k, d1);
                if (wgt == 0.0) {
                    continue;
                }
                for (int b1 = std::max(0, b - (k - d1)); b1 <= std::min(b, d1); ++b1) {
                    const int a1 = d1 - b1;
                    if (a1 > al) {
                        continue;
                    }
                    const cplx ac = a.coeff(a1, b1);
                    if (ac == cplx{}) {
                        continue;
                    }
                    s += wgt * ac * y.coeff(al - a1, b - b1);
                }
            }
            y.at(al, b) = s / (static_cast<double>(k) * denom0);
        }
    }
    y.set_truncation_flag(a.truncation_flag());
    return y;
}

} // namespace

BiSeries exp_series(const BiSeries &a)
{
    return euler_recursion(a, std::exp(a.coeff(0, 0)), 1.0, [](int, int d1) { return static_cast<double>(d1); });
}

BiSeries pow_series(const BiSeries &a, double p)
{
    const cplx a0 = a.coeff(0, 0);
    if (a0 == cplx{}) {
        throw DivisionError("pow_series: constant term vanishes");
    }
    return euler_recursion(a, std::pow(a0, p), a0,
                           [p](int k, int d1) { return p * d1 - static_cast<double>(k - d1); });
}

BiSeries reciprocal(const BiSeries &a, const std::string &name)
{
    const cplx a0 = a.coeff(0, 0);
    if (a0 == cplx{}) {
        throw DivisionError("reciprocal: constant term of " + name + " vanishes");
    }
    const int n = a.cap();
    const cplx inv = 1.0 / a0;
    BiSeries r(n, a.center());
    r.at(0, 0) = inv;
    for (int k = 1; k <= n; ++k) {
        for (int b = 0; b <= k; ++b) {
            const int al = k - b;
            cplx s{};
            for (int d1 = 1; d1 <= k; ++d1) {
                for (int b1 = std::max(0, b - (k - d1)); b1 <= std::min(b, d1); ++b1) {
                    const int a1 = d1 - b1;
                    if (a1 > al) {
                        continue;
                    }
                    const cplx ac = a.coeff(a1, b1);
                    if (ac != cplx{}) {
                        s += ac * r.coeff(al - a1, b - b1);
                    }
                }
            }
            r.at(al, b) = -inv * s;
        }
    }
    r.set_truncation_flag(a.truncation_flag());
    return r;
}

CurveDivision exact_divide_by_curve(const BiSeries &num, const UniSeries &w_of_z, double rel_tol,
                                    const std::string &name)
{
    if (w_of_z[0] != cplx{}) {
        throw DomainError("exact_divide_by_curve: curve must satisfy w(0) = 0");
    }
    const int d = num.cap();
    if (w_of_z.cap() < d) {
        throw StructuralError("exact_divide_by_curve: curve cap below numerator cap");
    }
    if (d == 0) {
        throw StructuralError("exact_divide_by_curve: numerator cap must be >= 1");
    }
    CurveDivision out;
    out.scale = num.max_abs();

    // Synthetic division in w with z-series coefficients:
    //   n_b = q_{b-1} - c q_b   =>   q_{b-1} = n_b + c q_b,  c = w(z).
    // q_b needs z-degree <= d - 1 - b; the remainder is n_0 + c q_0.
    // A majorant recursion on absolute values bounds the size of the terms
    // that cancel in each remainder coefficient; rounding is judged against it.
    std::vector<std::vector<cplx>> q(static_cast<std::size_t>(d));
    std::vector<cplx> upper;        // q_b for the previous b
    std::vector<double> upper_abs;  // majorant of q_b
    for (int b = d; b >= 1; --b) {
        const int len = d - b + 1; // z-degrees 0..d-b
        std::vector<cplx> cur(static_cast<std::size_t>(len));
        std::vector<double> cur_abs(static_cast<std::size_t>(len));
        for (int k = 0; k < len; ++k) {
            cplx s = num.coeff(k, b);
            double m = std::abs(s);
            for (int i = 1; i <= k; ++i) {
                const int j = k - i;
                if (j < static_cast<int>(upper.size())) {
                    s += w_of_z[i] * upper[static_cast<std::size_t>(j)];
                    m += std::abs(w_of_z[i]) * upper_abs[static_cast<std::size_t>(j)];
                }
            }
            cur[static_cast<std::size_t>(k)] = s;
            cur_abs[static_cast<std::size_t>(k)] = m;
        }
        q[static_cast<std::size_t>(b - 1)] = cur;
        upper = std::move(cur);
        upper_abs = std::move(cur_abs);
    }
    double rem = 0.0, excess = 0.0, worst_tol = rel_tol * out.scale;
    for (int k = 0; k <= d; ++k) {
        cplx s = num.coeff(k, 0);
        double m = std::abs(s);
        for (int i = 1; i <= k; ++i) {
            const int j = k - i;
            if (j < static_cast<int>(upper.size())) {
                s += w_of_z[i] * upper[static_cast<std::size_t>(j)];
                m += std::abs(w_of_z[i]) * upper_abs[static_cast<std::size_t>(j)];
            }
        }
        rem = std::max(rem, std::abs(s));
        const double tol_k = rel_tol * std::max(out.scale, m);
        if (std::abs(s) - tol_k > excess) {
            excess = std::abs(s) - tol_k;
            worst_tol = tol_k;
        }
    }
    out.remainder = rem;
    if (excess > 0.0) {
        std::ostringstream os;
        os << "exact_divide_by_curve: " << name << " does not vanish on the curve (largest coefficient " << rem
           << ", tolerance " << worst_tol << ")";
        throw PreconditionError(os.str());
    }

    BiSeries quot(d - 1, num.center());
    for (int b = 0; b <= d - 1; ++b) {
        const auto &qb = q[static_cast<std::size_t>(b)];
        for (int al = 0; al + b <= d - 1; ++al) {
            quot.at(al, b) = qb[static_cast<std::size_t>(al)];
        }
    }
    quot.set_truncation_flag(num.truncation_flag());

    // (w - w(z)) has no constant term, so the degree-d part of the product does
    // not depend on the (unknown) degree-d part of q.
    const BiSeries factor = BiSeries::var_w(d, num.center()) - BiSeries::lift_z(w_of_z, d, num.center());
    const BiSeries back = factor * quot.truncated(d) - num;
    out.reconstruction = back.max_abs();
    out.quotient = std::move(quot);
    return out;
}

Evaluation evaluate(const BiSeries &a, cplx z, cplx w)
{
    const cplx dz = z - a.center()[0];
    const cplx dw = w - a.center()[1];
    const int n = a.cap();
    std::vector<cplx> zp(static_cast<std::size_t>(n) + 1), wp(static_cast<std::size_t>(n) + 1);
    zp[0] = wp[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        zp[static_cast<std::size_t>(k)] = zp[static_cast<std::size_t>(k) - 1] * dz;
        wp[static_cast<std::size_t>(k)] = wp[static_cast<std::size_t>(k) - 1] * dw;
    }
    cplx value{};
    double last = 0.0, prev = 0.0;
    for (int d = 0; d <= n; ++d) {
        cplx part{};
        double mag = 0.0;
        for (int b = 0; b <= d; ++b) {
            const cplx t = a.coeff(d - b, b) * zp[static_cast<std::size_t>(d - b)] * wp[static_cast<std::size_t>(b)];
            part += t;
            mag += std::abs(t);
        }
        value += part;
        prev = last;
        last = mag;
    }
    double tail = 0.0;
    if (last > 0.0) {
        const double ratio = prev > 0.0 ? last / prev : std::numeric_limits<double>::infinity();
        tail = ratio < 1.0 ? last * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    }
    return {value, tail};
}

cplx realify(const BiSeries &a, double x1, double x2)
{
    return evaluate(a, cplx(x1, x2), cplx(x1, -x2)).value;
}

UniSeries implicit_w(const BiSeries &Btilde)
{
    const cplx bw = Btilde.coeff(0, 1);
    if (bw == cplx{}) {
        throw DomainError("implicit_w: not in Gamma: d_zbar B vanishes at the base point");
    }
    const int n = Btilde.cap();
    UniSeries w(n);
    // The z^k coefficient of B~(z, w(z)) depends on w_k only through b_{0,1} w_k,
    // so one correction per degree is exact.
    for (int k = 1; k <= n; ++k) {
        const UniSeries r = compose_w(Btilde, w);
        w.at(k) -= r[k] / bw;
    }
    return w;
}

} // namespace cmag
