#include <cmag/numop.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <cmag/errors.hpp>
#include <cmag/parallel.hpp>

namespace cmag
{

namespace
{

const cplx I(0.0, 1.0);

// fourth-order central differences along one axis; stride selects the axis
inline cplx d1(const cplx *p, std::ptrdiff_t s, double inv12h)
{
    return (p[-2 * s] - 8.0 * p[-s] + 8.0 * p[s] - p[2 * s]) * inv12h;
}

inline cplx d2(const cplx *p, std::ptrdiff_t s, double inv12h2)
{
    return (-p[-2 * s] + 16.0 * p[-s] - 30.0 * p[0] + 16.0 * p[s] - p[2 * s]) * inv12h2;
}

double boundary_max(const GridFunction &u, int layers)
{
    const int n = u.grid.n();
    double m = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (i < layers || j < layers || i >= n - layers || j >= n - layers) {
                m = std::max(m, std::abs(u(i, j)));
            }
        }
    }
    return m;
}

double max_abs(const GridFunction &u)
{
    double m = 0.0;
    for (const auto &v : u.values) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

// sum over rows, pairwise inside each row and across rows
double grid_sum(int n, const std::function<double(int, int)> &f, int workers = 0)
{
    std::vector<double> rows(static_cast<std::size_t>(n));
    parallel_for(
        static_cast<std::size_t>(n),
        [&](std::size_t j) {
            std::vector<double> r(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                r[static_cast<std::size_t>(i)] = f(i, static_cast<int>(j));
            }
            rows[j] = pairwise_sum(r);
        },
        workers);
    return pairwise_sum(rows);
}

void put_le(std::ostream &os, double x)
{
    auto b = std::bit_cast<std::uint64_t>(x);
    char buf[8];
    for (int k = 0; k < 8; ++k) {
        buf[k] = static_cast<char>(b & 0xffu);
        b >>= 8;
    }
    os.write(buf, 8);
}

double get_le(std::istream &is)
{
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char *>(buf), 8)) {
        throw ConfigError("read_grid: truncated data");
    }
    std::uint64_t b = 0;
    for (int k = 7; k >= 0; --k) {
        b = (b << 8) | buf[k];
    }
    return std::bit_cast<double>(b);
}

} // namespace

Grid2D::Grid2D(int n, double L, Point center) : n_(n), L_(L), center_(center)
{
    if (n < 16) {
        throw ConfigError("Grid2D: need at least 16 points per axis");
    }
    if (!(L > 0.0) || !std::isfinite(L)) {
        throw ConfigError("Grid2D: half-width must be positive");
    }
}

GridFunction sample(const Grid2D &g, const std::function<cplx(const Point &)> &f, int workers)
{
    GridFunction u(g);
    parallel_for(
        static_cast<std::size_t>(g.n()),
        [&](std::size_t j) {
            for (int i = 0; i < g.n(); ++i) {
                u(i, static_cast<int>(j)) = f(g.at(i, static_cast<int>(j)));
            }
        },
        workers);
    return u;
}

double grid_norm(const GridFunction &u)
{
    const double d = u.grid.spacing();
    return std::sqrt(grid_sum(u.grid.n(), [&](int i, int j) { return std::norm(u(i, j)); }) * d * d);
}

void write_grid(std::ostream &os, const GridFunction &u)
{
    os << u.grid.n() << ' ' << format_double(u.grid.L()) << ' ' << format_double(u.grid.center()[0]) << ' '
       << format_double(u.grid.center()[1]) << '\n';
    for (const auto &v : u.values) {
        put_le(os, v.real());
        put_le(os, v.imag());
    }
}

GridFunction read_grid(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("read_grid: missing header");
    }
    std::istringstream hs(line);
    int n = 0;
    double L = 0, c1 = 0, c2 = 0;
    if (!(hs >> n >> L >> c1 >> c2)) {
        throw ConfigError("read_grid: malformed header '" + line + "'");
    }
    GridFunction u(Grid2D(n, L, {c1, c2}));
    for (auto &v : u.values) {
        const double re = get_le(is);
        v = cplx(re, get_le(is));
    }
    return u;
}

LResult apply_L(const MagneticField &field, double h, const GridFunction &u, bool throw_on_violation, int workers)
{
    if (!(h > 0.0)) {
        throw DomainError("apply_L: h must be positive");
    }
    const auto &g = u.grid;
    const int n = g.n();
    LResult r{GridFunction(g)};
    r.boundary_max = boundary_max(u, 4);
    if (r.boundary_max > 1e-12 * max_abs(u)) {
        r.support_violation = true;
        if (throw_on_violation) {
            std::ostringstream os;
            os << "apply_L: u is not negligible near the grid boundary (" << r.boundary_max
               << "); enlarge L beyond " << g.L();
            throw DomainError(os.str());
        }
    }
    const double d = g.spacing();
    const double i12h = 1.0 / (12.0 * d), i12h2 = 1.0 / (12.0 * d * d);
    parallel_for(
        static_cast<std::size_t>(n - 4),
        [&](std::size_t jj) {
            const int j = static_cast<int>(jj) + 2;
            for (int i = 2; i < n - 2; ++i) {
                const cplx *p = &u.values[static_cast<std::size_t>(j) * n + i];
                const Point x = g.at(i, j);
                const auto A = field.A(x);
                const auto J = field.dA(x);
                const cplx ux = d1(p, 1, i12h), uy = d1(p, n, i12h);
                const cplx lap = d2(p, 1, i12h2) + d2(p, n, i12h2);
                const cplx divA = J[0][0] + J[1][1];
                r.Lu(i, j) = -h * h * lap + 2.0 * I * h * (A[0] * ux + A[1] * uy) + I * h * divA * p[0] +
                             (A[0] * A[0] + A[1] * A[1]) * p[0];
            }
        },
        workers);
    return r;
}

ResidualReport residual_finite_difference(const Pseudomode &pm, double h, int n, int N, int workers)
{
    if (N < 0) {
        N = pm.N_used(h);
    }
    const Grid2D g(n, 2.0 * pm.cutoff().r_out, pm.spec().base);
    const auto u = sample(g, [&](const Point &x) { return pm.evaluate(x, h, N).u; }, workers);
    const auto Lu = apply_L(*pm.spec().field, h, u, true, workers).Lu;
    const cplx hmu = h * pm.solution().mu;
    const double d = g.spacing();
    const double res2 = grid_sum(
        n,
        [&](int i, int j) {
            if (i < 2 || j < 2 || i >= n - 2 || j >= n - 2) {
                return 0.0;
            }
            return std::norm(Lu(i, j) - hmu * u(i, j));
        },
        workers);
    ResidualReport r;
    r.h = h;
    r.N_used = N;
    r.evaluator = "finite_difference";
    r.u_norm = grid_norm(u);
    r.residual_norm = std::sqrt(res2 * d * d);
    if (!(r.u_norm > 0.0)) {
        throw DomainError("residual_finite_difference: pseudomode vanished on the grid");
    }
    r.ratio = r.residual_norm / r.u_norm;
    r.quadrature_points = n * n;
    r.tail_estimate = pm.tail_estimate(h, N);
    return r;
}

MagneticSlack magnetic_slack(const MagneticField &field, double h, const GridFunction &u)
{
    const auto &g = u.grid;
    const int n = g.n();
    const double d = g.spacing();
    const double i12h = 1.0 / (12.0 * d);
    std::vector<double> reB(static_cast<std::size_t>(n) * n), imB(reB.size()), kin(reB.size()), ima(reB.size());
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(j) * n + i;
            const cplx v = u(i, j);
            const Point x = g.at(i, j);
            const cplx B = field.B(x);
            const auto A = field.A(x);
            cplx ux{}, uy{};
            if (i >= 2 && j >= 2 && i < n - 2 && j < n - 2) {
                const cplx *p = &u.values[k];
                ux = d1(p, 1, i12h);
                uy = d1(p, n, i12h);
            }
            const cplx k1 = -I * h * ux - A[0].real() * v, k2 = -I * h * uy - A[1].real() * v;
            reB[k] = h * B.real() * std::norm(v);
            imB[k] = h * B.imag() * std::norm(v);
            kin[k] = std::norm(k1) + std::norm(k2);
            ima[k] = (A[0].imag() * A[0].imag() + A[1].imag() * A[1].imag()) * std::norm(v);
        }
    });
    const double w = d * d;
    MagneticSlack s;
    s.lhs_re = std::abs(pairwise_sum(reB)) * w;
    s.lhs_im = std::abs(pairwise_sum(imB)) * w;
    s.rhs_re = pairwise_sum(kin) * w;
    s.rhs_im = s.rhs_re + pairwise_sum(ima) * w;
    return s;
}

InequalityReport verify_magnetic_inequalities(const FieldSpec &spec, double h, int trials, const InequalityConfig &cfg)
{
    const Grid2D g(cfg.n, cfg.L, spec.base);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    InequalityReport rep;
    rep.trials = trials;
    rep.worst_slack_re = rep.worst_slack_im = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        const Point c{spec.base[0] + 0.4 * cfg.L * U(rng), spec.base[1] + 0.4 * cfg.L * U(rng)};
        const double rho = cfg.L * (0.425 + 0.125 * U(rng));
        const cplx p1(U(rng), U(rng)), p2(U(rng), U(rng)), p3(U(rng), U(rng));
        const double k1 = U(rng), k2 = U(rng);
        const auto u = sample(g, [&](const Point &x) {
            const double a = (x[0] - c[0]) / rho, b = (x[1] - c[1]) / rho;
            const double r2 = a * a + b * b;
            if (r2 >= 1.0) {
                return cplx(0.0);
            }
            const double bump = std::exp(1.0 - 1.0 / (1.0 - r2));
            return bump * (1.0 + p1 * a + p2 * b + p3 * a * b) * std::exp(I * (k1 * x[0] + k2 * x[1]) / h);
        });
        const auto s = magnetic_slack(*spec.field, h, u);
        const double sre = s.rhs_re - s.lhs_re, sim = s.rhs_im - s.lhs_im;
        if (sre < rep.worst_slack_re) {
            rep.worst_slack_re = sre;
            rep.rhs_re_at_worst = s.rhs_re;
        }
        if (sim < rep.worst_slack_im) {
            rep.worst_slack_im = sim;
            rep.rhs_im_at_worst = s.rhs_im;
        }
        if (rep.failing_trial_re < 0 && sre < -1e-6 * s.rhs_re) {
            rep.failing_trial_re = t;
        }
        if (rep.failing_trial_im < 0 && sim < -1e-6 * s.rhs_im) {
            rep.failing_trial_im = t;
        }
    }
    return rep;
}

} // namespace cmag
