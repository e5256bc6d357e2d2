#ifndef CMAG_NUMOP_HPP
#define CMAG_NUMOP_HPP

// Finite-difference (-ih grad - A)^2 with complex A on a uniform square grid.

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <vector>

#include <cmag/fieldmodel.hpp>
#include <cmag/pseudomode.hpp>

namespace cmag
{

// center + [-L, L]^2, n points per axis.
class Grid2D
{
public:
    Grid2D(int n, double L, Point center = {0.0, 0.0});

    int n() const noexcept
    {
        return n_;
    }
    double L() const noexcept
    {
        return L_;
    }
    const Point &center() const noexcept
    {
        return center_;
    }
    double spacing() const noexcept
    {
        return 2.0 * L_ / (n_ - 1);
    }
    // i runs along x1, j along x2; storage index j * n + i.
    Point at(int i, int j) const noexcept
    {
        const double d = spacing();
        return {center_[0] - L_ + i * d, center_[1] - L_ + j * d};
    }

private:
    int n_;
    double L_;
    Point center_;
};

struct GridFunction {
    Grid2D grid;
    std::vector<cplx> values;

    explicit GridFunction(Grid2D g) : grid(g), values(static_cast<std::size_t>(g.n()) * g.n())
    {
    }
    cplx &operator()(int i, int j)
    {
        return values[static_cast<std::size_t>(j) * grid.n() + i];
    }
    cplx operator()(int i, int j) const
    {
        return values[static_cast<std::size_t>(j) * grid.n() + i];
    }
};

GridFunction sample(const Grid2D &g, const std::function<cplx(const Point &)> &f, int workers = 0);

// sqrt(sum |u|^2 spacing^2).
double grid_norm(const GridFunction &u);

// Text line "n L c1 c2" then n*n (re, im) little-endian binary64 pairs, row-major (x1 fastest).
void write_grid(std::ostream &os, const GridFunction &u);
GridFunction read_grid(std::istream &is);

struct LResult {
    GridFunction Lu;
    bool support_violation = false;
    double boundary_max = 0.0; // max |u| on the outer 4 layers
};

// L u = -h^2 Lap u + 2ih A.grad u + ih (div A) u + (A.A) u with fourth-order
// central differences; the outer two layers of Lu are zero. When u is not
// negligible on the outer 4 layers (> 1e-12 max|u|), throws DomainError, or
// only sets the flag when `throw_on_violation` is false.
LResult apply_L(const MagneticField &field, double h, const GridFunction &u, bool throw_on_violation = true,
                int workers = 0);

// ||(L - h mu) u_h|| / ||u_h|| on center x0, half-width 2 r_out, n points per axis.
ResidualReport residual_finite_difference(const Pseudomode &pm, double h, int n = 512, int N = -1, int workers = 0);

struct MagneticSlack {
    double lhs_re = 0.0; // |int h Re B |u|^2|
    double rhs_re = 0.0; // ||(-ih grad - Re A) u||^2
    double lhs_im = 0.0; // |int h Im B |u|^2|
    double rhs_im = 0.0; // rhs_re + ||Im A u||^2
};
MagneticSlack magnetic_slack(const MagneticField &field, double h, const GridFunction &u);

struct InequalityReport {
    double worst_slack_re = 0.0;  // min over trials of rhs - lhs
    double worst_slack_im = 0.0;
    double rhs_re_at_worst = 0.0;
    double rhs_im_at_worst = 0.0;
    int failing_trial_re = -1;    // first trial below -1e-6 rhs, or -1
    int failing_trial_im = -1;
    int trials = 0;
    bool ok() const noexcept
    {
        return failing_trial_re < 0 && failing_trial_im < 0;
    }
};

struct InequalityConfig {
    int n = 256;
    double L = 1.0;
    std::uint64_t seed = 1;
};

// Random bump x polynomial x plane-wave test functions on center + [-L, L]^2.
InequalityReport verify_magnetic_inequalities(const FieldSpec &spec, double h, int trials,
                                              const InequalityConfig &cfg = {});

} // namespace cmag

#endif
