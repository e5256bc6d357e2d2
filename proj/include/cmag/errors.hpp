#ifndef CMAG_ERRORS_HPP
#define CMAG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cmag
{

// Operands that cannot be combined (mismatched caps, centers, grid sizes).
class StructuralError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

// Argument outside the domain of an operation (h <= 0, w(0) != 0, ...).
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// Reciprocal of a series with vanishing constant term.
class DivisionError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// A numerical precondition did not hold (e.g. a numerator that should
// vanish on the curve w = w(z) does not).
class PreconditionError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// The base point is not admissible for the WKB construction.
class GammaRejection : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A series identity that holds analytically failed numerically.
class IdentityFailure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Quadrature could not resolve the integrand at the configured resolution.
class QuadratureRefusal : public std::runtime_error
{
public:
    QuadratureRefusal(const std::string &what, int required_points)
        : std::runtime_error(what), required_points_(required_points)
    {
    }
    int required_points() const noexcept
    {
        return required_points_;
    }

private:
    int required_points_;
};

class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace cmag

#endif
