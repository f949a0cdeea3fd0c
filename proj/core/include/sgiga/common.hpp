#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgiga {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Axis-aligned rectangle in the parameter domain.
struct Box {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};

    [[nodiscard]] double width() const { return hi.x() - lo.x(); }
    [[nodiscard]] double height() const { return hi.y() - lo.y(); }
    [[nodiscard]] double area() const { return width() * height(); }
    [[nodiscard]] Vec2 center() const { return 0.5 * (lo + hi); }
    [[nodiscard]] bool contains(const Vec2& p, double tol = 0.0) const {
        return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
               p.y() <= hi.y() + tol;
    }
};

/// Which side of the interface a point, cell or coefficient belongs to.
/// Positive is the side where the level set is > 0; it carries the
/// one-sided distance and the J^f_{k,+} element sets.
enum class Side : signed char { Negative = -1, Positive = 1 };

[[nodiscard]] inline Side side_of(double phi) { return phi >= 0.0 ? Side::Positive : Side::Negative; }

// Error hierarchy. All library failures are reported through these.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point or index outside the admissible range.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid construction arguments (bad knot vector, mismatched grids, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Geometry map or interface query that cannot be evaluated.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// The interface is not resolved by the mesh (more than one arc per element).
class InterfaceResolutionError : public Error {
public:
    using Error::Error;
};

/// Factorisation or linear solve failed.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, std::ptrdiff_t pivot, double value)
        : Error(what), pivot_(pivot), value_(value) {}

    [[nodiscard]] std::ptrdiff_t pivot() const { return pivot_; }
    [[nodiscard]] double value() const { return value_; }

private:
    std::ptrdiff_t pivot_;
    double value_;
};

/// An iterative method ran out of iterations.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace sgiga
