#pragma once

// Non-uniform B-spline bases in 1D, the tensor-product quadratic space on the
// parameter rectangle, and the geometry map onto the physical domain.

#include "sgiga/common.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace sgiga::spline {

inline constexpr int kMaxDegree = 4;

/// Clamped knot sequence s_0 <= ... <= s_{m+d}.
class KnotVector {
public:
    KnotVector(std::vector<double> knots, int degree);

    /// Open knot vector on [a, b] with `n_elements` uniform spans.
    static KnotVector open_uniform(double a, double b, int n_elements, int degree);

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] std::span<const double> knots() const { return knots_; }
    [[nodiscard]] double operator[](int i) const { return knots_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] int size() const { return static_cast<int>(knots_.size()); }
    [[nodiscard]] int num_basis() const { return size() - degree_ - 1; }
    [[nodiscard]] double front() const { return knots_.front(); }
    [[nodiscard]] double back() const { return knots_.back(); }

    /// Knot-span index of every nonempty span, in increasing order. The
    /// position in this list is the element index.
    [[nodiscard]] const std::vector<int>& element_spans() const { return element_spans_; }
    [[nodiscard]] int num_elements() const { return static_cast<int>(element_spans_.size()); }
    [[nodiscard]] double element_lo(int e) const { return (*this)[element_spans_[e]]; }
    [[nodiscard]] double element_hi(int e) const { return (*this)[element_spans_[e] + 1]; }

    /// Span index with s_mu <= s < s_{mu+1}; the right end maps to the last
    /// nonempty span. Throws DomainError outside [front, back].
    [[nodiscard]] int find_span(double s) const;
    /// Element index containing s (same conventions as find_span).
    [[nodiscard]] int find_element(double s) const;
    /// Element index owning a knot span, or -1 for empty spans.
    [[nodiscard]] int element_of_span(int span) const;

    /// First and last element (inclusive) touched by the support of N_j.
    [[nodiscard]] std::array<int, 2> support_elements(int j) const;

    /// Element a basis function is attached to: the middle span of its
    /// support, or the nearest nonempty span towards the interior.
    [[nodiscard]] int anchor_element(int j) const;

private:
    std::vector<double> knots_;
    int degree_;
    std::vector<int> element_spans_;
    std::vector<int> span_to_element_;
};

/// Values and derivatives of the d+1 functions active on one span.
struct BasisDerivs {
    int span = 0;
    int first = 0;  ///< index of the first active basis function (span - degree)
    int count = 0;  ///< degree + 1
    /// ders[k][r]: k-th derivative of basis `first + r`.
    std::array<std::array<double, kMaxDegree + 1>, 3> ders{};
};

/// Cox-de Boor evaluation with up to `max_deriv` (0..2) derivatives.
[[nodiscard]] BasisDerivs eval_basis_derivs(const KnotVector& kv, double s, int max_deriv);
/// Same, with the span already known.
[[nodiscard]] BasisDerivs eval_basis_derivs_in_span(const KnotVector& kv, int span, double s,
                                                    int max_deriv);

/// Value of a single basis function N_j at s (zero outside its support).
[[nodiscard]] double basis_value(const KnotVector& kv, int j, double s);

/// Midpoints of the three spans that carry N_j (quadratic only).
[[nodiscard]] std::array<double, 3> tau_points(const KnotVector& kv, int j);

/// Sum_j c_j N_j(s) for a coefficient vector of length num_basis().
[[nodiscard]] double eval_spline_1d(const KnotVector& kv, std::span<const double> coeffs, double s);

/// Nine active tensor-product functions on one element with their
/// parameter-space gradients.
struct TensorBasis {
    std::array<int, 9> index{};
    std::array<double, 9> value{};
    std::array<double, 9> ds{};
    std::array<double, 9> dt{};
    int first_s = 0;
    int first_t = 0;
};

/// Tensor-product quadratic B-spline space on a rectangle.
class SplineSpace2D {
public:
    SplineSpace2D(KnotVector s, KnotVector t);

    /// N x M uniform elements on `domain`.
    static SplineSpace2D uniform(const Box& domain, int n_s, int n_t);

    [[nodiscard]] const KnotVector& knots_s() const { return s_; }
    [[nodiscard]] const KnotVector& knots_t() const { return t_; }

    [[nodiscard]] int num_basis_s() const { return s_.num_basis(); }
    [[nodiscard]] int num_basis_t() const { return t_.num_basis(); }
    [[nodiscard]] int num_basis() const { return num_basis_s() * num_basis_t(); }
    [[nodiscard]] int num_elements_s() const { return s_.num_elements(); }
    [[nodiscard]] int num_elements_t() const { return t_.num_elements(); }
    [[nodiscard]] int num_elements() const { return num_elements_s() * num_elements_t(); }

    [[nodiscard]] int basis_index(int i, int j) const { return j * num_basis_s() + i; }
    [[nodiscard]] std::array<int, 2> basis_ij(int k) const {
        return {k % num_basis_s(), k / num_basis_s()};
    }
    [[nodiscard]] int element_index(int ei, int ej) const { return ej * num_elements_s() + ei; }
    [[nodiscard]] std::array<int, 2> element_ij(int e) const {
        return {e % num_elements_s(), e / num_elements_s()};
    }

    [[nodiscard]] Box domain() const;
    [[nodiscard]] Box element_box(int e) const;
    [[nodiscard]] int locate_element(const Vec2& p) const;

    /// Indices of the nine functions that are nonzero on element e.
    [[nodiscard]] std::array<int, 9> element_basis(int e) const;
    /// Element index ranges [lo, hi] (inclusive) covered by the support of basis k.
    [[nodiscard]] std::array<int, 4> basis_support(int k) const;
    [[nodiscard]] bool support_contains(int k, int e) const;
    /// Element that owns basis k (middle-span anchoring in each direction).
    [[nodiscard]] int anchor_element(int k) const;

    [[nodiscard]] TensorBasis eval(int element, const Vec2& p) const;
    [[nodiscard]] TensorBasis eval(const Vec2& p) const { return eval(locate_element(p), p); }

    /// Sum_k c_k N_k(p).
    [[nodiscard]] double eval_field(std::span<const double> coeffs, const Vec2& p) const;

private:
    KnotVector s_;
    KnotVector t_;
};

/// Map from the parameter rectangle to the physical domain.
class GeometryMap {
public:
    enum class Kind { Identity, Polar, Nurbs };

    struct Eval {
        Vec2 x;
        Mat2 jacobian;  ///< d(x,y)/d(s,t)
        double det = 1.0;
        bool degenerate = false;
    };

    /// Physical domain = parameter domain.
    static GeometryMap identity();
    /// x = s cos t, y = s sin t (s is the radius, t the angle).
    static GeometryMap polar();
    /// Rational tensor-product map with control points c_{ij} and weights w_{ij},
    /// both indexed like SplineSpace2D::basis_index.
    static GeometryMap nurbs(SplineSpace2D space, std::vector<Vec2> control_points,
                             std::vector<double> weights);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] Eval eval(double s, double t) const;
    [[nodiscard]] Eval eval(const Vec2& p) const { return eval(p.x(), p.y()); }

    static constexpr double kDegenerateTolerance = 1e-12;

private:
    explicit GeometryMap(Kind kind) : kind_(kind) {}

    Kind kind_;
    std::optional<SplineSpace2D> space_;
    std::vector<Vec2> control_;
    std::vector<double> weights_;
};

}  // namespace sgiga::spline
