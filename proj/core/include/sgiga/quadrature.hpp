#pragma once

// Reference quadrature rules on intervals, rectangles and triangles.

#include "sgiga/common.hpp"

#include <vector>

namespace sgiga::quad {

inline constexpr int kMaxGaussPoints = 32;

/// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
};

/// n-point Gauss-Legendre rule, 1 <= n <= kMaxGaussPoints. Exact for degree 2n-1.
[[nodiscard]] const Rule1D& gauss_legendre(int n);

struct WeightedPoint {
    Vec2 p;
    double w = 0.0;
};

/// n x n tensor Gauss rule mapped to `box`; appended to `out`.
void tensor_gauss(const Box& box, int n, std::vector<WeightedPoint>& out);

/// Seven-point degree-5 rule on the triangle (a, b, c); appended to `out`.
void triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, std::vector<WeightedPoint>& out);

/// Fan triangulation of a convex polygon, each triangle with triangle_rule.
void convex_polygon_rule(const std::vector<Vec2>& polygon, std::vector<WeightedPoint>& out);

/// Signed area (counter-clockwise positive).
[[nodiscard]] double polygon_area(const std::vector<Vec2>& polygon);

}  // namespace sgiga::quad
