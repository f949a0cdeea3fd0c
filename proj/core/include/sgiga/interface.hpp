#pragma once

// Implicit interfaces in the parameter domain, element classification into
// the dilated index sets J^f_k, J^f_{k,+-}, J^v_k, and cut-cell quadrature.

#include "sgiga/common.hpp"
#include "sgiga/quadrature.hpp"
#include "sgiga/splines.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace sgiga::geom {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Level-set description of Gamma. phi > 0 on the positive side (the side
/// carrying the one-sided distance), phi < 0 on the negative side.
class ImplicitInterface {
public:
    virtual ~ImplicitInterface() = default;

    [[nodiscard]] virtual double phi(const Vec2& p) const = 0;
    [[nodiscard]] virtual Vec2 grad(const Vec2& p) const = 0;

    /// Closest point on Gamma. The default is a projected fixed-point/Newton
    /// iteration (tolerance 1e-12, 50 iterations).
    [[nodiscard]] virtual Vec2 closest_point(const Vec2& p) const;
    /// Signed distance to Gamma, positive where phi > 0.
    [[nodiscard]] virtual double signed_distance(const Vec2& p) const;
    /// Gradient of the signed distance.
    [[nodiscard]] virtual Vec2 signed_distance_grad(const Vec2& p) const;

    /// Bounds of phi over a closed box. Exact when exact_range() is true,
    /// otherwise estimated by dense sampling.
    [[nodiscard]] virtual Range phi_range(const Box& box) const;
    [[nodiscard]] virtual bool exact_range() const { return false; }

    [[nodiscard]] double distance(const Vec2& p) const;
    [[nodiscard]] double one_sided_distance(const Vec2& p) const;
    /// grad(phi) / |grad(phi)|, pointing into the positive side.
    [[nodiscard]] Vec2 unit_normal(const Vec2& p) const;
    [[nodiscard]] Side side(const Vec2& p) const { return side_of(phi(p)); }

    static constexpr double kNewtonTolerance = 1e-12;
    static constexpr int kNewtonMaxIterations = 50;
};

/// Straight line through `point` with unit normal `normal`; phi = normal . (p - point).
class LineInterface final : public ImplicitInterface {
public:
    LineInterface(const Vec2& point, const Vec2& normal);
    /// Line through a and b; the positive side is to the left of a -> b.
    static LineInterface through(const Vec2& a, const Vec2& b);

    [[nodiscard]] double phi(const Vec2& p) const override { return normal_.dot(p - point_); }
    [[nodiscard]] Vec2 grad(const Vec2&) const override { return normal_; }
    [[nodiscard]] Vec2 closest_point(const Vec2& p) const override;
    [[nodiscard]] double signed_distance(const Vec2& p) const override { return phi(p); }
    [[nodiscard]] Vec2 signed_distance_grad(const Vec2&) const override { return normal_; }
    [[nodiscard]] Range phi_range(const Box& box) const override;
    [[nodiscard]] bool exact_range() const override { return true; }

    [[nodiscard]] const Vec2& point() const { return point_; }
    [[nodiscard]] const Vec2& normal() const { return normal_; }

private:
    Vec2 point_;
    Vec2 normal_;
};

/// Circle |p - c| = r. `positive_side` selects which region has phi > 0.
class CircleInterface final : public ImplicitInterface {
public:
    enum class PositiveSide { Inside, Outside };

    CircleInterface(const Vec2& center, double radius, PositiveSide positive_side);

    [[nodiscard]] double phi(const Vec2& p) const override;
    [[nodiscard]] Vec2 grad(const Vec2& p) const override;
    [[nodiscard]] Vec2 closest_point(const Vec2& p) const override;
    [[nodiscard]] double signed_distance(const Vec2& p) const override { return phi(p); }
    [[nodiscard]] Vec2 signed_distance_grad(const Vec2& p) const override { return grad(p); }
    [[nodiscard]] Range phi_range(const Box& box) const override;
    [[nodiscard]] bool exact_range() const override { return true; }

    [[nodiscard]] const Vec2& center() const { return center_; }
    [[nodiscard]] double radius() const { return radius_; }

private:
    Vec2 center_;
    double radius_;
    double sign_;
};

/// Arbitrary smooth level set given by callables.
class LevelSetInterface final : public ImplicitInterface {
public:
    using ScalarFn = std::function<double(const Vec2&)>;
    using VectorFn = std::function<Vec2(const Vec2&)>;

    LevelSetInterface(ScalarFn phi, VectorFn grad);

    [[nodiscard]] double phi(const Vec2& p) const override { return phi_(p); }
    [[nodiscard]] Vec2 grad(const Vec2& p) const override { return grad_(p); }

private:
    ScalarFn phi_;
    VectorFn grad_;
};

// ---------------------------------------------------------------------------

enum class ElementLabel : signed char { Negative = -1, Cut = 0, Positive = 1 };

/// Element labels and dilated index sets on the element grid of a space.
class MeshClassification {
public:
    MeshClassification(int n_s, int n_t, std::vector<ElementLabel> labels, std::vector<bool> touch);

    [[nodiscard]] int num_elements_s() const { return n_s_; }
    [[nodiscard]] int num_elements_t() const { return n_t_; }
    [[nodiscard]] int num_elements() const { return n_s_ * n_t_; }

    [[nodiscard]] ElementLabel label(int e) const { return labels_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] bool is_cut(int e) const { return label(e) == ElementLabel::Cut; }
    /// Flagged: Gamma only touches the element (tangency or vertex contact).
    [[nodiscard]] bool touches(int e) const { return touch_[static_cast<std::size_t>(e)]; }
    /// Number of vertex-adjacency dilations needed to reach e from J^f_0
    /// (Chebyshev distance in element indices); kUnreached if no element is cut.
    [[nodiscard]] int ring(int e) const { return ring_[static_cast<std::size_t>(e)]; }

    [[nodiscard]] bool in_J(int e, int k) const { return ring(e) <= k; }
    /// closure(e) meets the positive side.
    [[nodiscard]] bool in_J_plus(int e, int k) const {
        return in_J(e, k) && label(e) != ElementLabel::Negative;
    }
    [[nodiscard]] bool in_J_minus(int e, int k) const {
        return in_J(e, k) && label(e) != ElementLabel::Positive;
    }

    [[nodiscard]] std::vector<int> J(int k) const;
    [[nodiscard]] std::vector<int> J_plus(int k) const;
    [[nodiscard]] std::vector<int> J_minus(int k) const;
    /// Vertices (i, j) of elements in J^f_k, flattened as j * (n_s + 1) + i.
    [[nodiscard]] std::vector<int> J_vertices(int k) const;

    [[nodiscard]] int num_cut() const;
    [[nodiscard]] int num_touch() const;

    static constexpr int kUnreached = 1 << 29;

private:
    int n_s_;
    int n_t_;
    std::vector<ElementLabel> labels_;
    std::vector<bool> touch_;
    std::vector<int> ring_;
};

/// Classify every element of `space` against `iface`. Elements whose phi
/// range only touches zero (within a relative tolerance) are labelled Cut and
/// flagged via touches().
[[nodiscard]] MeshClassification classify_elements(const spline::SplineSpace2D& space,
                                                   const ImplicitInterface& iface);

// ---------------------------------------------------------------------------

struct QuadCell {
    Side side = Side::Positive;
    int depth = 0;
    double area = 0.0;
    Vec2 centroid = Vec2::Zero();
    bool polygon = false;  ///< split by the interface chord rather than a quadtree box
    std::vector<quad::WeightedPoint> points;
};

struct InterfacePoint {
    Vec2 p;
    double w = 0.0;  ///< parameter-space arc-length weight
    Vec2 normal;     ///< unit normal in parameter space, pointing into the positive side
    Vec2 tangent;    ///< unit tangent in parameter space
};

struct CutCellPartition {
    int element = -1;
    Box box;
    std::vector<QuadCell> cells;
    std::vector<InterfacePoint> interface;
    int fallback_leaves = 0;  ///< leaves labelled by their centre sign

    [[nodiscard]] double area(Side s) const;
    [[nodiscard]] double interface_length() const;
};

struct CutCellOptions {
    int depth = 5;
    int gauss = 3;
    int interface_gauss = 4;
    /// Extra quadtree levels allowed where a leaf is not split cleanly by one chord.
    int extra_depth = 3;
};

/// Side-resolved quadrature for one cut element.
[[nodiscard]] CutCellPartition cut_cell_partition(const spline::SplineSpace2D& space,
                                                  const MeshClassification& cls, int element,
                                                  const ImplicitInterface& iface,
                                                  const CutCellOptions& options = {});

/// Root of phi on the segment [a, b] given sign change, to ~1e-15 relative.
[[nodiscard]] Vec2 segment_root(const ImplicitInterface& iface, const Vec2& a, const Vec2& b);

struct SegmentPiece {
    Vec2 a;
    Vec2 b;
    Side side;
};

/// Split the segment [a, b] at the roots of phi (located by sampling into
/// `samples` subintervals and refined by root finding).
[[nodiscard]] std::vector<SegmentPiece> split_segment(const ImplicitInterface& iface, const Vec2& a,
                                                      const Vec2& b, int samples = 64);

}  // namespace sgiga::geom
