#include "sgiga/interface.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <sstream>

namespace sgiga::geom {

namespace {

Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

}  // namespace

Vec2 ImplicitInterface::closest_point(const Vec2& p) const {
    Vec2 x = p;
    double step = 0.0;
    for (int it = 0; it < kNewtonMaxIterations; ++it) {
        const Vec2 g = grad(x);
        const double gg = g.squaredNorm();
        if (gg == 0.0) {
            throw GeometryError("closest_point: vanishing level-set gradient");
        }
        // Project onto the level set, then slide along the tangent towards p.
        const Vec2 on = x - phi(x) * g / gg;
        const Vec2 t = perp(grad(on)).normalized();
        const Vec2 next = on + (p - on).dot(t) * t;
        step = (next - x).norm();
        x = next;
        if (step <= kNewtonTolerance * (1.0 + p.norm())) {
            const Vec2 gx = grad(x);
            return x - phi(x) * gx / gx.squaredNorm();
        }
    }
    std::ostringstream os;
    os << "closest_point: no convergence from (" << p.x() << ", " << p.y() << ") after "
       << kNewtonMaxIterations << " iterations, last step " << step << ", phi " << phi(x);
    throw ConvergenceError(os.str());
}

double ImplicitInterface::signed_distance(const Vec2& p) const {
    const double d = (p - closest_point(p)).norm();
    return phi(p) >= 0.0 ? d : -d;
}

Vec2 ImplicitInterface::signed_distance_grad(const Vec2& p) const {
    const Vec2 r = p - closest_point(p);
    const double d = r.norm();
    if (d < 1e-14) return unit_normal(p);
    return phi(p) >= 0.0 ? Vec2(r / d) : Vec2(-r / d);
}

Range ImplicitInterface::phi_range(const Box& box) const {
    constexpr int kSamples = 16;
    Range r{phi(box.lo), phi(box.lo)};
    for (int j = 0; j <= kSamples; ++j) {
        for (int i = 0; i <= kSamples; ++i) {
            const Vec2 q{box.lo.x() + box.width() * i / kSamples,
                         box.lo.y() + box.height() * j / kSamples};
            const double v = phi(q);
            r.lo = std::min(r.lo, v);
            r.hi = std::max(r.hi, v);
        }
    }
    return r;
}

double ImplicitInterface::distance(const Vec2& p) const { return std::abs(signed_distance(p)); }

double ImplicitInterface::one_sided_distance(const Vec2& p) const {
    return std::max(signed_distance(p), 0.0);
}

Vec2 ImplicitInterface::unit_normal(const Vec2& p) const {
    const Vec2 g = grad(p);
    const double n = g.norm();
    if (n == 0.0) throw GeometryError("unit_normal: vanishing level-set gradient");
    return g / n;
}

// ---------------------------------------------------------------------------

LineInterface::LineInterface(const Vec2& point, const Vec2& normal) : point_(point) {
    const double n = normal.norm();
    if (!(n > 0.0)) throw InvalidArgument("LineInterface: zero normal");
    normal_ = normal / n;
}

LineInterface LineInterface::through(const Vec2& a, const Vec2& b) {
    if ((b - a).norm() == 0.0) throw InvalidArgument("LineInterface::through: coincident points");
    return {a, perp(b - a)};
}

Vec2 LineInterface::closest_point(const Vec2& p) const { return p - phi(p) * normal_; }

Range LineInterface::phi_range(const Box& box) const {
    const std::array<Vec2, 4> c{box.lo, Vec2{box.hi.x(), box.lo.y()}, box.hi,
                                Vec2{box.lo.x(), box.hi.y()}};
    Range r{phi(c[0]), phi(c[0])};
    for (const auto& q : c) {
        const double v = phi(q);
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    }
    return r;
}

CircleInterface::CircleInterface(const Vec2& center, double radius, PositiveSide positive_side)
    : center_(center), radius_(radius), sign_(positive_side == PositiveSide::Outside ? 1.0 : -1.0) {
    if (!(radius > 0.0)) throw InvalidArgument("CircleInterface: radius must be positive");
}

double CircleInterface::phi(const Vec2& p) const { return sign_ * ((p - center_).norm() - radius_); }

Vec2 CircleInterface::grad(const Vec2& p) const {
    const Vec2 r = p - center_;
    const double n = r.norm();
    if (n == 0.0) return Vec2::Zero();
    return sign_ * r / n;
}

Vec2 CircleInterface::closest_point(const Vec2& p) const {
    const Vec2 r = p - center_;
    const double n = r.norm();
    if (n == 0.0) return center_ + Vec2{radius_, 0.0};
    return center_ + radius_ * r / n;
}

Range CircleInterface::phi_range(const Box& box) const {
    const Vec2 nearest{std::clamp(center_.x(), box.lo.x(), box.hi.x()),
                       std::clamp(center_.y(), box.lo.y(), box.hi.y())};
    const double dmin = (nearest - center_).norm();
    const double fx = std::max(std::abs(box.lo.x() - center_.x()), std::abs(box.hi.x() - center_.x()));
    const double fy = std::max(std::abs(box.lo.y() - center_.y()), std::abs(box.hi.y() - center_.y()));
    const double dmax = std::hypot(fx, fy);
    if (sign_ > 0.0) return {dmin - radius_, dmax - radius_};
    return {radius_ - dmax, radius_ - dmin};
}

LevelSetInterface::LevelSetInterface(ScalarFn phi, VectorFn grad)
    : phi_(std::move(phi)), grad_(std::move(grad)) {
    if (!phi_ || !grad_) throw InvalidArgument("LevelSetInterface: empty callable");
}

// ---------------------------------------------------------------------------

MeshClassification::MeshClassification(int n_s, int n_t, std::vector<ElementLabel> labels,
                                       std::vector<bool> touch)
    : n_s_(n_s), n_t_(n_t), labels_(std::move(labels)), touch_(std::move(touch)) {
    const auto n = static_cast<std::size_t>(n_s_) * static_cast<std::size_t>(n_t_);
    if (labels_.size() != n || touch_.size() != n) {
        throw InvalidArgument("MeshClassification: label array size mismatch");
    }
    // Multi-source breadth-first search over the 8-neighbourhood.
    ring_.assign(n, kUnreached);
    std::deque<int> queue;
    for (std::size_t e = 0; e < n; ++e) {
        if (labels_[e] == ElementLabel::Cut) {
            ring_[e] = 0;
            queue.push_back(static_cast<int>(e));
        }
    }
    while (!queue.empty()) {
        const int e = queue.front();
        queue.pop_front();
        const int ei = e % n_s_;
        const int ej = e / n_s_;
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const int i = ei + di;
                const int j = ej + dj;
                if (i < 0 || j < 0 || i >= n_s_ || j >= n_t_) continue;
                const auto f = static_cast<std::size_t>(j * n_s_ + i);
                if (ring_[f] == kUnreached) {
                    ring_[f] = ring_[static_cast<std::size_t>(e)] + 1;
                    queue.push_back(static_cast<int>(f));
                }
            }
        }
    }
}

std::vector<int> MeshClassification::J(int k) const {
    std::vector<int> out;
    for (int e = 0; e < num_elements(); ++e)
        if (in_J(e, k)) out.push_back(e);
    return out;
}

std::vector<int> MeshClassification::J_plus(int k) const {
    std::vector<int> out;
    for (int e = 0; e < num_elements(); ++e)
        if (in_J_plus(e, k)) out.push_back(e);
    return out;
}

std::vector<int> MeshClassification::J_minus(int k) const {
    std::vector<int> out;
    for (int e = 0; e < num_elements(); ++e)
        if (in_J_minus(e, k)) out.push_back(e);
    return out;
}

std::vector<int> MeshClassification::J_vertices(int k) const {
    std::vector<int> out;
    const int nv = n_s_ + 1;
    for (int e = 0; e < num_elements(); ++e) {
        if (!in_J(e, k)) continue;
        const int ei = e % n_s_;
        const int ej = e / n_s_;
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di) out.push_back((ej + dj) * nv + ei + di);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int MeshClassification::num_cut() const {
    return static_cast<int>(std::count(labels_.begin(), labels_.end(), ElementLabel::Cut));
}

int MeshClassification::num_touch() const {
    return static_cast<int>(std::count(touch_.begin(), touch_.end(), true));
}

MeshClassification classify_elements(const spline::SplineSpace2D& space,
                                     const ImplicitInterface& iface) {
    const int n = space.num_elements();
    std::vector<ElementLabel> labels(static_cast<std::size_t>(n));
    std::vector<bool> touch(static_cast<std::size_t>(n), false);
    for (int e = 0; e < n; ++e) {
        const Box box = space.element_box(e);
        const double tol = 1e-12 * std::hypot(box.width(), box.height());
        const Range r = iface.phi_range(box);
        auto& l = labels[static_cast<std::size_t>(e)];
        if (r.lo < -tol && r.hi > tol) {
            l = ElementLabel::Cut;
        } else if (r.lo > tol) {
            l = ElementLabel::Positive;
        } else if (r.hi < -tol) {
            l = ElementLabel::Negative;
        } else {
            l = ElementLabel::Cut;
            touch[static_cast<std::size_t>(e)] = true;
        }
    }
    return {space.num_elements_s(), space.num_elements_t(), std::move(labels), std::move(touch)};
}

// ---------------------------------------------------------------------------

double CutCellPartition::area(Side s) const {
    double a = 0.0;
    for (const auto& c : cells)
        if (c.side == s) a += c.area;
    return a;
}

double CutCellPartition::interface_length() const {
    double l = 0.0;
    for (const auto& q : interface) l += q.w;
    return l;
}

Vec2 segment_root(const ImplicitInterface& iface, const Vec2& a, const Vec2& b) {
    double u0 = 0.0;
    double u1 = 1.0;
    const Side s0 = iface.side(a);
    if (iface.side(b) == s0) throw InvalidArgument("segment_root: no sign change on segment");
    for (int it = 0; it < 60 && u1 - u0 > 1e-16; ++it) {
        const double um = 0.5 * (u0 + u1);
        if (iface.side(a + um * (b - a)) == s0) {
            u0 = um;
        } else {
            u1 = um;
        }
    }
    return a + 0.5 * (u0 + u1) * (b - a);
}

std::vector<SegmentPiece> split_segment(const ImplicitInterface& iface, const Vec2& a, const Vec2& b,
                                        int samples) {
    std::vector<Vec2> cuts{a};
    Vec2 prev = a;
    Side prev_side = iface.side(a);
    for (int i = 1; i <= samples; ++i) {
        const Vec2 q = a + (b - a) * (static_cast<double>(i) / samples);
        const Side s = iface.side(q);
        if (s != prev_side) cuts.push_back(segment_root(iface, prev, q));
        prev = q;
        prev_side = s;
    }
    cuts.push_back(b);
    std::vector<SegmentPiece> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if ((cuts[i + 1] - cuts[i]).norm() == 0.0) continue;
        out.push_back({cuts[i], cuts[i + 1], iface.side(0.5 * (cuts[i] + cuts[i + 1]))});
    }
    return out;
}

namespace {

class PartitionBuilder {
public:
    PartitionBuilder(const ImplicitInterface& iface, const CutCellOptions& opt, CutCellPartition& out)
        : iface_(iface), opt_(opt), out_(out) {}

    void recurse(const Box& box, int level) {
        const Range r = iface_.phi_range(box);
        if (r.lo >= 0.0) return box_leaf(box, level, Side::Positive);
        if (r.hi < 0.0) return box_leaf(box, level, Side::Negative);
        if (level >= opt_.depth) {
            if (chord_split(box, level)) return;
            if (level >= opt_.depth + opt_.extra_depth) {
                ++out_.fallback_leaves;
                return box_leaf(box, level, iface_.side(box.center()));
            }
        }
        const Vec2 c = box.center();
        recurse({box.lo, c}, level + 1);
        recurse({{c.x(), box.lo.y()}, {box.hi.x(), c.y()}}, level + 1);
        recurse({{box.lo.x(), c.y()}, {c.x(), box.hi.y()}}, level + 1);
        recurse({c, box.hi}, level + 1);
    }

private:
    void box_leaf(const Box& box, int level, Side side) {
        QuadCell cell;
        cell.side = side;
        cell.depth = level;
        cell.area = box.area();
        cell.centroid = box.center();
        quad::tensor_gauss(box, opt_.gauss, cell.points);
        out_.cells.push_back(std::move(cell));
    }

    // Split a leaf whose corners change sign exactly twice by the chord
    // through the two edge roots.
    bool chord_split(const Box& box, int level) {
        const std::array<Vec2, 4> c{box.lo, Vec2{box.hi.x(), box.lo.y()}, box.hi,
                                    Vec2{box.lo.x(), box.hi.y()}};
        std::array<Side, 4> s{};
        for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>(i)] = iface_.side(c[static_cast<std::size_t>(i)]);
        int changes = 0;
        for (int i = 0; i < 4; ++i) changes += s[static_cast<std::size_t>(i)] != s[static_cast<std::size_t>((i + 1) % 4)];
        if (changes != 2) return false;

        std::vector<Vec2> pos;
        std::vector<Vec2> neg;
        std::vector<Vec2> roots;
        for (std::size_t i = 0; i < 4; ++i) {
            const std::size_t j = (i + 1) % 4;
            (s[i] == Side::Positive ? pos : neg).push_back(c[i]);
            if (s[i] != s[j]) {
                const Vec2 x = segment_root(iface_, c[i], c[j]);
                pos.push_back(x);
                neg.push_back(x);
                roots.push_back(x);
            }
        }
        polygon_cell(pos, level, Side::Positive);
        polygon_cell(neg, level, Side::Negative);
        chord_rule(roots[0], roots[1]);
        return true;
    }

    void polygon_cell(const std::vector<Vec2>& poly, int level, Side side) {
        const double a = std::abs(quad::polygon_area(poly));
        if (a == 0.0) return;
        QuadCell cell;
        cell.side = side;
        cell.depth = level;
        cell.area = a;
        cell.polygon = true;
        Vec2 centroid = Vec2::Zero();
        quad::convex_polygon_rule(poly, cell.points);
        for (const auto& q : cell.points) centroid += q.w * q.p;
        cell.centroid = centroid / a;
        out_.cells.push_back(std::move(cell));
    }

    void chord_rule(const Vec2& a, const Vec2& b) {
        const double len = (b - a).norm();
        if (len == 0.0) return;
        const auto& g = quad::gauss_legendre(opt_.interface_gauss);
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            const Vec2 q = 0.5 * (a + b) + 0.5 * g.x[k] * (b - a);
            InterfacePoint ip;
            ip.p = iface_.closest_point(q);
            ip.w = 0.5 * len * g.w[k];
            ip.normal = iface_.unit_normal(ip.p);
            ip.tangent = perp(ip.normal);
            out_.interface.push_back(ip);
        }
    }

    const ImplicitInterface& iface_;
    const CutCellOptions& opt_;
    CutCellPartition& out_;
};

int edge_sign_changes(const ImplicitInterface& iface, const Vec2& a, const Vec2& b) {
    constexpr int kSamples = 64;
    int changes = 0;
    Side prev = iface.side(a);
    for (int i = 1; i <= kSamples; ++i) {
        const Side s = iface.side(a + (b - a) * (static_cast<double>(i) / kSamples));
        changes += s != prev;
        prev = s;
    }
    return changes;
}

}  // namespace

CutCellPartition cut_cell_partition(const spline::SplineSpace2D& space, const MeshClassification& cls,
                                    int element, const ImplicitInterface& iface,
                                    const CutCellOptions& options) {
    if (element < 0 || element >= space.num_elements()) {
        throw DomainError("cut_cell_partition: element index out of range");
    }
    if (cls.num_elements() != space.num_elements()) {
        throw InvalidArgument("cut_cell_partition: classification and space grids differ");
    }
    if (!cls.is_cut(element)) {
        throw InvalidArgument("cut_cell_partition: element " + std::to_string(element) +
                              " is not cut by the interface");
    }
    if (options.depth < 0 || options.extra_depth < 0) {
        throw InvalidArgument("cut_cell_partition: negative depth");
    }
    CutCellPartition out;
    out.element = element;
    out.box = space.element_box(element);
    const Box& b = out.box;
    const std::array<Vec2, 4> c{b.lo, Vec2{b.hi.x(), b.lo.y()}, b.hi, Vec2{b.lo.x(), b.hi.y()}};
    for (std::size_t i = 0; i < 4; ++i) {
        if (edge_sign_changes(iface, c[i], c[(i + 1) % 4]) > 2) {
            throw InterfaceResolutionError("cut_cell_partition: more than two interface crossings on an edge of element " +
                                           std::to_string(element) + "; refine the mesh");
        }
    }
    PartitionBuilder(iface, options, out).recurse(out.box, 0);
    return out;
}

}  // namespace sgiga::geom
