#include "sgiga/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgiga::fem {

namespace {

struct Mapped {
    Vec2 x;
    Mat2 jac;
    Mat2 jinv_t;
    double det = 1.0;
};

Mapped map_point(const spline::GeometryMap& geo, const Vec2& p) {
    const auto ev = geo.eval(p);
    if (ev.degenerate) {
        std::ostringstream os;
        os << "assembly: degenerate geometry Jacobian at (" << p.x() << ", " << p.y() << ")";
        throw GeometryError(os.str());
    }
    return {ev.x, ev.jacobian, ev.jacobian.inverse().transpose(), std::abs(ev.det)};
}

Side uncut_side(const geom::MeshClassification& cls, int e) {
    switch (cls.label(e)) {
        case geom::ElementLabel::Positive: return Side::Positive;
        case geom::ElementLabel::Negative: return Side::Negative;
        case geom::ElementLabel::Cut: break;
    }
    throw InvalidArgument("assembly: cut element without a partition");
}

// Boundary edges of an element that lie on the parameter-domain boundary,
// with their outward parameter normals.
struct BoundaryEdge {
    Vec2 a;
    Vec2 b;
    Vec2 normal;
};

std::vector<BoundaryEdge> boundary_edges(const spline::SplineSpace2D& space, int e) {
    const auto [ei, ej] = space.element_ij(e);
    const Box b = space.element_box(e);
    std::vector<BoundaryEdge> out;
    if (ej == 0) out.push_back({b.lo, {b.hi.x(), b.lo.y()}, {0.0, -1.0}});
    if (ei == space.num_elements_s() - 1) out.push_back({{b.hi.x(), b.lo.y()}, b.hi, {1.0, 0.0}});
    if (ej == space.num_elements_t() - 1) out.push_back({b.hi, {b.lo.x(), b.hi.y()}, {0.0, 1.0}});
    if (ei == 0) out.push_back({{b.lo.x(), b.hi.y()}, b.lo, {-1.0, 0.0}});
    return out;
}

void add_block(std::vector<la::Triplet>& trip, const std::array<int, 9>& rows, const std::vector<int>& cols,
               const Eigen::MatrixXd& block) {
    for (Eigen::Index c = 0; c < block.cols(); ++c)
        for (int r = 0; r < 9; ++r)
            if (block(r, c) != 0.0) trip.emplace_back(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)], block(r, c));
}

la::SpMat from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<la::Triplet>& trip) {
    la::SpMat m(rows, cols);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

}  // namespace

QuadratureCache::QuadratureCache(const spline::SplineSpace2D& space, const geom::MeshClassification& cls,
                                 const geom::ImplicitInterface& iface, const QuadratureOptions& options)
    : options_(options), index_(static_cast<std::size_t>(space.num_elements()), -1) {
    geom::CutCellOptions co;
    co.depth = options.depth;
    co.gauss = options.gauss;
    co.interface_gauss = options.interface_gauss;
    for (int e = 0; e < space.num_elements(); ++e) {
        if (!cls.is_cut(e)) continue;
        index_[static_cast<std::size_t>(e)] = static_cast<int>(parts_.size());
        parts_.push_back(geom::cut_cell_partition(space, cls, e, iface, co));
        fallback_ += parts_.back().fallback_leaves;
    }
}

const geom::CutCellPartition* QuadratureCache::partition(int e) const {
    const int i = index_[static_cast<std::size_t>(e)];
    return i < 0 ? nullptr : &parts_[static_cast<std::size_t>(i)];
}

void QuadratureCache::element_points(const spline::SplineSpace2D& space, const geom::MeshClassification& cls,
                                     int e, int n, std::vector<quad::WeightedPoint>& pts,
                                     std::vector<Side>& sides) const {
    pts.clear();
    sides.clear();
    if (const auto* part = partition(e)) {
        for (const auto& cell : part->cells) {
            pts.insert(pts.end(), cell.points.begin(), cell.points.end());
            sides.insert(sides.end(), cell.points.size(), cell.side);
        }
        return;
    }
    quad::tensor_gauss(space.element_box(e), n, pts);
    sides.assign(pts.size(), uncut_side(cls, e));
}

// ---------------------------------------------------------------------------

la::SpMat AssembledSystem::matrix() const {
    std::vector<la::Triplet> trip;
    trip.reserve(static_cast<std::size_t>(K_oo.nonZeros() + 2 * K_oe.nonZeros() + K_ee.size()));
    for (int c = 0; c < K_oo.outerSize(); ++c)
        for (la::SpMat::InnerIterator it(K_oo, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < K_oe.outerSize(); ++c) {
        for (la::SpMat::InnerIterator it(K_oe, c); it; ++it) {
            trip.emplace_back(it.row(), n_orig + c, it.value());
            trip.emplace_back(n_orig + c, it.row(), it.value());
        }
    }
    for (int c = 0; c < n_enr; ++c)
        for (int r = 0; r < n_enr; ++r)
            if (K_ee(r, c) != 0.0) trip.emplace_back(n_orig + r, n_orig + c, K_ee(r, c));
    return from_triplets(size(), size(), trip);
}

Eigen::VectorXd AssembledSystem::rhs() const {
    Eigen::VectorXd f(size());
    f.head(n_orig) = F_o;
    f.tail(n_enr) = F_e;
    return f;
}

RawSystem assemble_raw(const enrich::EnrichedSpace& enr, const geom::MeshClassification& cls,
                       const QuadratureCache& cache, const ProblemData& data) {
    if (!data.f || !data.g) throw InvalidArgument("assemble: source and boundary flux are required");
    if (!(data.a_pos > 0.0) || !(data.a_neg > 0.0)) throw InvalidArgument("assemble: coefficients must be positive");
    const auto& space = enr.space();
    const int nb = space.num_basis();
    const int nr = enr.num_raw();
    const auto& opt = cache.options();

    std::vector<la::Triplet> tk_nn, tm_nn, tk_np, tm_np;
    RawSystem out;
    out.K_psipsi = Eigen::MatrixXd::Zero(nr, nr);
    out.F_n = Eigen::VectorXd::Zero(nb);
    out.F_psi = Eigen::VectorXd::Zero(nr);
    out.basis_integrals = Eigen::VectorXd::Zero(nb);
    double u_integral = 0.0;

    std::vector<quad::WeightedPoint> pts;
    std::vector<Side> sides;
    enrich::RawValues raw;
    for (int e = 0; e < space.num_elements(); ++e) {
        cache.element_points(space, cls, e, opt.gauss, pts, sides);
        const auto basis = space.element_basis(e);
        const auto& act = enr.active(e);
        const auto na = static_cast<Eigen::Index>(act.size());
        const auto np = static_cast<Eigen::Index>(pts.size());

        // Columns hold sqrt-weighted physical gradients (two per point) and values.
        Eigen::MatrixXd bn(9, 2 * np), bp(na, 2 * np), vn(9, np), vp(na, np);
        Eigen::VectorXd fn = Eigen::VectorXd::Zero(9), fp = Eigen::VectorXd::Zero(na);
        for (Eigen::Index q = 0; q < np; ++q) {
            const Vec2& p = pts[static_cast<std::size_t>(q)].p;
            const Side side = sides[static_cast<std::size_t>(q)];
            const Mapped m = map_point(data.geometry, p);
            const double w = pts[static_cast<std::size_t>(q)].w * m.det;
            const double sa = std::sqrt(data.coefficient(side) * w);
            const double sw = std::sqrt(w);
            const double fv = data.f(side, {p, m.x});
            const auto tb = space.eval(e, p);
            for (int r = 0; r < 9; ++r) {
                const Vec2 g = m.jinv_t * Vec2(tb.ds[r], tb.dt[r]);
                bn(r, 2 * q) = sa * g.x();
                bn(r, 2 * q + 1) = sa * g.y();
                vn(r, q) = sw * tb.value[r];
                fn(r) += w * fv * tb.value[r];
                out.basis_integrals(basis[static_cast<std::size_t>(r)]) += w * tb.value[r];
            }
            if (na > 0) {
                enr.eval_raw(e, p, side, tb, raw);
                for (Eigen::Index i = 0; i < na; ++i) {
                    const Vec2 g = m.jinv_t * raw.grad[static_cast<std::size_t>(i)];
                    bp(i, 2 * q) = sa * g.x();
                    bp(i, 2 * q + 1) = sa * g.y();
                    vp(i, q) = sw * raw.value[static_cast<std::size_t>(i)];
                    fp(i) += w * fv * raw.value[static_cast<std::size_t>(i)];
                }
            }
            out.area += w;
            if (data.u) u_integral += w * data.u(side, {p, m.x});
        }

        // Interface flux jump.
        const auto* part = cache.partition(e);
        if (part && data.q) {
            for (const auto& ip : part->interface) {
                const Mapped m = map_point(data.geometry, ip.p);
                const double ds = (m.jac * ip.tangent).norm() * ip.w;
                const Vec2 n = (m.jinv_t * ip.normal).normalized();
                const double qv = ds * data.q({ip.p, m.x}, -n);
                const auto tb = space.eval(e, ip.p);
                for (int r = 0; r < 9; ++r) fn(r) += qv * tb.value[r];
                if (na > 0) {
                    enr.eval_raw(e, ip.p, Side::Positive, tb, raw);
                    for (Eigen::Index i = 0; i < na; ++i) fp(i) += qv * raw.value[static_cast<std::size_t>(i)];
                }
            }
        }

        // Neumann boundary flux.
        for (const auto& edge : boundary_edges(space, e)) {
            std::vector<geom::SegmentPiece> pieces;
            if (part) {
                pieces = geom::split_segment(enr.interface(), edge.a, edge.b);
            } else {
                pieces.push_back({edge.a, edge.b, uncut_side(cls, e)});
            }
            const auto& gl = quad::gauss_legendre(opt.gauss + 1);
            for (const auto& piece : pieces) {
                const double len = (piece.b - piece.a).norm();
                const Vec2 tan = (piece.b - piece.a) / len;
                for (std::size_t k = 0; k < gl.x.size(); ++k) {
                    const Vec2 p = 0.5 * (piece.a + piece.b) + 0.5 * gl.x[k] * (piece.b - piece.a);
                    const Mapped m = map_point(data.geometry, p);
                    const double ds = (m.jac * tan).norm() * 0.5 * len * gl.w[k];
                    const Vec2 n = (m.jinv_t * edge.normal).normalized();
                    const double gv = ds * data.g(piece.side, {p, m.x}, n);
                    const auto tb = space.eval(e, p);
                    for (int r = 0; r < 9; ++r) fn(r) += gv * tb.value[r];
                    if (na > 0) {
                        enr.eval_raw(e, p, piece.side, tb, raw);
                        for (Eigen::Index i = 0; i < na; ++i) fp(i) += gv * raw.value[static_cast<std::size_t>(i)];
                    }
                }
            }
        }

        const Eigen::MatrixXd k_nn = bn * bn.transpose();
        const Eigen::MatrixXd m_nn = vn * vn.transpose();
        const std::vector<int> rows9(basis.begin(), basis.end());
        add_block(tk_nn, basis, rows9, k_nn);
        add_block(tm_nn, basis, rows9, m_nn);
        for (int r = 0; r < 9; ++r) out.F_n(basis[static_cast<std::size_t>(r)]) += fn(r);
        if (na > 0) {
            add_block(tk_np, basis, act, bn * bp.transpose());
            add_block(tm_np, basis, act, vn * vp.transpose());
            const Eigen::MatrixXd k_pp = bp * bp.transpose();
            for (Eigen::Index j = 0; j < na; ++j) {
                out.F_psi(act[static_cast<std::size_t>(j)]) += fp(j);
                for (Eigen::Index i = 0; i < na; ++i) {
                    out.K_psipsi(act[static_cast<std::size_t>(i)], act[static_cast<std::size_t>(j)]) += k_pp(i, j);
                }
            }
        }
    }
    out.K_nn = from_triplets(nb, nb, tk_nn);
    out.M_nn = from_triplets(nb, nb, tm_nn);
    out.K_npsi = from_triplets(nb, nr, tk_np);
    out.M_npsi = from_triplets(nb, nr, tm_np);
    if (data.u) out.exact_integral = u_integral;
    return out;
}

AssembledSystem rebase(const RawSystem& raw, const enrich::EnrichedSpace& enr) {
    const auto& t = enr.transform();
    const auto nb = raw.K_nn.rows();
    const auto nf = t.C.cols();
    if (t.C.rows() != raw.K_psipsi.rows()) throw InvalidArgument("rebase: raw system and enrichment differ");
    AssembledSystem s;
    s.n_orig = static_cast<int>(nb);
    s.n_enr = static_cast<int>(nf);
    s.K_oo = raw.K_nn;
    s.F_o = raw.F_n;
    s.constraint = raw.basis_integrals;
    s.target = raw.exact_integral.value_or(0.0);

    Eigen::MatrixXd koe = raw.K_npsi * t.C;
    Eigen::MatrixXd kee = t.C.transpose() * raw.K_psipsi * t.C;
    s.F_e = t.C.transpose() * raw.F_psi;
    if (!t.rows.empty()) {
        const auto nr = static_cast<Eigen::Index>(t.rows.size());
        std::vector<int> pos(static_cast<std::size_t>(nb), -1);
        for (Eigen::Index i = 0; i < nr; ++i) pos[static_cast<std::size_t>(t.rows[static_cast<std::size_t>(i)])] = static_cast<int>(i);
        // K_nn restricted to columns in `rows`, and the rows x rows block.
        std::vector<la::Triplet> trip;
        Eigen::MatrixXd k_rr = Eigen::MatrixXd::Zero(nr, nr);
        for (Eigen::Index i = 0; i < nr; ++i) {
            const int c = t.rows[static_cast<std::size_t>(i)];
            for (la::SpMat::InnerIterator it(raw.K_nn, c); it; ++it) {
                trip.emplace_back(it.row(), static_cast<int>(i), it.value());
                if (const int p = pos[static_cast<std::size_t>(it.row())]; p >= 0) k_rr(p, i) = it.value();
            }
        }
        const la::SpMat k_ncol = from_triplets(nb, nr, trip);
        Eigen::MatrixXd k_rpsi = Eigen::MatrixXd::Zero(nr, raw.K_npsi.cols());
        for (int c = 0; c < raw.K_npsi.outerSize(); ++c)
            for (la::SpMat::InnerIterator it(raw.K_npsi, c); it; ++it)
                if (const int p = pos[static_cast<std::size_t>(it.row())]; p >= 0) k_rpsi(p, c) = it.value();
        koe += k_ncol * t.E;
        const Eigen::MatrixXd cross = t.E.transpose() * (k_rpsi * t.C);
        kee += cross + cross.transpose() + t.E.transpose() * k_rr * t.E;
        Eigen::VectorXd f_r(nr);
        for (Eigen::Index i = 0; i < nr; ++i) f_r(i) = raw.F_n(t.rows[static_cast<std::size_t>(i)]);
        s.F_e += t.E.transpose() * f_r;
    }
    s.K_oe = koe.sparseView();
    s.K_oe.makeCompressed();
    s.K_ee = 0.5 * (kee + kee.transpose());
    return s;
}

AssembledSystem assemble(const enrich::EnrichedSpace& enr, const geom::MeshClassification& cls,
                         const QuadratureCache& cache, const ProblemData& data) {
    return rebase(assemble_raw(enr, cls, cache, data), enr);
}

// ---------------------------------------------------------------------------

ScaledSystem scale_system(const AssembledSystem& sys) {
    ScaledSystem s;
    s.n_orig = sys.n_orig;
    s.n_enr = sys.n_enr;
    const la::SpMat k = sys.matrix();
    const Eigen::VectorXd diag = k.diagonal();
    s.D.resize(diag.size());
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0)) {
            std::ostringstream os;
            os << "scale_system: nonpositive diagonal " << diag(i) << " at DOF " << i
               << (i < sys.n_orig ? " (B-spline)" : " (enrichment)");
            throw SingularMatrixError(os.str(), i, diag(i));
        }
        s.D(i) = 1.0 / std::sqrt(diag(i));
    }
    s.K = s.D.asDiagonal() * k * s.D.asDiagonal();
    s.K.makeCompressed();
    s.F = s.D.cwiseProduct(sys.rhs());
    s.constraint = Eigen::VectorXd::Zero(sys.size());
    s.constraint.head(sys.n_orig) = sys.constraint.cwiseProduct(s.D.head(sys.n_orig));
    s.target = sys.target;
    return s;
}

Solution solve(const ScaledSystem& sys) {
    const auto r = la::solve_constrained(sys.K, sys.F, sys.constraint, sys.target);
    if (!(r.residual <= 1e-6)) {
        std::ostringstream os;
        os << "solve: relative residual " << r.residual << " exceeds 1e-6";
        throw SingularMatrixError(os.str(), -1, r.residual);
    }
    const Eigen::VectorXd u = sys.D.cwiseProduct(r.x);
    Solution s;
    s.orig = u.head(sys.n_orig);
    s.enr = u.tail(sys.n_enr);
    s.residual = r.residual;
    s.multiplier = r.multiplier;
    return s;
}

RawCoefficients to_raw(const enrich::EnrichedSpace& enr, const Solution& sol) {
    const auto& t = enr.transform();
    RawCoefficients c;
    c.bspline = sol.orig;
    c.raw = t.C * sol.enr;
    if (!t.rows.empty()) {
        const Eigen::VectorXd e = t.E * sol.enr;
        for (std::size_t i = 0; i < t.rows.size(); ++i) c.bspline(t.rows[i]) += e(static_cast<Eigen::Index>(i));
    }
    return c;
}

FieldValue eval_solution(const enrich::EnrichedSpace& enr, const RawCoefficients& c,
                         const spline::GeometryMap& geometry, int e, const Vec2& p, Side side) {
    const auto tb = enr.space().eval(e, p);
    FieldValue out;
    Vec2 gp = Vec2::Zero();
    for (int r = 0; r < 9; ++r) {
        const double v = c.bspline(tb.index[r]);
        out.value += v * tb.value[r];
        gp += v * Vec2(tb.ds[r], tb.dt[r]);
    }
    const auto& act = enr.active(e);
    if (!act.empty()) {
        enrich::RawValues raw;
        enr.eval_raw(e, p, side, tb, raw);
        for (std::size_t i = 0; i < act.size(); ++i) {
            const double v = c.raw(act[i]);
            out.value += v * raw.value[i];
            gp += v * raw.grad[i];
        }
    }
    const auto ev = geometry.eval(p);
    out.grad = ev.jacobian.inverse().transpose() * gp;
    return out;
}

ErrorNorms error_norms(const enrich::EnrichedSpace& enr, const geom::MeshClassification& cls,
                       const QuadratureCache& cache, const ProblemData& data, const Solution& sol) {
    if (!data.u || !data.grad_u) throw InvalidArgument("error_norms: exact solution is required");
    const auto c = to_raw(enr, sol);
    const auto& space = enr.space();
    double area = 0.0, e1 = 0.0, e2 = 0.0, g2 = 0.0;
    std::vector<quad::WeightedPoint> pts;
    std::vector<Side> sides;
    for (int e = 0; e < space.num_elements(); ++e) {
        cache.element_points(space, cls, e, cache.options().error_gauss, pts, sides);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const Vec2& p = pts[q].p;
            const auto ev = data.geometry.eval(p);
            const double w = pts[q].w * std::abs(ev.det);
            const FieldValue uh = eval_solution(enr, c, data.geometry, e, p, sides[q]);
            const double d = data.u(sides[q], {p, ev.x}) - uh.value;
            const Vec2 dg = data.grad_u(sides[q], {p, ev.x}) - uh.grad;
            area += w;
            e1 += w * d;
            e2 += w * d * d;
            g2 += w * dg.squaredNorm();
        }
    }
    ErrorNorms n;
    n.mean_shift = e1 / area;
    n.l2 = std::sqrt(std::max(e2 - e1 * e1 / area, 0.0));
    n.h1 = std::sqrt(g2);
    return n;
}

}  // namespace sgiga::fem
