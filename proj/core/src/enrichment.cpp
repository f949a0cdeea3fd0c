#include "sgiga/enrichment.hpp"

#include <algorithm>
#include <cmath>

namespace sgiga::enrich {

namespace {

constexpr std::array<Method, 7> kMethods{Method::IGA,        Method::GIGA,     Method::SGIGA,
                                         Method::CorrectedGIGA, Method::SGIGAMulti, Method::GIGAStar,
                                         Method::SGIGA2};

int local_index(const std::array<int, 9>& basis, int k) {
    for (int r = 0; r < 9; ++r)
        if (basis[static_cast<std::size_t>(r)] == k) return r;
    return -1;
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::IGA: return "iga";
        case Method::GIGA: return "giga";
        case Method::SGIGA: return "sgiga";
        case Method::CorrectedGIGA: return "cor-giga";
        case Method::SGIGAMulti: return "sgiga-multi";
        case Method::GIGAStar: return "giga-star";
        case Method::SGIGA2: return "sgiga2";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view name) {
    for (Method m : kMethods)
        if (method_name(m) == name) return m;
    return std::nullopt;
}

const std::array<Method, 7>& all_methods() { return kMethods; }

MethodVariant MethodVariant::defaults(Method m) {
    MethodVariant v;
    v.method = m;
    v.projection = v.orthogonalize = m == Method::SGIGA2;
    return v;
}

// ---------------------------------------------------------------------------

EnrichedSpace::EnrichedSpace(MethodVariant variant, spline::SplineSpace2D space,
                             std::shared_ptr<const geom::ImplicitInterface> iface)
    : variant_(variant), space_(std::move(space)), iface_(std::move(iface)) {
    if (!iface_) throw InvalidArgument("EnrichedSpace: null interface");
    mu_.assign(static_cast<std::size_t>(space_.num_basis()), 0);
    ramp_.assign(static_cast<std::size_t>(space_.num_basis()), 0);
}

void EnrichedSpace::finalize_active() {
    const int ne = space_.num_elements();
    entries_.assign(static_cast<std::size_t>(ne), {});
    active_.assign(static_cast<std::size_t>(ne), {});
    auto add = [&](int e, int l, int k, double w) {
        auto& list = entries_[static_cast<std::size_t>(e)];
        if (list.empty() || list.back().function != l) list.push_back({l, {}});
        const int r = local_index(space_.element_basis(e), k);
        list.back().weights[static_cast<std::size_t>(r)] += w;
    };
    // Window coefficients over B-splines, per function.
    std::vector<std::vector<std::pair<int, double>>> theta_cache(static_cast<std::size_t>(ne));
    for (int l = 0; l < num_raw(); ++l) {
        const Function& f = functions_[static_cast<std::size_t>(l)];
        std::vector<std::pair<int, double>> coeffs;
        if (f.window == WindowKind::BSpline) {
            coeffs = {{f.index, 1.0}};
        } else {
            auto& cached = theta_cache[static_cast<std::size_t>(f.index)];
            if (cached.empty()) {
                cached.reserve(9);
                for (int k : space_.element_basis(f.index)) {
                    cached.emplace_back(k, 1.0 / mu_[static_cast<std::size_t>(k)]);
                }
            }
            coeffs = cached;
        }
        // Elements in the window support, in increasing order so that each
        // element sees function l in one contiguous entry.
        std::vector<std::pair<int, std::pair<int, double>>> hits;
        for (const auto& [k, w] : coeffs) {
            const auto r = space_.basis_support(k);
            for (int ej = r[2]; ej <= r[3]; ++ej)
                for (int ei = r[0]; ei <= r[1]; ++ei) hits.push_back({space_.element_index(ei, ej), {k, w}});
        }
        std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [e, kw] : hits) add(e, l, kw.first, kw.second);
    }
    for (int e = 0; e < ne; ++e)
        for (const auto& entry : entries_[static_cast<std::size_t>(e)]) active_[static_cast<std::size_t>(e)].push_back(entry.function);
    transform_.C = Eigen::MatrixXd::Identity(num_raw(), num_raw());
    transform_.rows.clear();
    transform_.E.resize(0, num_raw());
}

void EnrichedSpace::eval_raw(int e, const Vec2& p, Side side, const spline::TensorBasis& tb,
                             RawValues& out) const {
    const auto& entries = entries_[static_cast<std::size_t>(e)];
    out.value.resize(entries.size());
    out.grad.resize(entries.size());
    if (entries.empty()) return;

    const double sd = iface_->signed_distance(p);
    const Vec2 gsd = iface_->signed_distance_grad(p);
    const bool pos = side == Side::Positive;

    std::array<double, 8> gv{};
    std::array<Vec2, 8> gg{};
    for (std::size_t g = 0; g < generators_.size(); ++g) {
        const Generator& gen = generators_[g];
        double d = 0.0;
        Vec2 dd = Vec2::Zero();
        if (gen.distance == DistanceKind::Unsigned) {
            d = pos ? sd : -sd;
            dd = pos ? gsd : Vec2(-gsd);
        } else if (pos) {
            d = sd;
            dd = gsd;
        }
        double m = 1.0;
        Vec2 dm = Vec2::Zero();
        switch (gen.monomial) {
            case Monomial::One: break;
            case Monomial::S: m = p.x(); dm = {1.0, 0.0}; break;
            case Monomial::T: m = p.y(); dm = {0.0, 1.0}; break;
            case Monomial::Ramp:
                m = 0.0;
                for (int r = 0; r < 9; ++r) {
                    if (!ramp_[static_cast<std::size_t>(tb.index[r])]) continue;
                    m += tb.value[r];
                    dm += Vec2(tb.ds[r], tb.dt[r]);
                }
                break;
        }
        double v = m * d;
        Vec2 dv = dm * d + m * dd;
        if (!gen.coefficients.empty()) {
            for (int r = 0; r < 9; ++r) {
                const double c = gen.coefficients[static_cast<std::size_t>(tb.index[r])];
                v -= c * tb.value[r];
                dv -= c * Vec2(tb.ds[r], tb.dt[r]);
            }
        }
        gv[g] = v;
        gg[g] = dv;
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& en = entries[i];
        double w = 0.0;
        Vec2 dw = Vec2::Zero();
        for (int r = 0; r < 9; ++r) {
            const double c = en.weights[static_cast<std::size_t>(r)];
            if (c == 0.0) continue;
            w += c * tb.value[r];
            dw += c * Vec2(tb.ds[r], tb.dt[r]);
        }
        const auto g = static_cast<std::size_t>(functions_[static_cast<std::size_t>(en.function)].generator);
        out.value[i] = w * gv[g];
        out.grad[i] = dw * gv[g] + w * gg[g];
    }
}

double EnrichedSpace::window_value(int l, const Vec2& p) const {
    const int e = space_.locate_element(p);
    const auto tb = space_.eval(e, p);
    for (const auto& en : entries_[static_cast<std::size_t>(e)]) {
        if (en.function != l) continue;
        double w = 0.0;
        for (int r = 0; r < 9; ++r) w += en.weights[static_cast<std::size_t>(r)] * tb.value[r];
        return w;
    }
    return 0.0;
}

double EnrichedSpace::theta(int j, const Vec2& p) const {
    const int e = space_.locate_element(p);
    const auto tb = space_.eval(e, p);
    double v = 0.0;
    for (int k : space_.element_basis(j)) {
        const int mu = mu_[static_cast<std::size_t>(k)];
        if (mu == 0) continue;
        const int r = local_index(space_.element_basis(e), k);
        if (r >= 0) v += tb.value[r] / mu;
    }
    return v;
}

void EnrichedSpace::eval_current(int e, const Vec2& p, Side side, Eigen::VectorXd& value,
                                 Eigen::MatrixX2d& grad) const {
    const auto tb = space_.eval(e, p);
    RawValues raw;
    eval_raw(e, p, side, tb, raw);
    const auto n = transform_.C.cols();
    value.setZero(n);
    grad.setZero(n, 2);
    const auto& act = active(e);
    for (std::size_t i = 0; i < act.size(); ++i) {
        const auto row = transform_.C.row(act[i]);
        value += raw.value[i] * row.transpose();
        grad.col(0) += raw.grad[i].x() * row.transpose();
        grad.col(1) += raw.grad[i].y() * row.transpose();
    }
    for (std::size_t r = 0; r < transform_.rows.size(); ++r) {
        const int li = local_index(space_.element_basis(e), transform_.rows[r]);
        if (li < 0) continue;
        const auto row = transform_.E.row(static_cast<Eigen::Index>(r));
        value += tb.value[li] * row.transpose();
        grad.col(0) += tb.ds[li] * row.transpose();
        grad.col(1) += tb.dt[li] * row.transpose();
    }
}

void EnrichedSpace::set_transform(Transform t) {
    if (t.C.rows() != num_raw() || t.E.cols() != t.C.cols() ||
        t.E.rows() != static_cast<Eigen::Index>(t.rows.size())) {
        throw InvalidArgument("EnrichedSpace::set_transform: inconsistent dimensions");
    }
    transform_ = std::move(t);
}

void EnrichedSpace::drop(const std::vector<int>& current_indices, const std::string& reason) {
    if (current_indices.empty()) return;
    std::vector<char> gone(static_cast<std::size_t>(num_functions()), 0);
    for (int k : current_indices) {
        if (k < 0 || k >= num_functions()) throw DomainError("EnrichedSpace::drop: index out of range");
        gone[static_cast<std::size_t>(k)] = 1;
    }
    std::vector<Eigen::Index> keep;
    for (int k = 0; k < num_functions(); ++k)
        if (!gone[static_cast<std::size_t>(k)]) keep.push_back(k);
    Transform t;
    t.C = transform_.C(Eigen::all, keep);
    t.rows = transform_.rows;
    t.E = transform_.E(Eigen::all, keep);
    const int n = num_functions() - static_cast<int>(keep.size());
    transform_ = std::move(t);
    dropped_ += n;
    notes_.push_back("dropped " + std::to_string(n) + " enrichment function(s): " + reason);
}

std::vector<int> EnrichedSpace::projection_subspace() const {
    std::vector<char> mark(static_cast<std::size_t>(space_.num_elements()), 0);
    for (int e : enriched_) mark[static_cast<std::size_t>(e)] = 1;
    std::vector<int> out;
    for (int k = 0; k < space_.num_basis(); ++k) {
        const auto r = space_.basis_support(k);
        bool hit = false;
        for (int ej = r[2]; ej <= r[3] && !hit; ++ej)
            for (int ei = r[0]; ei <= r[1] && !hit; ++ei) hit = mark[static_cast<std::size_t>(space_.element_index(ei, ej))];
        if (hit) out.push_back(k);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<int> mu_counts(const geom::MeshClassification& cls, const spline::SplineSpace2D& space) {
    std::vector<int> mu(static_cast<std::size_t>(space.num_basis()), 0);
    for (int k = 0; k < space.num_basis(); ++k) {
        const auto r = space.basis_support(k);
        int c = 0;
        for (int ej = r[2]; ej <= r[3]; ++ej)
            for (int ei = r[0]; ei <= r[1]; ++ei) c += cls.in_J_plus(space.element_index(ei, ej), 1);
        mu[static_cast<std::size_t>(k)] = c;
    }
    return mu;
}

std::vector<std::pair<int, double>> theta_coefficients(const geom::MeshClassification& cls,
                                                       const spline::SplineSpace2D& space,
                                                       const std::vector<int>& mu, int j) {
    if (!cls.in_J_plus(j, 1)) throw DomainError("theta: element is not enriched");
    std::vector<std::pair<int, double>> out;
    for (int k : space.element_basis(j)) {
        const int m = mu[static_cast<std::size_t>(k)];
        if (m <= 0) throw DomainError("theta: covering basis with zero count");
        out.emplace_back(k, 1.0 / m);
    }
    return out;
}

EnrichedSpace build_enrichment(const MethodVariant& variant, const spline::SplineSpace2D& space,
                               std::shared_ptr<const geom::ImplicitInterface> iface,
                               const geom::MeshClassification& cls) {
    if (cls.num_elements_s() != space.num_elements_s() || cls.num_elements_t() != space.num_elements_t()) {
        throw InvalidArgument("build_enrichment: classification grid does not match the space");
    }
    EnrichedSpace enr(variant, space, iface);
    const Method m = variant.method;
    if (m == Method::IGA) {
        enr.finalize_active();
        return enr;
    }
    if (cls.num_cut() == 0) {
        enr.add_note("no element meets the interface; enrichment is empty");
        enr.finalize_active();
        return enr;
    }
    const geom::ImplicitInterface& g = *iface;
    const bool theta_windows = m == Method::GIGAStar || m == Method::SGIGA2;
    const bool multi = m == Method::SGIGAMulti || m == Method::SGIGA2;

    std::vector<Monomial> monomials{Monomial::One};
    if (multi) monomials = {Monomial::One, Monomial::S, Monomial::T};
    for (Monomial mono : monomials) {
        Generator gen;
        gen.monomial = mono;
        if (m == Method::CorrectedGIGA) gen.monomial = Monomial::Ramp;
        auto factor = [mono](const Vec2& p) {
            return mono == Monomial::S ? p.x() : mono == Monomial::T ? p.y() : 1.0;
        };
        if (theta_windows) {
            gen.distance = DistanceKind::OneSided;
            gen.subtraction = Subtraction::Modified;
            qi::ExtensionPair ext{[&g, factor](const Vec2& p) { return factor(p) * g.signed_distance(p); },
                                  [](const Vec2&) { return 0.0; }};
            gen.coefficients = qi::qi_modified_2d(ext, cls, space).mu;
        } else if (m == Method::SGIGA || m == Method::SGIGAMulti) {
            gen.subtraction = Subtraction::Plain;
            gen.coefficients =
                qi::qi_2d([&g, factor](const Vec2& p) { return factor(p) * g.distance(p); }, space).mu;
        }
        enr.generators_.push_back(std::move(gen));
    }
    const int ng = static_cast<int>(enr.generators_.size());

    if (theta_windows) {
        enr.enriched_ = cls.J_plus(1);
        enr.mu_ = mu_counts(cls, space);
        for (int j : enr.enriched_)
            for (int gi = 0; gi < ng; ++gi) enr.functions_.push_back({WindowKind::Theta, j, gi});
    } else {
        enr.enriched_ = cls.J(1);
        for (int k = 0; k < space.num_basis(); ++k) {
            if (!cls.in_J(space.anchor_element(k), 1)) continue;
            for (int gi = 0; gi < ng; ++gi) enr.functions_.push_back({WindowKind::BSpline, k, gi});
        }
        if (m == Method::CorrectedGIGA) {
            for (int k = 0; k < space.num_basis(); ++k) {
                const auto r = space.basis_support(k);
                for (int ej = r[2]; ej <= r[3]; ++ej)
                    for (int ei = r[0]; ei <= r[1]; ++ei)
                        if (cls.is_cut(space.element_index(ei, ej))) enr.ramp_[static_cast<std::size_t>(k)] = 1;
            }
        }
    }
    enr.finalize_active();
    return enr;
}

// ---------------------------------------------------------------------------

void apply_projection_T(EnrichedSpace& enr, const la::SpMat& mass_nn, const la::SpMat& mass_npsi) {
    const int nb = enr.space().num_basis();
    if (mass_nn.rows() != nb || mass_nn.cols() != nb || mass_npsi.rows() != nb ||
        mass_npsi.cols() != enr.num_raw()) {
        throw InvalidArgument("apply_projection_T: mass matrix dimensions do not match the space");
    }
    const auto v = enr.projection_subspace();
    if (v.empty() || enr.num_functions() == 0) return;
    std::vector<int> pos(static_cast<std::size_t>(nb), -1);
    for (std::size_t i = 0; i < v.size(); ++i) pos[static_cast<std::size_t>(v[i])] = static_cast<int>(i);
    const auto nv = static_cast<Eigen::Index>(v.size());
    const Transform& t = enr.transform();

    Eigen::MatrixXd mv_psi = Eigen::MatrixXd::Zero(nv, enr.num_raw());
    for (int c = 0; c < mass_npsi.outerSize(); ++c)
        for (la::SpMat::InnerIterator it(mass_npsi, c); it; ++it)
            if (const int p = pos[static_cast<std::size_t>(it.row())]; p >= 0) mv_psi(p, c) = it.value();

    std::vector<int> rows = t.rows;
    rows.insert(rows.end(), v.begin(), v.end());
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::vector<int> rpos(static_cast<std::size_t>(nb), -1);
    for (std::size_t i = 0; i < rows.size(); ++i) rpos[static_cast<std::size_t>(rows[i])] = static_cast<int>(i);

    // Mass matrix between the subspace and every row of the new E.
    Eigen::MatrixXd mvv = Eigen::MatrixXd::Zero(nv, nv);
    Eigen::MatrixXd mv_rows = Eigen::MatrixXd::Zero(nv, static_cast<Eigen::Index>(rows.size()));
    for (int c = 0; c < mass_nn.outerSize(); ++c) {
        for (la::SpMat::InnerIterator it(mass_nn, c); it; ++it) {
            const int p = pos[static_cast<std::size_t>(it.row())];
            if (p < 0) continue;
            if (const int q = pos[static_cast<std::size_t>(c)]; q >= 0) mvv(p, q) = it.value();
            if (const int q = rpos[static_cast<std::size_t>(c)]; q >= 0) mv_rows(p, q) = it.value();
        }
    }
    Eigen::MatrixXd e_old = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), enr.num_functions());
    for (std::size_t r = 0; r < t.rows.size(); ++r) e_old.row(rpos[static_cast<std::size_t>(t.rows[r])]) = t.E.row(static_cast<Eigen::Index>(r));

    const Eigen::MatrixXd gram = mv_psi * t.C + mv_rows * e_old;
    Eigen::LLT<Eigen::MatrixXd> llt(mvv);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("apply_projection_T: subspace mass matrix is not positive definite", -1, 0.0);
    }
    const Eigen::MatrixXd proj = llt.solve(gram);

    Transform next;
    next.C = t.C;
    next.rows = rows;
    next.E = e_old;
    for (Eigen::Index i = 0; i < nv; ++i) next.E.row(rpos[static_cast<std::size_t>(v[static_cast<std::size_t>(i)])]) -= proj.row(i);
    enr.set_transform(std::move(next));
    enr.add_note("L2 projection onto " + std::to_string(v.size()) + " B-splines removed");
}

OrthogonalizeReport orthogonalize_ldl(EnrichedSpace& enr, const Eigen::MatrixXd& k_ee,
                                      const la::LdltOptions& options) {
    const int n = enr.num_functions();
    if (k_ee.rows() != n || k_ee.cols() != n) {
        throw InvalidArgument("orthogonalize_ldl: K_EE does not match the enrichment basis");
    }
    OrthogonalizeReport rep;
    if (n == 0) return rep;
    const la::LdltResult f = la::ldlt(k_ee, options);
    const Transform& t = enr.transform();
    std::vector<Eigen::Index> kept(f.kept.begin(), f.kept.end());
    const auto lower = f.L.triangularView<Eigen::UnitLower>();
    Transform next;
    // Columns transform as X L^{-T}, i.e. (L^{-1} X^T)^T.
    next.C = lower.solve(Eigen::MatrixXd(t.C(Eigen::all, kept).transpose())).transpose();
    next.rows = t.rows;
    next.E = lower.solve(Eigen::MatrixXd(t.E(Eigen::all, kept).transpose())).transpose();
    enr.set_transform(std::move(next));
    rep.pivots = f.D;
    rep.dropped = f.dropped;
    if (!f.dropped.empty()) {
        enr.dropped_ += static_cast<int>(f.dropped.size());
        enr.add_note("LDL^T dropped " + std::to_string(f.dropped.size()) +
                     " numerically dependent enrichment function(s)");
    }
    return rep;
}

}  // namespace sgiga::enrich
