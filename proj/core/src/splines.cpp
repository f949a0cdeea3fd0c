#include "sgiga/splines.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgiga::spline {

namespace {

// Points this close (relative to the knot range) outside [front, back] are
// clamped; anything further is a domain error.
constexpr double kDomainSlack = 1e-12;

}  // namespace

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
    if (degree_ < 1 || degree_ > kMaxDegree) {
        throw InvalidArgument("KnotVector: degree must be in [1, " + std::to_string(kMaxDegree) +
                              "]");
    }
    const auto n = static_cast<int>(knots_.size());
    if (n < 2 * (degree_ + 1)) {
        throw InvalidArgument("KnotVector: need at least 2(d+1) knots");
    }
    for (int i = 1; i < n; ++i) {
        if (!(knots_[i] >= knots_[i - 1])) {
            throw InvalidArgument("KnotVector: knots must be non-decreasing");
        }
    }
    for (int i = 1; i <= degree_; ++i) {
        if (knots_[i] != knots_[0] || knots_[n - 1 - i] != knots_[n - 1]) {
            throw InvalidArgument("KnotVector: first and last d+1 knots must coincide");
        }
    }
    // Interior multiplicity above d would split the space into pieces.
    int run = 1;
    for (int i = 1; i < n; ++i) {
        run = knots_[i] == knots_[i - 1] ? run + 1 : 1;
        if (run > degree_ + 1 || (run > degree_ && i < n - 1 && knots_[i] != knots_.back() &&
                                  knots_[i] != knots_.front())) {
            throw InvalidArgument("KnotVector: interior knot multiplicity exceeds degree");
        }
    }
    span_to_element_.assign(static_cast<std::size_t>(n - 1), -1);
    for (int mu = 0; mu + 1 < n; ++mu) {
        if (knots_[mu + 1] > knots_[mu]) {
            span_to_element_[mu] = static_cast<int>(element_spans_.size());
            element_spans_.push_back(mu);
        }
    }
    if (element_spans_.empty()) {
        throw InvalidArgument("KnotVector: no span of positive length");
    }
}

KnotVector KnotVector::open_uniform(double a, double b, int n_elements, int degree) {
    if (n_elements < 1) {
        throw InvalidArgument("open_uniform: n_elements must be positive");
    }
    if (!(a < b)) {
        throw InvalidArgument("open_uniform: need a < b");
    }
    std::vector<double> k;
    k.reserve(static_cast<std::size_t>(n_elements + 2 * degree + 1));
    for (int i = 0; i < degree; ++i) k.push_back(a);
    for (int i = 0; i <= n_elements; ++i) {
        // Hit both ends exactly.
        k.push_back(i == n_elements ? b : a + (b - a) * i / n_elements);
    }
    for (int i = 0; i < degree; ++i) k.push_back(b);
    return KnotVector(std::move(k), degree);
}

int KnotVector::find_span(double s) const {
    const double lo = front();
    const double hi = back();
    const double slack = kDomainSlack * (hi - lo);
    if (!(s >= lo - slack && s <= hi + slack)) {
        std::ostringstream os;
        os << "find_span: s = " << s << " outside [" << lo << ", " << hi << "]";
        throw DomainError(os.str());
    }
    if (s >= hi) return element_spans_.back();
    if (s <= lo) return element_spans_.front();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
    return static_cast<int>(it - knots_.begin()) - 1;
}

int KnotVector::find_element(double s) const { return element_of_span(find_span(s)); }

int KnotVector::element_of_span(int span) const {
    if (span < 0 || span >= static_cast<int>(span_to_element_.size())) return -1;
    return span_to_element_[span];
}

std::array<int, 2> KnotVector::support_elements(int j) const {
    if (j < 0 || j >= num_basis()) throw DomainError("support_elements: basis index out of range");
    int first = -1;
    int last = -1;
    for (int mu = j; mu <= j + degree_; ++mu) {
        const int e = element_of_span(mu);
        if (e < 0) continue;
        if (first < 0) first = e;
        last = e;
    }
    return {first, last};
}

int KnotVector::anchor_element(int j) const {
    if (j < 0 || j >= num_basis()) throw DomainError("anchor_element: basis index out of range");
    const int mid = j + degree_ / 2 + (degree_ % 2);
    if (const int e = element_of_span(mid); e >= 0) return e;
    // Prefer the side facing the middle of the knot vector.
    const bool towards_higher = 2 * mid < size() - 1;
    for (int dist = 1; dist <= degree_; ++dist) {
        for (int dir : {towards_higher ? 1 : -1, towards_higher ? -1 : 1}) {
            const int mu = mid + dir * dist;
            if (mu < j || mu > j + degree_) continue;
            if (const int e = element_of_span(mu); e >= 0) return e;
        }
    }
    // Unreachable for valid knot vectors: every support holds a nonempty span.
    throw DomainError("anchor_element: empty support");
}

BasisDerivs eval_basis_derivs_in_span(const KnotVector& kv, int span, double s, int max_deriv) {
    const int p = kv.degree();
    const int nd = std::min(max_deriv, 2);
    BasisDerivs out;
    out.span = span;
    out.first = span - p;
    out.count = p + 1;

    // Triangular table of basis values and knot differences.
    std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> ndu{};
    std::array<double, kMaxDegree + 1> left{};
    std::array<double, kMaxDegree + 1> right{};
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = s - kv[span + 1 - j];
        right[j] = kv[span + j] - s;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) out.ders[0][j] = ndu[j][p];

    std::array<std::array<double, kMaxDegree + 1>, 2> a{};
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            out.ders[k][r] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= nd; ++k) {
        for (int j = 0; j <= p; ++j) out.ders[k][j] *= factor;
        factor *= (p - k);
    }
    return out;
}

BasisDerivs eval_basis_derivs(const KnotVector& kv, double s, int max_deriv) {
    const int span = kv.find_span(s);
    const double clamped = std::clamp(s, kv.front(), kv.back());
    return eval_basis_derivs_in_span(kv, span, clamped, max_deriv);
}

double basis_value(const KnotVector& kv, int j, double s) {
    if (s < kv[j] || s > kv[j + kv.degree() + 1]) return 0.0;
    const auto b = eval_basis_derivs(kv, s, 0);
    const int r = j - b.first;
    if (r < 0 || r >= b.count) return 0.0;
    return b.ders[0][r];
}

std::array<double, 3> tau_points(const KnotVector& kv, int j) {
    if (kv.degree() != 2) throw InvalidArgument("tau_points: quadratic knot vector required");
    if (j < 0 || j >= kv.num_basis()) throw DomainError("tau_points: basis index out of range");
    return {0.5 * (kv[j] + kv[j + 1]), 0.5 * (kv[j + 1] + kv[j + 2]),
            0.5 * (kv[j + 2] + kv[j + 3])};
}

double eval_spline_1d(const KnotVector& kv, std::span<const double> coeffs, double s) {
    if (static_cast<int>(coeffs.size()) != kv.num_basis()) {
        throw InvalidArgument("eval_spline_1d: coefficient count mismatch");
    }
    const auto b = eval_basis_derivs(kv, s, 0);
    double v = 0.0;
    for (int r = 0; r < b.count; ++r) v += coeffs[static_cast<std::size_t>(b.first + r)] * b.ders[0][r];
    return v;
}

// ---------------------------------------------------------------------------

SplineSpace2D::SplineSpace2D(KnotVector s, KnotVector t) : s_(std::move(s)), t_(std::move(t)) {
    if (s_.degree() != 2 || t_.degree() != 2) {
        throw InvalidArgument("SplineSpace2D: only biquadratic spaces are supported");
    }
}

SplineSpace2D SplineSpace2D::uniform(const Box& domain, int n_s, int n_t) {
    return {KnotVector::open_uniform(domain.lo.x(), domain.hi.x(), n_s, 2),
            KnotVector::open_uniform(domain.lo.y(), domain.hi.y(), n_t, 2)};
}

Box SplineSpace2D::domain() const { return {{s_.front(), t_.front()}, {s_.back(), t_.back()}}; }

Box SplineSpace2D::element_box(int e) const {
    const auto [ei, ej] = element_ij(e);
    return {{s_.element_lo(ei), t_.element_lo(ej)}, {s_.element_hi(ei), t_.element_hi(ej)}};
}

int SplineSpace2D::locate_element(const Vec2& p) const {
    return element_index(s_.find_element(p.x()), t_.find_element(p.y()));
}

std::array<int, 9> SplineSpace2D::element_basis(int e) const {
    const auto [ei, ej] = element_ij(e);
    const int fs = s_.element_spans()[ei] - 2;
    const int ft = t_.element_spans()[ej] - 2;
    std::array<int, 9> out{};
    for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) out[b * 3 + a] = basis_index(fs + a, ft + b);
    return out;
}

std::array<int, 4> SplineSpace2D::basis_support(int k) const {
    const auto [i, j] = basis_ij(k);
    const auto rs = s_.support_elements(i);
    const auto rt = t_.support_elements(j);
    return {rs[0], rs[1], rt[0], rt[1]};
}

bool SplineSpace2D::support_contains(int k, int e) const {
    const auto r = basis_support(k);
    const auto [ei, ej] = element_ij(e);
    return ei >= r[0] && ei <= r[1] && ej >= r[2] && ej <= r[3];
}

int SplineSpace2D::anchor_element(int k) const {
    const auto [i, j] = basis_ij(k);
    return element_index(s_.anchor_element(i), t_.anchor_element(j));
}

TensorBasis SplineSpace2D::eval(int element, const Vec2& p) const {
    const auto [ei, ej] = element_ij(element);
    const auto bs = eval_basis_derivs_in_span(s_, s_.element_spans()[ei], p.x(), 1);
    const auto bt = eval_basis_derivs_in_span(t_, t_.element_spans()[ej], p.y(), 1);
    TensorBasis out;
    out.first_s = bs.first;
    out.first_t = bt.first;
    for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) {
            const int r = b * 3 + a;
            out.index[r] = basis_index(bs.first + a, bt.first + b);
            out.value[r] = bs.ders[0][a] * bt.ders[0][b];
            out.ds[r] = bs.ders[1][a] * bt.ders[0][b];
            out.dt[r] = bs.ders[0][a] * bt.ders[1][b];
        }
    }
    return out;
}

double SplineSpace2D::eval_field(std::span<const double> coeffs, const Vec2& p) const {
    if (static_cast<int>(coeffs.size()) != num_basis()) {
        throw InvalidArgument("eval_field: coefficient count mismatch");
    }
    const auto b = eval(p);
    double v = 0.0;
    for (int r = 0; r < 9; ++r) v += coeffs[static_cast<std::size_t>(b.index[r])] * b.value[r];
    return v;
}

// ---------------------------------------------------------------------------

GeometryMap GeometryMap::identity() { return GeometryMap(Kind::Identity); }

GeometryMap GeometryMap::polar() { return GeometryMap(Kind::Polar); }

GeometryMap GeometryMap::nurbs(SplineSpace2D space, std::vector<Vec2> control_points,
                               std::vector<double> weights) {
    const auto n = static_cast<std::size_t>(space.num_basis());
    if (control_points.size() != n || weights.size() != n) {
        throw InvalidArgument("GeometryMap::nurbs: control net size mismatch");
    }
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidArgument("GeometryMap::nurbs: weights must be nonnegative");
    }
    GeometryMap g(Kind::Nurbs);
    g.space_.emplace(std::move(space));
    g.control_ = std::move(control_points);
    g.weights_ = std::move(weights);
    return g;
}

GeometryMap::Eval GeometryMap::eval(double s, double t) const {
    Eval out;
    switch (kind_) {
        case Kind::Identity:
            out.x = {s, t};
            out.jacobian.setIdentity();
            out.det = 1.0;
            break;
        case Kind::Polar: {
            const double c = std::cos(t);
            const double sn = std::sin(t);
            out.x = {s * c, s * sn};
            out.jacobian << c, -s * sn, sn, s * c;
            out.det = s;
            break;
        }
        case Kind::Nurbs: {
            const auto b = space_->eval({s, t});
            double w = 0.0;
            double ws = 0.0;
            double wt = 0.0;
            Vec2 num = Vec2::Zero();
            Vec2 num_s = Vec2::Zero();
            Vec2 num_t = Vec2::Zero();
            for (int r = 0; r < 9; ++r) {
                const auto k = static_cast<std::size_t>(b.index[r]);
                const double wk = weights_[k];
                w += wk * b.value[r];
                ws += wk * b.ds[r];
                wt += wk * b.dt[r];
                num += wk * b.value[r] * control_[k];
                num_s += wk * b.ds[r] * control_[k];
                num_t += wk * b.dt[r] * control_[k];
            }
            if (w <= 0.0) {
                std::ostringstream os;
                os << "GeometryMap: all active weights vanish at (" << s << ", " << t << ")";
                throw GeometryError(os.str());
            }
            out.x = num / w;
            out.jacobian.col(0) = (num_s - out.x * ws) / w;
            out.jacobian.col(1) = (num_t - out.x * wt) / w;
            out.det = out.jacobian.determinant();
            break;
        }
    }
    out.degenerate = std::abs(out.det) < kDegenerateTolerance;
    return out;
}

}  // namespace sgiga::spline
