#include "sgiga/quasi_interp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace sgiga::qi {

namespace {

double checked(double v, const Vec2& p) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "quasi-interpolation: non-finite sample at (" << p.x() << ", " << p.y() << ")";
        throw NonFiniteSampleError(os.str(), p);
    }
    return v;
}

// Midpoints of every knot span (empty spans included); tau_j^k is entry j + k.
std::vector<double> span_midpoints(const spline::KnotVector& kv) {
    std::vector<double> m(static_cast<std::size_t>(kv.size() - 1));
    for (int mu = 0; mu + 1 < kv.size(); ++mu) m[static_cast<std::size_t>(mu)] = 0.5 * (kv[mu] + kv[mu + 1]);
    return m;
}

std::vector<Weights> all_weights(const spline::KnotVector& kv) {
    std::vector<Weights> w;
    w.reserve(static_cast<std::size_t>(kv.num_basis()));
    for (int j = 0; j < kv.num_basis(); ++j) w.push_back(alpha_weights(kv, j));
    return w;
}

// Tensor-product rule on a precomputed grid of samples at span midpoints.
struct Tensor {
    const spline::SplineSpace2D& space;
    std::vector<Weights> ws;
    std::vector<Weights> wt;
    std::vector<double> ms;
    std::vector<double> mt;

    explicit Tensor(const spline::SplineSpace2D& sp)
        : space(sp),
          ws(all_weights(sp.knots_s())),
          wt(all_weights(sp.knots_t())),
          ms(span_midpoints(sp.knots_s())),
          mt(span_midpoints(sp.knots_t())) {}

    [[nodiscard]] std::vector<double> sample(const ScalarField& f) const {
        std::vector<double> g(ms.size() * mt.size());
        for (std::size_t b = 0; b < mt.size(); ++b) {
            for (std::size_t a = 0; a < ms.size(); ++a) {
                const Vec2 p{ms[a], mt[b]};
                g[b * ms.size() + a] = checked(f(p), p);
            }
        }
        return g;
    }

    [[nodiscard]] double coefficient(const std::vector<double>& grid, int k) const {
        const auto [i, j] = space.basis_ij(k);
        const auto& as = ws[static_cast<std::size_t>(i)].alpha;
        const auto& at = wt[static_cast<std::size_t>(j)].alpha;
        double mu = 0.0;
        for (int l = 0; l < 3; ++l) {
            if (at[static_cast<std::size_t>(l)] == 0.0) continue;
            const std::size_t row = static_cast<std::size_t>(j + l) * ms.size();
            double acc = 0.0;
            for (int m = 0; m < 3; ++m) acc += as[static_cast<std::size_t>(m)] * grid[row + static_cast<std::size_t>(i + m)];
            mu += at[static_cast<std::size_t>(l)] * acc;
        }
        return mu;
    }

    void fill_rules(QiCoefficients& out) const {
        const int n = space.num_basis();
        out.rule_s.resize(static_cast<std::size_t>(n));
        out.rule_t.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const auto [i, j] = space.basis_ij(k);
            out.rule_s[static_cast<std::size_t>(k)] = ws[static_cast<std::size_t>(i)].rule;
            out.rule_t[static_cast<std::size_t>(k)] = wt[static_cast<std::size_t>(j)].rule;
        }
    }
};

}  // namespace

Weights alpha_weights(const spline::KnotVector& kv, int j) {
    if (kv.degree() != 2) throw InvalidArgument("alpha_weights: quadratic knot vector required");
    if (j < 0 || j >= kv.num_basis()) throw DomainError("alpha_weights: basis index out of range");
    Weights w;
    w.tau = spline::tau_points(kv, j);
    const double a = kv[j + 1];
    const double b = kv[j + 2];
    if (a == b) {
        // tau_j^1 = s_{j+1}: the coefficient equals the value there.
        w.alpha = {0.0, 1.0, 0.0};
        w.rule = Rule::OnePoint;
        return w;
    }
    // Match the blossom of 1, s, s^2 (the B-spline coefficients of each).
    Eigen::Matrix3d v;
    for (int k = 0; k < 3; ++k) {
        const double t = w.tau[static_cast<std::size_t>(k)];
        v(0, k) = 1.0;
        v(1, k) = t;
        v(2, k) = t * t;
    }
    const Eigen::Vector3d rhs(1.0, 0.5 * (a + b), a * b);
    const Eigen::Vector3d x = v.partialPivLu().solve(rhs);
    w.alpha = {x(0), x(1), x(2)};
    return w;
}

QiCoefficients1D qi_1d(const ScalarFn1D& f, const spline::KnotVector& kv) {
    const auto m = span_midpoints(kv);
    std::vector<double> samples(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) samples[i] = checked(f(m[i]), {m[i], 0.0});
    QiCoefficients1D out;
    out.mu.resize(static_cast<std::size_t>(kv.num_basis()));
    out.rule.resize(out.mu.size());
    for (int j = 0; j < kv.num_basis(); ++j) {
        const auto w = alpha_weights(kv, j);
        double mu = 0.0;
        for (int k = 0; k < 3; ++k) mu += w.alpha[static_cast<std::size_t>(k)] * samples[static_cast<std::size_t>(j + k)];
        out.mu[static_cast<std::size_t>(j)] = mu;
        out.rule[static_cast<std::size_t>(j)] = w.rule;
    }
    return out;
}

QiCoefficients qi_2d(const ScalarField& f, const spline::SplineSpace2D& space) {
    const Tensor t(space);
    const auto grid = t.sample(f);
    QiCoefficients out;
    const int n = space.num_basis();
    out.mu.resize(static_cast<std::size_t>(n));
    out.branch.assign(static_cast<std::size_t>(n), Branch::Plain);
    for (int k = 0; k < n; ++k) out.mu[static_cast<std::size_t>(k)] = t.coefficient(grid, k);
    t.fill_rules(out);
    return out;
}

bool uses_positive_branch(const geom::MeshClassification& cls, const spline::SplineSpace2D& space, int k,
                          Ownership ownership) {
    const int e = space.anchor_element(k);
    if (cls.label(e) != geom::ElementLabel::Positive) return false;
    return ownership == Ownership::AnchorSide || !cls.in_J_plus(e, 1);
}

QiCoefficients qi_modified_2d(const ExtensionPair& ext, const geom::MeshClassification& cls,
                              const spline::SplineSpace2D& space, Ownership ownership) {
    if (cls.num_elements_s() != space.num_elements_s() ||
        cls.num_elements_t() != space.num_elements_t()) {
        throw InvalidArgument("qi_modified_2d: classification grid does not match the space");
    }
    if (!ext.positive || !ext.negative) throw InvalidArgument("qi_modified_2d: empty extension");
    const Tensor t(space);
    const auto pos = t.sample(ext.positive);
    const auto neg = t.sample(ext.negative);
    QiCoefficients out;
    const int n = space.num_basis();
    out.mu.resize(static_cast<std::size_t>(n));
    out.branch.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const bool p = uses_positive_branch(cls, space, k, ownership);
        out.mu[static_cast<std::size_t>(k)] = t.coefficient(p ? pos : neg, k);
        out.branch[static_cast<std::size_t>(k)] = p ? Branch::Positive : Branch::Negative;
    }
    t.fill_rules(out);
    return out;
}

}  // namespace sgiga::qi
