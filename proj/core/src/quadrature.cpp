#include "sgiga/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace sgiga::quad {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::array<double, 2> legendre(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

Rule1D build_gauss_legendre(int n) {
    Rule1D r;
    r.x.assign(static_cast<std::size_t>(n), 0.0);
    r.w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(n, x)[1];
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        r.x[lo] = -x;
        r.x[hi] = x;
        r.w[lo] = w;
        r.w[hi] = w;
    }
    if (n % 2 == 1) r.x[static_cast<std::size_t>(n / 2)] = 0.0;
    return r;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
    static const std::array<Rule1D, kMaxGaussPoints> rules = [] {
        std::array<Rule1D, kMaxGaussPoints> all;
        for (int k = 1; k <= kMaxGaussPoints; ++k) all[static_cast<std::size_t>(k - 1)] = build_gauss_legendre(k);
        return all;
    }();
    if (n < 1 || n > kMaxGaussPoints) {
        throw InvalidArgument("gauss_legendre: order must be in [1, " +
                              std::to_string(kMaxGaussPoints) + "]");
    }
    return rules[static_cast<std::size_t>(n - 1)];
}

void tensor_gauss(const Box& box, int n, std::vector<WeightedPoint>& out) {
    const auto& g = gauss_legendre(n);
    const Vec2 c = box.center();
    const double hx = 0.5 * box.width();
    const double hy = 0.5 * box.height();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out.push_back({{c.x() + hx * g.x[static_cast<std::size_t>(i)],
                            c.y() + hy * g.x[static_cast<std::size_t>(j)]},
                           hx * hy * g.w[static_cast<std::size_t>(i)] * g.w[static_cast<std::size_t>(j)]});
        }
    }
}

void triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, std::vector<WeightedPoint>& out) {
    // Barycentric orbits of the degree-5 rule (weights normalised to sum 1).
    static constexpr double w0 = 0.225;
    static constexpr double a1 = 0.059715871789770;
    static constexpr double b1 = 0.470142064105115;
    static constexpr double w1 = 0.132394152788506;
    static constexpr double a2 = 0.797426985353087;
    static constexpr double b2 = 0.101286507323456;
    static constexpr double w2 = 0.125939180544827;
    const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    if (area == 0.0) return;
    auto emit = [&](double l0, double l1, double l2, double w) {
        out.push_back({l0 * a + l1 * b + l2 * c, w * area});
    };
    emit(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, w0);
    emit(a1, b1, b1, w1);
    emit(b1, a1, b1, w1);
    emit(b1, b1, a1, w1);
    emit(a2, b2, b2, w2);
    emit(b2, a2, b2, w2);
    emit(b2, b2, a2, w2);
}

void convex_polygon_rule(const std::vector<Vec2>& polygon, std::vector<WeightedPoint>& out) {
    for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
        triangle_rule(polygon[0], polygon[i], polygon[i + 1], out);
    }
}

double polygon_area(const std::vector<Vec2>& polygon) {
    if (polygon.size() < 3) return 0.0;
    // Relative to the first vertex: avoids cancellation far from the origin.
    const Vec2 o = polygon.front();
    double a = 0.0;
    for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
        const Vec2 p = polygon[i] - o;
        const Vec2 q = polygon[i + 1] - o;
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

}  // namespace sgiga::quad
