#include "sgiga/splines.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sgiga;
using spline::KnotVector;

namespace {

// Textbook recursion, no shortcuts: the oracle for Cox-de Boor evaluation.
double naive_basis(const std::vector<double>& k, int j, int d, double s, bool last_span_closed) {
    if (d == 0) {
        if (k[j] <= s && s < k[j + 1]) return 1.0;
        // Close the final nonempty span so s = b is covered.
        if (last_span_closed && s == k.back() && k[j] < k[j + 1] && k[j + 1] == k.back()) return 1.0;
        return 0.0;
    }
    double v = 0.0;
    if (k[j + d] > k[j]) v += (s - k[j]) / (k[j + d] - k[j]) * naive_basis(k, j, d - 1, s, last_span_closed);
    if (k[j + d + 1] > k[j + 1])
        v += (k[j + d + 1] - s) / (k[j + d + 1] - k[j + 1]) * naive_basis(k, j + 1, d - 1, s, last_span_closed);
    return v;
}

KnotVector random_open_knots(int n_inner) {
    std::vector<double> k{0, 0, 0};
    double x = 0.0;
    for (int i = 0; i < n_inner; ++i) {
        x += test::uniform(0.05, 1.0);
        k.push_back(x);
    }
    const double b = x + test::uniform(0.05, 1.0);
    k.insert(k.end(), {b, b, b});
    return KnotVector(k, 2);
}

}  // namespace

TEST_SUITE("splines") {

TEST_CASE("knot vector validation") {
    CHECK_THROWS_AS(KnotVector({0, 0, 0, 1, 0.5, 1, 1}, 2), InvalidArgument);
    CHECK_THROWS_AS(KnotVector({0, 0, 1, 1, 1}, 2), InvalidArgument);
    CHECK_THROWS_AS(KnotVector({0, 0, 0, 0, 0, 0}, 2), InvalidArgument);
    CHECK_NOTHROW(KnotVector({0, 0, 0, 1, 1, 1}, 2));

    const auto kv = KnotVector::open_uniform(0.0, 1.0, 5, 2);
    CHECK(kv.num_basis() == 7);
    CHECK(kv.num_elements() == 5);
    CHECK_THROWS_AS((void)kv.find_span(1.5), DomainError);
    CHECK_THROWS_AS((void)kv.find_span(-1e-9), DomainError);
}

TEST_CASE("element count skips empty spans") {
    const KnotVector kv({0, 0, 0, 0.5, 0.5, 1, 1, 1}, 2);
    CHECK(kv.num_elements() == 2);
    CHECK(kv.element_lo(1) == 0.5);
    CHECK(kv.find_element(1.0) == 1);
}

TEST_CASE("values agree with the recursive definition") {
    for (int trial = 0; trial < 20; ++trial) {
        const auto kv = random_open_knots(1 + trial % 6);
        const std::vector<double> k(kv.knots().begin(), kv.knots().end());
        for (int rep = 0; rep < 50; ++rep) {
            const double s = rep == 0 ? kv.back() : test::uniform(kv.front(), kv.back());
            for (int j = 0; j < kv.num_basis(); ++j)
                CHECK(spline::basis_value(kv, j, s) == doctest::Approx(naive_basis(k, j, 2, s, true)).epsilon(1e-13));
        }
    }
}

TEST_CASE("partition of unity at random samples") {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto kv = random_open_knots(trial % 9);
        for (int rep = 0; rep < 100; ++rep) {
            const double s = test::uniform(kv.front(), kv.back());
            const auto b = spline::eval_basis_derivs(kv, s, 2);
            double sum = 0.0, dsum = 0.0, d2sum = 0.0;
            for (int r = 0; r < b.count; ++r) {
                sum += b.ders[0][r];
                dsum += b.ders[1][r];
                d2sum += b.ders[2][r];
            }
            worst = std::max(worst, std::abs(sum - 1.0));
            CHECK(std::abs(dsum) < 1e-10);
            CHECK(std::abs(d2sum) < 1e-8);
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("derivatives match central differences with step halving") {
    const auto kv = random_open_knots(5);
    for (int rep = 0; rep < 30; ++rep) {
        const double s = test::uniform(kv.front() + 0.02, kv.back() - 0.02);
        const int span = kv.find_span(s);
        // Stay clear of knots where the derivative jumps.
        const double gap = std::min(s - kv[span], kv[span + 1] - s);
        if (gap < 0.01) continue;
        const auto b = spline::eval_basis_derivs(kv, s, 1);
        for (int r = 0; r < b.count; ++r) {
            const int j = b.first + r;
            auto fd = [&](double h) {
                return (spline::basis_value(kv, j, s + h) - spline::basis_value(kv, j, s - h)) / (2 * h);
            };
            const double e1 = std::abs(fd(4e-3) - b.ders[1][r]);
            const double e2 = std::abs(fd(2e-3) - b.ders[1][r]);
            // Quadratic pieces: the central difference is exact up to rounding.
            CHECK(e1 < 1e-8);
            CHECK(e2 < 1e-8);
        }
    }
}

TEST_CASE("local support is exact") {
    const auto kv = random_open_knots(6);
    for (int j = 0; j < kv.num_basis(); ++j) {
        for (int rep = 0; rep < 200; ++rep) {
            const double s = test::uniform(kv.front(), kv.back());
            if (s < kv[j] || s > kv[j + 3]) CHECK(spline::basis_value(kv, j, s) == 0.0);
        }
    }
}

TEST_CASE("uniform quadratic closed form") {
    // Interior basis on knots 0..3: s^2/2, (-2s^2+6s-3)/2, (3-s)^2/2.
    const auto kv = KnotVector::open_uniform(0.0, 6.0, 6, 2);
    const int j = 3;  // knots 1,2,3,4
    for (double s : {1.25, 2.5, 3.75}) {
        const double u = s - 1.0;
        const double expect = u < 1 ? u * u / 2 : u < 2 ? (-2 * u * u + 6 * u - 3) / 2 : (3 - u) * (3 - u) / 2;
        CHECK(spline::basis_value(kv, j, s) == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("anchors are middle spans, pulled inward at the ends") {
    const auto kv = KnotVector::open_uniform(0.0, 1.0, 5, 2);
    CHECK(kv.anchor_element(0) == 0);
    CHECK(kv.anchor_element(1) == 0);
    CHECK(kv.anchor_element(2) == 1);
    CHECK(kv.anchor_element(5) == 4);
    CHECK(kv.anchor_element(6) == 4);
    const auto sup = kv.support_elements(3);
    CHECK(sup[0] == 1);
    CHECK(sup[1] == 3);
}

TEST_CASE("tensor space bookkeeping") {
    const auto sp = spline::SplineSpace2D::uniform(Box{{0, 0}, {1, 2}}, 4, 3);
    CHECK(sp.num_basis() == 6 * 5);
    CHECK(sp.num_elements() == 12);
    CHECK_THROWS_AS(spline::SplineSpace2D(KnotVector::open_uniform(0, 1, 3, 1), KnotVector::open_uniform(0, 1, 3, 2)),
                    InvalidArgument);

    for (int e = 0; e < sp.num_elements(); ++e) {
        const auto basis = sp.element_basis(e);
        for (int k : basis) CHECK(sp.support_contains(k, e));
        int count = 0;
        for (int k = 0; k < sp.num_basis(); ++k) count += sp.support_contains(k, e) ? 1 : 0;
        CHECK(count == 9);
    }
    // Every element anchors at least one basis (quadratic: basis <-> element correspondence).
    std::vector<int> owned(static_cast<std::size_t>(sp.num_elements()), 0);
    for (int k = 0; k < sp.num_basis(); ++k) ++owned[static_cast<std::size_t>(sp.anchor_element(k))];
    for (int c : owned) CHECK(c >= 1);
}

TEST_CASE("tensor evaluation is a partition of unity with consistent gradients") {
    const auto sp = spline::SplineSpace2D::uniform(Box{{1, 0}, {2, 2 * std::numbers::pi}}, 7, 9);
    for (int rep = 0; rep < 500; ++rep) {
        const Vec2 p = test::uniform_point(sp.domain());
        const auto tb = sp.eval(p);
        double sum = 0, gs = 0, gt = 0;
        for (int r = 0; r < 9; ++r) {
            sum += tb.value[r];
            gs += tb.ds[r];
            gt += tb.dt[r];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(std::abs(gs) < 1e-10);
        CHECK(std::abs(gt) < 1e-10);
    }
}

TEST_CASE("geometry maps") {
    const auto id = spline::GeometryMap::identity();
    const auto e = id.eval(0.3, 0.7);
    CHECK(e.x.isApprox(Vec2(0.3, 0.7)));
    CHECK(e.det == doctest::Approx(1.0));

    const auto polar = spline::GeometryMap::polar();
    const double s = 1.5, t = 0.8;
    const auto ep = polar.eval(s, t);
    CHECK(ep.x.isApprox(Vec2(s * std::cos(t), s * std::sin(t))));
    CHECK(ep.det == doctest::Approx(s));
    const double h = 1e-6;
    const Vec2 ds = (polar.eval(s + h, t).x - polar.eval(s - h, t).x) / (2 * h);
    const Vec2 dt = (polar.eval(s, t + h).x - polar.eval(s, t - h).x) / (2 * h);
    CHECK((ep.jacobian.col(0) - ds).norm() < 1e-8);
    CHECK((ep.jacobian.col(1) - dt).norm() < 1e-8);
    CHECK(polar.eval(0.0, 1.0).degenerate);
}

TEST_CASE("nurbs quarter annulus reproduces the circle exactly") {
    // Degree 2 in the angular direction, linear-in-radius data lifted to degree 2.
    const spline::SplineSpace2D sp(KnotVector({0, 0, 0, 1, 1, 1}, 2), KnotVector({0, 0, 0, 1, 1, 1}, 2));
    std::vector<Vec2> cp;
    std::vector<double> w;
    const double r2 = std::sqrt(0.5);
    for (int j = 0; j < 3; ++j) {
        const Vec2 dir = j == 0 ? Vec2(1, 0) : j == 1 ? Vec2(1, 1) : Vec2(0, 1);
        const double wj = j == 1 ? r2 : 1.0;
        for (int i = 0; i < 3; ++i) {
            cp.push_back((1.0 + 0.5 * i) * dir);
            w.push_back(wj);
        }
    }
    const auto g = spline::GeometryMap::nurbs(sp, cp, w);
    for (int rep = 0; rep < 50; ++rep) {
        const double s = test::uniform(0, 1), t = test::uniform(0, 1);
        CHECK(g.eval(s, t).x.norm() == doctest::Approx(1.0 + s).epsilon(1e-12));
    }
    CHECK_THROWS_AS(spline::GeometryMap::nurbs(sp, cp, std::vector<double>(9, -1.0)), InvalidArgument);
}

}  // TEST_SUITE
