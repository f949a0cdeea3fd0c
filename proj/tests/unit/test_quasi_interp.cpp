#include "sgiga/quasi_interp.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

using namespace sgiga;
using spline::KnotVector;

namespace {

constexpr double kPi = std::numbers::pi;

// de Boor coefficients of 1, s, s^2 for N_j: blossoms at (s_{j+1}, s_{j+2}).
std::array<double, 3> blossoms(const KnotVector& kv, int j) {
    const double a = kv[j + 1], b = kv[j + 2];
    return {1.0, 0.5 * (a + b), a * b};
}

double linf_error_1d(const std::function<double(double)>& f, int N) {
    const auto kv = KnotVector::open_uniform(0.0, 1.0, N, 2);
    const auto c = qi::qi_1d(f, kv);
    double worst = 0.0;
    for (int i = 0; i <= 40 * N; ++i) {
        const double s = static_cast<double>(i) / (40 * N);
        worst = std::max(worst, std::abs(spline::eval_spline_1d(kv, c.mu, s) - f(s)));
    }
    return worst;
}

double slope(const std::vector<double>& h, const std::vector<double>& e) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(e[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_SUITE("quasi_interp") {

TEST_CASE("uniform interior weights") {
    const auto kv = KnotVector::open_uniform(0.0, 10.0, 10, 2);
    for (int j = 2; j < kv.num_basis() - 2; ++j) {
        const auto w = qi::alpha_weights(kv, j);
        CHECK(w.rule == qi::Rule::ThreePoint);
        CHECK(w.alpha[0] == doctest::Approx(-0.125).epsilon(1e-14));
        CHECK(w.alpha[1] == doctest::Approx(1.25).epsilon(1e-14));
        CHECK(w.alpha[2] == doctest::Approx(-0.125).epsilon(1e-14));
    }
}

TEST_CASE("weights reproduce blossoms on random knots") {
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> k{0, 0, 0};
        double x = 0.0;
        for (int i = 0; i < 6; ++i) k.push_back(x += test::uniform(0.05, 1.0));
        x += test::uniform(0.05, 1.0);
        k.insert(k.end(), {x, x, x});
        const KnotVector kv(k, 2);
        for (int j = 0; j < kv.num_basis(); ++j) {
            const auto w = qi::alpha_weights(kv, j);
            const auto bl = blossoms(kv, j);
            double m0 = 0, m1 = 0, m2 = 0;
            for (int r = 0; r < 3; ++r) {
                m0 += w.alpha[r];
                m1 += w.alpha[r] * w.tau[r];
                m2 += w.alpha[r] * w.tau[r] * w.tau[r];
            }
            CHECK(m0 == doctest::Approx(bl[0]).epsilon(1e-12));
            CHECK(m1 == doctest::Approx(bl[1]).epsilon(1e-12).scale(x));
            CHECK(m2 == doctest::Approx(bl[2]).epsilon(1e-12).scale(x * x));
        }
    }
}

TEST_CASE("end coefficients use the one-point rule") {
    const auto kv = KnotVector::open_uniform(0.0, 1.0, 6, 2);
    CHECK(qi::alpha_weights(kv, 0).rule == qi::Rule::OnePoint);
    CHECK(qi::alpha_weights(kv, kv.num_basis() - 1).rule == qi::Rule::OnePoint);
    const auto c = qi::qi_1d([](double s) { return 3.0 + s; }, kv);
    CHECK(c.mu.front() == doctest::Approx(3.0));
    CHECK(c.mu.back() == doctest::Approx(4.0));
}

TEST_CASE("constants and quadratics are reproduced") {
    const auto kv = KnotVector::open_uniform(0.0, 1.0, 8, 2);
    const auto one = qi::qi_1d([](double) { return 1.0; }, kv);
    for (double m : one.mu) CHECK(m == doctest::Approx(1.0).epsilon(1e-14));
    auto sq = [](double s) { return s * s; };
    const auto c = qi::qi_1d(sq, kv);
    for (int i = 0; i <= 200; ++i) {
        const double s = i / 200.0;
        CHECK(std::abs(spline::eval_spline_1d(kv, c.mu, s) - sq(s)) <= 1e-12);
    }
}

TEST_CASE("linearity and locality") {
    const auto kv = KnotVector::open_uniform(0.0, 1.0, 12, 2);
    auto f = [](double s) { return std::exp(s); };
    auto g = [](double s) { return std::cos(5 * s); };
    const auto cf = qi::qi_1d(f, kv), cg = qi::qi_1d(g, kv);
    const auto cfg = qi::qi_1d([&](double s) { return 2.0 * f(s) - 3.0 * g(s); }, kv);
    for (std::size_t i = 0; i < cf.mu.size(); ++i)
        CHECK(std::abs(cfg.mu[i] - (2.0 * cf.mu[i] - 3.0 * cg.mu[i])) <= 1e-12);

    // Bump supported strictly inside span 5: at most three coefficients move.
    const double lo = kv.element_lo(5), hi = kv.element_hi(5);
    auto bumped = [&](double s) { return f(s) + (s > lo && s < hi ? std::sin(kPi * (s - lo) / (hi - lo)) : 0.0); };
    const auto cb = qi::qi_1d(bumped, kv);
    int changed = 0;
    for (std::size_t i = 0; i < cf.mu.size(); ++i) changed += cb.mu[i] != cf.mu[i] ? 1 : 0;
    CHECK(changed <= 3);
    CHECK(changed >= 1);

    const auto sp = spline::SplineSpace2D::uniform(Box{}, 8, 8);
    auto F = [](const Vec2& p) { return std::exp(p.x()) * std::sin(p.y()); };
    const auto c0 = qi::qi_2d(F, sp);
    const Box eb = sp.element_box(sp.element_index(3, 4));
    auto Fb = [&](const Vec2& p) {
        return F(p) + (p.x() > eb.lo.x() && p.x() < eb.hi.x() && p.y() > eb.lo.y() && p.y() < eb.hi.y() ? 1.0 : 0.0);
    };
    const auto c1 = qi::qi_2d(Fb, sp);
    changed = 0;
    for (int i = 0; i < c0.size(); ++i) changed += c0.mu[i] != c1.mu[i] ? 1 : 0;
    CHECK(changed <= 9);
}

TEST_CASE("third-order rate in 1D") {
    std::vector<double> h, e;
    for (int N : {10, 20, 40, 80}) {
        h.push_back(1.0 / N);
        e.push_back(linf_error_1d([](double s) { return std::sin(2 * kPi * s); }, N));
    }
    CHECK(slope(h, e) >= 2.9);
}

TEST_CASE("a kink spoils the spans whose neighbourhood contains it") {
    // Five spans have the kink within two spans; the error is first order there.
    auto run = [](int N, double kink) {
        const auto kv = KnotVector::open_uniform(0.0, 1.0, N, 2);
        auto f = [&](double s) { return s < kink ? s * s : s * s + 2.0 * (s - kink); };
        const auto c = qi::qi_1d(f, kv);
        std::vector<double> err(static_cast<std::size_t>(N));
        for (int e = 0; e < N; ++e)
            for (int i = 0; i <= 20; ++i) {
                const double s = kv.element_lo(e) + (kv.element_hi(e) - kv.element_lo(e)) * i / 20.0;
                err[e] = std::max(err[e], std::abs(spline::eval_spline_1d(kv, c.mu, s) - f(s)));
            }
        return err;
    };
    for (double kink : {0.4637, 0.4303}) {  // right and left of the span midpoint
        const auto err = run(12, kink);
        const int k = static_cast<int>(kink * 12);
        int bad = 0;
        for (int e = 0; e < 12; ++e) {
            if (std::abs(e - k) > 2) CHECK(err[e] <= 1e-12);
            bad += err[e] > 1e-12 ? 1 : 0;
        }
        CHECK(bad >= 4);
        CHECK(err[k] > 1e-3);
    }
    // Halving h only halves the worst error.
    double prev = 0.0;
    for (int N : {12, 24, 48}) {
        const auto err = run(N, 0.4637);
        const double worst = *std::max_element(err.begin(), err.end());
        if (prev > 0.0) CHECK(prev / worst < 3.0);
        prev = worst;
    }
}

TEST_CASE("non-finite samples are reported with their location") {
    const auto kv = KnotVector::open_uniform(0.0, 1.0, 4, 2);
    CHECK_THROWS_AS((void)qi::qi_1d([](double s) { return s > 0.5 ? std::numeric_limits<double>::quiet_NaN() : s; }, kv),
                    qi::NonFiniteSampleError);
    try {
        (void)qi::qi_1d([](double s) { return 1.0 / (s - s); }, kv);
        FAIL("expected an exception");
    } catch (const qi::NonFiniteSampleError& e) {
        CHECK(e.point().x() >= 0.0);
    }
}

TEST_CASE("tensor QI") {
    const auto sp = spline::SplineSpace2D::uniform(Box{}, 7, 5);
    const auto one = qi::qi_2d([](const Vec2&) { return 1.0; }, sp);
    for (double m : one.mu) CHECK(m == doctest::Approx(1.0).epsilon(1e-14));

    auto f = [](const Vec2& p) { return p.x() * p.x() * p.y() * p.y(); };
    const auto c = qi::qi_2d(f, sp);
    for (int e = 0; e < sp.num_elements(); ++e) CHECK(test::element_max_error(sp, c.mu, f, e) <= 1e-10);

    std::vector<double> h, err;
    for (int N : {10, 20, 40, 80}) {
        const auto s = spline::SplineSpace2D::uniform(Box{}, N, N);
        auto g = [](const Vec2& p) { return std::sin(2 * kPi * p.x()) * std::cos(2 * kPi * p.y()); };
        const auto cg = qi::qi_2d(g, s);
        double worst = 0.0;
        for (int e = 0; e < s.num_elements(); ++e) worst = std::max(worst, test::element_max_error(s, cg.mu, g, e, 3));
        h.push_back(1.0 / N);
        err.push_back(worst);
    }
    CHECK(slope(h, err) >= 2.9);
}

TEST_CASE("modified QI with agreeing branches equals plain QI") {
    const auto sp = spline::SplineSpace2D::uniform(Box{}, 10, 10);
    const geom::CircleInterface circle({0.45, 0.55}, 0.3, geom::CircleInterface::PositiveSide::Outside);
    const auto cls = geom::classify_elements(sp, circle);
    auto f = [](const Vec2& p) { return std::cos(p.x() + 2 * p.y()); };
    const auto plain = qi::qi_2d(f, sp);
    for (auto own : {qi::Ownership::AnchorSide, qi::Ownership::AnchorOutsideRing}) {
        const auto mod = qi::qi_modified_2d({f, f}, cls, sp, own);
        for (int k = 0; k < sp.num_basis(); ++k) CHECK(mod.mu[k] == doctest::Approx(plain.mu[k]).epsilon(1e-15));
    }
    const auto other = spline::SplineSpace2D::uniform(Box{}, 9, 10);
    CHECK_THROWS_AS((void)qi::qi_modified_2d({f, f}, cls, other), InvalidArgument);
}

TEST_CASE("one-dimensional ownership pattern") {
    // Seven spans in s, interface in span 5, positive side to the left.
    const auto sp = spline::SplineSpace2D::uniform(Box{{0, 0}, {7, 3}}, 7, 3);
    const geom::LineInterface line({5.4, 0.0}, {-1.0, 0.0});
    const auto cls = geom::classify_elements(sp, line);
    const int row = 2;
    for (int i = 0; i < 9; ++i) {
        const int k = sp.basis_index(i, row);
        CHECK(qi::uses_positive_branch(cls, sp, k, qi::Ownership::AnchorOutsideRing) == (i <= 4));
        CHECK(qi::uses_positive_branch(cls, sp, k, qi::Ownership::AnchorSide) == (i <= 5));
    }
}

TEST_CASE("modified QI reproduces distance times linear outside the enriched ring") {
    const auto sp = spline::SplineSpace2D::uniform(Box{}, 16, 16);
    const geom::LineInterface line = geom::LineInterface::through({0.13, 0.0}, {0.71, 1.0});
    const auto cls = geom::classify_elements(sp, line);
    auto lin = [](const Vec2& p) { return 1.0 + 2.0 * p.x() - p.y(); };
    auto exact = [&](const Vec2& p) { return std::max(line.phi(p), 0.0) * lin(p); };
    const qi::ExtensionPair ext{[&](const Vec2& p) { return line.phi(p) * lin(p); }, [](const Vec2&) { return 0.0; }};
    const auto mod = qi::qi_modified_2d(ext, cls, sp);
    const auto literal = qi::qi_modified_2d(ext, cls, sp, qi::Ownership::AnchorOutsideRing);
    const auto plain = qi::qi_2d(exact, sp);
    int zero_mod = 0, zero_plain = 0;
    for (int e = 0; e < sp.num_elements(); ++e) {
        const double em = test::element_max_error(sp, mod.mu, exact, e);
        if (!cls.in_J_plus(e, 1)) CHECK(em <= 1e-10);
        // The literal rule is exact only one ring further out.
        if (cls.ring(e) > 2) CHECK(test::element_max_error(sp, literal.mu, exact, e) <= 1e-10);
        zero_mod += em <= 1e-10 ? 1 : 0;
        zero_plain += test::element_max_error(sp, plain.mu, exact, e) <= 1e-10 ? 1 : 0;
    }
    CHECK(zero_mod > zero_plain);
    for (int k = 0; k < sp.num_basis(); ++k)
        CHECK(mod.branch[k] == (qi::uses_positive_branch(cls, sp, k) ? qi::Branch::Positive : qi::Branch::Negative));
}

}  // TEST_SUITE
