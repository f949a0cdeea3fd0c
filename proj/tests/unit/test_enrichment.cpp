#include "sgiga/assembly.hpp"
#include "sgiga/enrichment.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

using namespace sgiga;
using enrich::Method;

namespace {

std::shared_ptr<const geom::ImplicitInterface> benchmark_circle() {
    return std::make_shared<geom::CircleInterface>(Vec2(1.0 / std::sqrt(5.0), 1.0 / std::sqrt(3.0)),
                                                   1.0 / std::sqrt(10.0),
                                                   geom::CircleInterface::PositiveSide::Outside);
}

struct Setup {
    spline::SplineSpace2D space;
    std::shared_ptr<const geom::ImplicitInterface> iface;
    geom::MeshClassification cls;

    Setup(int N, std::shared_ptr<const geom::ImplicitInterface> g)
        : space(spline::SplineSpace2D::uniform(Box{}, N, N)), iface(std::move(g)),
          cls(geom::classify_elements(space, *iface)) {}

    [[nodiscard]] enrich::EnrichedSpace build(Method m) const {
        return enrich::build_enrichment(enrich::MethodVariant::defaults(m), space, iface, cls);
    }
};

// Brute-force mu: count enriched elements whose centre sees N_k > 0.
int mu_oracle(const Setup& s, int k) {
    int c = 0;
    for (int e : s.cls.J_plus(1)) {
        const Vec2 m = s.space.element_box(e).center();
        const auto [i, j] = s.space.basis_ij(k);
        const double v = spline::basis_value(s.space.knots_s(), i, m.x()) * spline::basis_value(s.space.knots_t(), j, m.y());
        c += v > 0.0 ? 1 : 0;
    }
    return c;
}

}  // namespace

TEST_SUITE("enrichment") {

TEST_CASE("method names round-trip") {
    for (Method m : enrich::all_methods()) CHECK(enrich::parse_method(enrich::method_name(m)) == m);
    CHECK_FALSE(enrich::parse_method("sgiga3").has_value());
    CHECK(enrich::method_name(Method::CorrectedGIGA) == "cor-giga");
}

TEST_CASE("default stabilisation flags") {
    for (Method m : enrich::all_methods()) {
        const auto v = enrich::MethodVariant::defaults(m);
        CHECK(v.projection == (m == Method::SGIGA2));
        CHECK(v.orthogonalize == (m == Method::SGIGA2));
    }
}

TEST_CASE("function counts per method") {
    const Setup s(20, benchmark_circle());
    const auto jp = static_cast<int>(s.cls.J_plus(1).size());
    int anchored = 0;
    for (int k = 0; k < s.space.num_basis(); ++k) anchored += s.cls.in_J(s.space.anchor_element(k), 1) ? 1 : 0;

    CHECK(s.build(Method::IGA).num_raw() == 0);
    CHECK(s.build(Method::GIGA).num_raw() == anchored);
    CHECK(s.build(Method::SGIGA).num_raw() == anchored);
    CHECK(s.build(Method::CorrectedGIGA).num_raw() == anchored);
    CHECK(s.build(Method::SGIGAMulti).num_raw() == 3 * anchored);
    CHECK(s.build(Method::GIGAStar).num_raw() == jp);
    CHECK(s.build(Method::SGIGA2).num_raw() == 3 * jp);
    CHECK(jp == 108);
    // Table 5 at N = 20.
    CHECK(s.space.num_basis() + s.build(Method::GIGAStar).num_functions() == 592);
    CHECK(s.space.num_basis() + s.build(Method::SGIGA2).num_functions() == 808);
}

TEST_CASE("enrichment is empty when nothing is cut") {
    const Setup s(6, std::make_shared<geom::CircleInterface>(Vec2(3.0, 3.0), 0.5,
                                                           geom::CircleInterface::PositiveSide::Outside));
    const auto e = s.build(Method::SGIGA2);
    CHECK(e.num_raw() == 0);
    CHECK_FALSE(e.notes().empty());
}

TEST_CASE("mu counts") {
    const Setup s(12, benchmark_circle());
    const auto mu = enrich::mu_counts(s.cls, s.space);
    for (int k = 0; k < s.space.num_basis(); ++k) CHECK(mu[k] == mu_oracle(s, k));

    // Constructed configuration whose marked element carries the counts 7,8,7,8,7,5,6,4,2.
    const Setup f(8, std::make_shared<geom::CircleInterface>(Vec2(-0.23, -0.27), 0.72,
                                                           geom::CircleInterface::PositiveSide::Outside));
    const auto fm = enrich::mu_counts(f.cls, f.space);
    std::vector<int> got;
    for (int k : f.space.element_basis(f.space.element_index(1, 2))) got.push_back(fm[k]);
    std::sort(got.begin(), got.end());
    std::vector<int> expect{7, 8, 7, 8, 7, 5, 6, 4, 2};
    std::sort(expect.begin(), expect.end());
    CHECK(got == expect);
}

TEST_CASE("theta functions partition unity on enriched elements") {
    for (auto g : {benchmark_circle(), std::shared_ptr<const geom::ImplicitInterface>(std::make_shared<geom::LineInterface>(
                                           geom::LineInterface::through({0.0, 0.31}, {1.0, 0.83})))}) {
        const Setup s(10, g);
        const auto e = s.build(Method::GIGAStar);
        double worst = 0.0;
        for (int el : e.enriched_elements()) {
            for (int rep = 0; rep < 1000; ++rep) {
                const Vec2 p = test::uniform_point(s.space.element_box(el));
                double sum = 0.0;
                for (int j : e.enriched_elements()) sum += e.theta(j, p);
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
        CHECK(worst <= 1e-12);
        // Coefficient lists agree with the evaluated theta.
        const auto mu = enrich::mu_counts(s.cls, s.space);
        const int j = e.enriched_elements()[e.enriched_elements().size() / 2];
        const auto coeffs = enrich::theta_coefficients(s.cls, s.space, mu, j);
        std::vector<double> c(static_cast<std::size_t>(s.space.num_basis()), 0.0);
        for (auto [k, w] : coeffs) c[k] = w;
        for (int rep = 0; rep < 50; ++rep) {
            const Vec2 p = test::uniform_point(Box{});
            CHECK(s.space.eval_field(c, p) == doctest::Approx(e.theta(j, p)).epsilon(1e-13));
        }
    }
}

TEST_CASE("raw functions vanish outside their window support") {
    const Setup s(10, benchmark_circle());
    for (Method m : {Method::GIGA, Method::SGIGA, Method::CorrectedGIGA, Method::GIGAStar}) {
        const auto e = s.build(m);
        for (int el = 0; el < s.space.num_elements(); ++el) {
            const Vec2 p = test::uniform_point(s.space.element_box(el));
            const auto& act = e.active(el);
            for (int l = 0; l < e.num_raw(); ++l) {
                const bool active = std::find(act.begin(), act.end(), l) != act.end();
                if (!active) CHECK(e.window_value(l, p) == 0.0);
            }
            spline::TensorBasis tb = s.space.eval(el, p);
            enrich::RawValues rv;
            e.eval_raw(el, p, s.iface->side(p), tb, rv);
            CHECK(rv.value.size() == act.size());
        }
    }
}

TEST_CASE("modified subtraction vanishes away from the enriched ring") {
    // Straight interface: distance times {1, s, t} is quadratic on each side.
    const Setup s(12, std::make_shared<geom::LineInterface>(geom::LineInterface::through({0.07, 0.0}, {0.77, 1.0})));
    const auto e = s.build(Method::SGIGA2);
    for (int el = 0; el < s.space.num_elements(); ++el) {
        if (s.cls.in_J_plus(el, 1)) continue;
        for (int rep = 0; rep < 10; ++rep) {
            const Vec2 p = test::uniform_point(s.space.element_box(el));
            enrich::RawValues rv;
            e.eval_raw(el, p, s.iface->side(p), s.space.eval(el, p), rv);
            for (double v : rv.value) CHECK(std::abs(v) <= 1e-12);
        }
    }
}

TEST_CASE("SGIGA2 functions are continuous with a flux jump across the interface") {
    const Setup s(10, benchmark_circle());
    const auto e = s.build(Method::SGIGA2);
    std::vector<double> jump(static_cast<std::size_t>(e.num_raw()), 0.0);
    const double eps = 1e-7;
    for (int rep = 0; rep < 400; ++rep) {
        const double a = 2.0 * 3.141592653589793 * rep / 400.0;
        const Vec2 c(1.0 / std::sqrt(5.0), 1.0 / std::sqrt(3.0));
        const Vec2 n(std::cos(a), std::sin(a));
        const Vec2 x = c + (1.0 / std::sqrt(10.0)) * n;
        const int el = s.space.locate_element(x);
        const auto tb = s.space.eval(el, x);
        enrich::RawValues plus, minus;
        e.eval_raw(el, x + eps * n, Side::Positive, tb, plus);
        e.eval_raw(el, x - eps * n, Side::Negative, tb, minus);
        const auto& act = e.active(el);
        for (std::size_t i = 0; i < act.size(); ++i) {
            CHECK(std::abs(plus.value[i] - minus.value[i]) <= 1e-5);
            jump[act[i]] = std::max(jump[act[i]], std::abs((plus.grad[i] - minus.grad[i]).dot(n)));
        }
    }
    int with_jump = 0;
    for (int el : e.enriched_elements())
        if (s.cls.is_cut(el))
            for (int g = 0; g < 3; ++g) {
                // functions are laid out element-major, three generators each
                const auto it = std::find(e.enriched_elements().begin(), e.enriched_elements().end(), el);
                const auto idx = 3 * (it - e.enriched_elements().begin()) + g;
                with_jump += jump[static_cast<std::size_t>(idx)] > 1e-6 ? 1 : 0;
            }
    CHECK(with_jump == 3 * s.cls.num_cut());
}

TEST_CASE("projection removes the subspace component") {
    const Setup s(10, benchmark_circle());
    auto e = s.build(Method::SGIGA2);
    const fem::QuadratureCache cache(s.space, s.cls, *s.iface, {});
    fem::ProblemData data;
    data.f = [](Side, const fem::Location&) { return 1.0; };
    data.g = [](Side, const fem::Location&, const Vec2&) { return 0.0; };
    const auto raw = fem::assemble_raw(e, s.cls, cache, data);
    enrich::apply_projection_T(e, raw.M_nn, raw.M_npsi);
    const auto& t = e.transform();
    const Eigen::MatrixXd mnn = Eigen::MatrixXd(raw.M_nn);
    Eigen::MatrixXd mix = Eigen::MatrixXd(raw.M_npsi) * t.C;
    for (std::size_t r = 0; r < t.rows.size(); ++r) mix += mnn.col(t.rows[r]) * t.E.row(static_cast<Eigen::Index>(r));
    const auto sub = e.projection_subspace();
    CHECK(sub == t.rows);
    double worst = 0.0, scale = 0.0;
    for (int i : sub) {
        worst = std::max(worst, mix.row(i).cwiseAbs().maxCoeff());
        scale = std::max(scale, (Eigen::MatrixXd(raw.M_npsi) * t.C).row(i).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-10 * scale);
}

TEST_CASE("LDLT re-basing diagonalises the enrichment block") {
    const Setup s(10, benchmark_circle());
    auto e = s.build(Method::SGIGA2);
    const fem::QuadratureCache cache(s.space, s.cls, *s.iface, {});
    fem::ProblemData data;
    data.f = [](Side, const fem::Location&) { return 1.0; };
    data.g = [](Side, const fem::Location&, const Vec2&) { return 0.0; };
    const auto raw = fem::assemble_raw(e, s.cls, cache, data);
    auto sys = fem::rebase(raw, e);
    const auto rep = enrich::orthogonalize_ldl(e, sys.K_ee);
    sys = fem::rebase(raw, e);
    Eigen::MatrixXd off = sys.K_ee;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() <= 1e-10 * sys.K_ee.diagonal().maxCoeff());
    CHECK(sys.K_ee.diagonal().isApprox(rep.pivots, 1e-10));
    CHECK_THROWS_AS(enrich::orthogonalize_ldl(e, Eigen::MatrixXd::Identity(3, 3)), InvalidArgument);
}

TEST_CASE("dropping functions") {
    const Setup s(10, benchmark_circle());
    auto e = s.build(Method::GIGAStar);
    const int n = e.num_functions();
    e.drop({0, 5}, "test");
    CHECK(e.num_functions() == n - 2);
    CHECK(e.num_dropped() == 2);
    CHECK_THROWS_AS(e.drop({n}, "bad"), DomainError);
}

}  // TEST_SUITE
