#include "sgiga/bench.hpp"
#include "sgiga/quasi_interp.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

namespace {

using namespace sgiga;

void BM_TensorBasisEval(benchmark::State& state) {
    const auto space = spline::SplineSpace2D::uniform(Box{}, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> pts(1024);
    for (auto& p : pts) p = Vec2(u(gen), u(gen));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(space.eval(pts[i++ & 1023]));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TensorBasisEval)->Arg(20)->Arg(160);

void BM_QuasiInterp(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto space = spline::SplineSpace2D::uniform(Box{}, N, N);
    const auto f = [](const Vec2& p) { return std::sin(6.0 * p.x()) * std::cos(5.0 * p.y()); };
    for (auto _ : state) benchmark::DoNotOptimize(qi::qi_2d(f, space));
    state.SetComplexityN(N * N);
}
BENCHMARK(BM_QuasiInterp)->RangeMultiplier(2)->Range(20, 160)->Complexity(benchmark::oN);

void BM_AssembleCircle(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto method = static_cast<enrich::Method>(state.range(1));
    const auto ex = bench::define_experiment(bench::ExperimentTag::Circle, 10.0, 1.0);
    const auto space = spline::SplineSpace2D::uniform(ex.domain, N, N);
    const auto cls = geom::classify_elements(space, *ex.iface);
    const auto enr = enrich::build_enrichment(enrich::MethodVariant::defaults(method), space, ex.iface, cls);
    const fem::QuadratureCache cache(space, cls, *ex.iface, {});
    for (auto _ : state) benchmark::DoNotOptimize(fem::assemble_raw(enr, cls, cache, ex.data));
}
BENCHMARK(BM_AssembleCircle)
    ->Args({20, static_cast<int>(enrich::Method::IGA)})
    ->Args({20, static_cast<int>(enrich::Method::SGIGA2)})
    ->Args({40, static_cast<int>(enrich::Method::SGIGA2)})
    ->Unit(benchmark::kMillisecond);

Eigen::MatrixXd spd(int n) {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> g;
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n * n; ++i) b.data()[i] = g(gen);
    return b * b.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

void BM_Ldlt(benchmark::State& state) {
    const auto a = spd(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(la::ldlt(a));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Ldlt)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNCubed)->Unit(benchmark::kMillisecond);

void BM_Scn(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto ex = bench::define_experiment(bench::ExperimentTag::Circle, 10.0, 1.0);
    const auto space = spline::SplineSpace2D::uniform(ex.domain, N, N);
    const auto cls = geom::classify_elements(space, *ex.iface);
    const auto enr = enrich::build_enrichment(enrich::MethodVariant::defaults(enrich::Method::IGA), space, ex.iface, cls);
    const fem::QuadratureCache cache(space, cls, *ex.iface, {});
    const auto scaled = fem::scale_system(fem::assemble(enr, cls, cache, ex.data));
    const la::SymMatrix k(scaled.K);
    for (auto _ : state) benchmark::DoNotOptimize(la::scn(k, 1));
}
BENCHMARK(BM_Scn)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ScnIterative(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto ex = bench::define_experiment(bench::ExperimentTag::Circle, 10.0, 1.0);
    const auto space = spline::SplineSpace2D::uniform(ex.domain, N, N);
    const auto cls = geom::classify_elements(space, *ex.iface);
    const auto enr = enrich::build_enrichment(enrich::MethodVariant::defaults(enrich::Method::IGA), space, ex.iface, cls);
    const fem::QuadratureCache cache(space, cls, *ex.iface, {});
    const auto scaled = fem::scale_system(fem::assemble(enr, cls, cache, ex.data));
    const la::SymMatrix k(scaled.K);
    for (auto _ : state) benchmark::DoNotOptimize(la::scn_iterative(k, 1));
}
BENCHMARK(BM_ScnIterative)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
