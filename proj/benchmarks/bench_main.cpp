#include <benchmark/benchmark.h>

#include "geogns/geometry.hpp"
#include "geogns/gns.hpp"
#include "geogns/parallel_sim.hpp"
#include "geogns/problems.hpp"
#include "geogns/rng.hpp"

using namespace geogns;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t key) {
    CounterRng rng(key);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

void BM_MatsignExact(benchmark::State& state) {
    const Matrix g = random_matrix(state.range(0), state.range(0) / 2, 1);
    for (auto _ : state) benchmark::DoNotOptimize(geometry::matsign_exact(g).values.data());
}

void BM_MatsignNewtonSchulz(benchmark::State& state) {
    const Matrix g = random_matrix(state.range(0), state.range(0) / 2, 1);
    const int iterations = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(geometry::matsign_newton_schulz(g, iterations).values.data());
    }
}

void BM_CovarianceSqrtNuclear(benchmark::State& state) {
    const Matrix a = random_matrix(state.range(0), state.range(0), 2);
    const Matrix c = a * a.transpose();
    for (auto _ : state) benchmark::DoNotOptimize(geometry::covariance_sqrt_nuclear(c));
}

void BM_SimulateStepMatrix(benchmark::State& state) {
    const problems::MatrixQuadratic p(Matrix::Zero(16, 32), Matrix::Identity(16, 16));
    const Params x = p.initial_params(0);
    const parallel::RankLayout layout{static_cast<int>(state.range(0)), 256};
    std::uint64_t step = 0;
    for (auto _ : state) {
        auto s = parallel::simulate_step(p, x, layout, 1, step++, true);
        benchmark::DoNotOptimize(s.train_loss);
    }
    state.SetItemsProcessed(state.iterations() * layout.global_batch);
}

void BM_GnsMeasure(benchmark::State& state) {
    const auto norm = static_cast<gns::GnsNorm>(state.range(0));
    const problems::MatrixQuadratic p(Matrix::Zero(16, 32), Matrix::Identity(16, 16));
    const Params x = p.initial_params(0);
    const auto s = parallel::simulate_step(p, x, {8, 256}, 1, 0, true);
    for (auto _ : state) benchmark::DoNotOptimize(gns::measure(s, x, norm, false).noise);
    state.SetLabel(std::string(gns::to_string(norm)));
}

void BM_TinyMlpSample(benchmark::State& state) {
    problems::TinyMlp::Options o;
    o.hidden = state.range(0);
    const problems::TinyMlp p(o);
    const Params x = p.initial_params(0);
    std::uint64_t key = 0;
    for (auto _ : state) benchmark::DoNotOptimize(p.evaluate_sample(x, key++).loss);
}

}  // namespace

BENCHMARK(BM_MatsignExact)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_MatsignNewtonSchulz)->Args({32, 5})->Args({128, 5})->Args({256, 5})->Args({128, 30});
BENCHMARK(BM_CovarianceSqrtNuclear)->Arg(16)->Arg(64);
BENCHMARK(BM_SimulateStepMatrix)->Arg(2)->Arg(8);
BENCHMARK(BM_GnsMeasure)->Arg(0)->Arg(1)->Arg(2);
BENCHMARK(BM_TinyMlpSample)->Arg(16)->Arg(64);
BENCHMARK_MAIN();
