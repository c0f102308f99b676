#include "shiftlab/game.hpp"
#include "shiftlab/random.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace shiftlab;

void BM_SolveZeroOneGame(benchmark::State &state) {
    const int k = static_cast<int>(state.range(0));
    Rng rng = make_rng(RandomSeed{7});
    const CostMatrix base = zero_one_cost(k);
    Potentials psi(k);
    for (int y = 0; y < k; ++y) {
        psi(y) = standard_normal(rng);
    }
    const CostMatrix game = augment(base, psi);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_minimax(game));
    }
}
BENCHMARK(BM_SolveZeroOneGame)->Arg(2)->Arg(3)->Arg(6)->Arg(10);

void BM_SolveRandomGame(benchmark::State &state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    Rng rng = make_rng(RandomSeed{11});
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = uniform01(rng);
        }
    }
    const CostMatrix game(m);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_minimax(game));
    }
}
BENCHMARK(BM_SolveRandomGame)->Arg(2)->Arg(4)->Arg(6)->Arg(12);

}  // namespace
