#include "shiftlab/methods.hpp"
#include "shiftlab/random.hpp"
#include "shiftlab/sampling.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace shiftlab;

Scene bench_scene() {
    SceneSpec spec;
    spec.train_mean = {-0.5, 0.0};
    spec.train_cov << 0.3, 0.0, 0.0, 0.5;
    spec.test_cov << 1.0, 0.0, 0.0, 0.6;
    spec.n_train = 100;
    return gaussian_2d_scene(spec, RandomSeed{3});
}

void BM_Train(benchmark::State &state, Method method) {
    const Scene scene = bench_scene();
    const ShiftContext shift = prepare_shift(scene.train.features(), scene.test.features());
    FitOptions options;
    options.subgradient.iterations = 200;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_method(method, scene.train, 1.0 / 256.0, shift, options));
    }
}
BENCHMARK_CAPTURE(BM_Train, lr, Method::LR)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, robust_logloss, Method::RobustLogloss)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, robust_multiview, Method::RobustMultiview)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, svm, Method::SVM)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Train, robust_01, Method::Robust01)->Unit(benchmark::kMillisecond);

void BM_PredictProba(benchmark::State &state, Method method) {
    const Scene scene = bench_scene();
    const ShiftContext shift = prepare_shift(scene.train.features(), scene.test.features());
    FitOptions options;
    options.subgradient.iterations = 50;
    const Model model = fit_method(method, scene.train, 1.0 / 256.0, shift, options);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.predict_proba(scene.test.row(i++ % scene.test.size())));
    }
}
BENCHMARK_CAPTURE(BM_PredictProba, robust_logloss, Method::RobustLogloss);
BENCHMARK_CAPTURE(BM_PredictProba, robust_01, Method::Robust01);

}  // namespace
