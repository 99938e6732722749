#include "dgpinn/adaptive_weights.hpp"
#include "dgpinn/losses.hpp"
#include "dgpinn/runtime.hpp"
#include "dgpinn/trainer.hpp"

#include <benchmark/benchmark.h>

using namespace dgpinn;

namespace {

struct Fixture {
  ProblemSpec problem;
  DatasetBundle bundle;
  TrainableState state;
};

// Paper-size network and sample counts (beam at the desk N_r).
const Fixture& fixture(ProblemId id) {
  static std::map<ProblemId, Fixture> cache;
  auto it = cache.find(id);
  if (it == cache.end()) {
    TrainConfig c = default_config(id);
    if (id == ProblemId::beam) c.counts.residual = 1000;
    const ProblemSpec p = problem_for(c);
    Fixture f{p, prepare_dataset(c, p),
              {init_network(c.layer_widths(), network_seed(c)), init_inverse(p, unknowns_seed(c))}};
    it = cache.emplace(id, std::move(f)).first;
  }
  return it->second;
}

ProblemId problem_arg(const benchmark::State& state) {
  return static_cast<ProblemId>(state.range(0));
}

void BM_DataObjective(benchmark::State& state) {
  const Fixture& f = fixture(problem_arg(state));
  for (auto _ : state) {
    benchmark::DoNotOptimize(data_objective(f.state.network, f.problem, f.bundle.data).gradient.data());
  }
  state.SetItemsProcessed(state.iterations() * f.bundle.data.size());
}

void BM_DataForwardOnly(benchmark::State& state) {
  const Fixture& f = fixture(problem_arg(state));
  for (auto _ : state) {
    benchmark::DoNotOptimize(data_objective(f.state.network, f.problem, f.bundle.data, false).breakdown.total);
  }
}

void BM_Composite(benchmark::State& state) {
  const Fixture& f = fixture(problem_arg(state));
  const LossWeights w = unit_weights(f.problem);
  for (auto _ : state) {
    benchmark::DoNotOptimize(composite(f.state, f.problem, f.bundle, w).gradient.data());
  }
}

void BM_ResidualDerivatives(benchmark::State& state) {
  const Fixture& f = fixture(problem_arg(state));
  for (auto _ : state) {
    Tape tape;
    const NetworkVars net = bind_network(tape, f.state.network);
    benchmark::DoNotOptimize(
        eval_with_input_derivatives(tape, net, f.bundle.residual.points, f.problem.residual_spec).size());
  }
  state.SetItemsProcessed(state.iterations() * f.bundle.residual.size());
}

void BM_AdaptiveWeights(benchmark::State& state) {
  const Fixture& f = fixture(problem_arg(state));
  for (auto _ : state) {
    benchmark::DoNotOptimize(adaptive_weights(f.state, f.problem, f.bundle).R);
  }
}

void BM_TanhMatrix(benchmark::State& state) {
  const Matrix z = Matrix::Random(100, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tanh_matrix(z).data());
  state.SetItemsProcessed(state.iterations() * z.size());
}

void all_problems(benchmark::internal::Benchmark* b) {
  for (ProblemId id : {ProblemId::heat, ProblemId::wave, ProblemId::beam, ProblemId::navier_stokes}) {
    b->Arg(static_cast<int>(id));
  }
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_DataObjective)->Apply(all_problems);
BENCHMARK(BM_DataForwardOnly)->Apply(all_problems);
BENCHMARK(BM_Composite)->Apply(all_problems);
BENCHMARK(BM_ResidualDerivatives)->Apply(all_problems);
BENCHMARK(BM_AdaptiveWeights)->Apply(all_problems);
BENCHMARK(BM_TanhMatrix)->Arg(1024)->Arg(10000);

int main(int argc, char** argv) {
  tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
