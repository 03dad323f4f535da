#include <vector>

#include <benchmark/benchmark.h>

#include "gmml/constructions.hpp"
#include "gmml/em.hpp"
#include "gmml/model.hpp"
#include "gmml/population.hpp"
#include "gmml/quadrature.hpp"

namespace {

gmml::QuadratureSpec spec_with_order(int order) {
  gmml::QuadratureSpec spec;
  spec.order = order;
  return spec;
}

void BM_PopulationLogLik(benchmark::State& state) {
  const gmml::MixtureModel truth = gmml::MixtureModel::line({-4.0, 4.0});
  const gmml::QuadratureSpec quad = spec_with_order(static_cast<int>(state.range(0)));
  const std::vector<double> mu{-3.0, 3.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmml::population_log_likelihood(mu, truth, quad));
  }
}
BENCHMARK(BM_PopulationLogLik)->Arg(100)->Arg(200)->Arg(400);

void BM_PopulationEvalTree(benchmark::State& state) {
  gmml::TreeConstructionSpec spec;
  spec.levels = 3;
  spec.R = 9e8;
  spec.paper_faithful = true;
  const gmml::MixtureModel truth = gmml::tree_construction(spec);
  const gmml::QuadratureSpec quad = spec_with_order(200);
  std::vector<double> mu = truth.centers1d();
  for (double& x : mu) x *= 0.97;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmml::population_eval(mu, truth, quad));
  }
}
BENCHMARK(BM_PopulationEvalTree);

void BM_WeightMoments(benchmark::State& state) {
  const gmml::MixtureModel truth = gmml::MixtureModel::line({-4.0, 4.0});
  const gmml::QuadratureSpec quad = spec_with_order(200);
  const std::vector<double> mu{-3.0, 3.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmml::weight_moments(mu, truth, quad));
  }
}
BENCHMARK(BM_WeightMoments);

void BM_PopulationEmStep(benchmark::State& state) {
  const gmml::MixtureModel truth = gmml::MixtureModel::line({-4.0, 4.0});
  const gmml::QuadratureSpec quad = spec_with_order(200);
  const std::vector<double> mu{-3.0, 3.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmml::em_step_population(mu, truth, quad));
  }
}
BENCHMARK(BM_PopulationEmStep);

void BM_Hessian(benchmark::State& state) {
  const gmml::MixtureModel truth =
      gmml::MixtureModel::line({-4.0, -1.0, 1.0, 4.0});
  const gmml::QuadratureSpec quad = spec_with_order(200);
  const std::vector<double> mu{-3.0, -0.5, 0.5, 3.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmml::population_hessian(mu, truth, quad));
  }
}
BENCHMARK(BM_Hessian);

void BM_QuadRuleLookup(benchmark::State& state) {
  const gmml::QuadratureSpec quad = spec_with_order(200);
  (void)gmml::quad_rule(quad);  // warm the cache
  for (auto _ : state) {
    benchmark::DoNotOptimize(&gmml::quad_rule(quad));
  }
}
BENCHMARK(BM_QuadRuleLookup);

}  // namespace

BENCHMARK_MAIN();
