#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "gmml/density.hpp"
#include "gmml/em.hpp"
#include "gmml/model.hpp"
#include "gmml/population.hpp"
#include "gmml/quadrature.hpp"
#include "gmml/rng.hpp"

namespace {

using V = std::vector<double>;
using VV = std::vector<std::vector<double>>;

const gmml::QuadratureSpec kQuad{};

/// Independent locator for ascent limits: greedy 8-neighbor hill climbing on
/// the two-candidate objective with a shrinking step schedule.
std::pair<double, double> hill_climb_2d(double a, double b,
                                        const gmml::MixtureModel& truth) {
  const auto value = [&](double x, double y) {
    return gmml::population_log_likelihood(V{x, y}, truth, kQuad);
  };
  double best = value(a, b);
  for (double step : {0.5, 0.1, 0.02, 0.004, 0.0008, 0.0001}) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          if (dx == 0 && dy == 0) continue;
          const double v = value(a + dx * step, b + dy * step);
          if (v > best) {
            best = v;
            a += dx * step;
            b += dy * step;
            improved = true;
          }
        }
      }
    }
  }
  return {a, b};
}

}  // namespace

TEST_CASE("stopping rule rejects out-of-range settings") {
  CHECK_THROWS_AS((gmml::StoppingRule{0, 1e-10, 0.0}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((gmml::StoppingRule{10, 0.0, 0.0}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((gmml::StoppingRule{10, 1e-10, -1.0}.validate()),
                  std::invalid_argument);
  CHECK_NOTHROW(gmml::StoppingRule{}.validate());
}

TEST_CASE("region counts classify centers into intervals and the far zone") {
  const gmml::RegionSet regions{-5.0, -3.0, 3.0, 5.0, 10.0};
  const auto n = regions.counts(V{-4.0, 4.0, 11.0, 0.0});
  CHECK(n[0] == 1);
  CHECK(n[1] == 1);
  CHECK(n[2] == 1);
  const auto edge = regions.counts(V{-5.0, 5.0, -10.0});
  CHECK(edge[0] == 1);
  CHECK(edge[1] == 1);
  CHECK(edge[2] == 0);  // the far zone is strict
}

TEST_CASE("sample EM step with one component moves to the data mean") {
  const VV data{{1.0}, {2.0}, {6.0}};
  const VV out = gmml::em_step_sample(data, VV{{-7.0}});
  REQUIRE(out.size() == 1);
  CHECK(out[0][0] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("sample EM step commutes with negating the configuration") {
  const VV data{{0.3}, {-1.2}, {2.5}, {4.0}};
  const VV mu{{-1.0}, {2.0}};
  VV ndata = data, nmu = mu;
  for (auto& x : ndata) x[0] = -x[0];
  for (auto& c : nmu) c[0] = -c[0];
  const VV a = gmml::em_step_sample(data, mu);
  const VV b = gmml::em_step_sample(ndata, nmu);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i][0] + b[i][0]) < 1e-12);
  }
}

TEST_CASE("sample EM step fixes well-separated point masses") {
  const VV data{{0.0}, {10.0}};
  const VV out = gmml::em_step_sample(data, VV{{0.0}, {10.0}});
  CHECK(std::abs(out[0][0] - 0.0) < 1e-9);
  CHECK(std::abs(out[1][0] - 10.0) < 1e-9);
}

TEST_CASE("sample EM step validates its inputs") {
  CHECK_THROWS_AS(gmml::em_step_sample(VV{}, VV{{0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(gmml::em_step_sample(VV{{0.0, 1.0}}, VV{{0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(gmml::em_step_sample(VV{{0.0}}, VV{{0.0}, {1.0, 2.0}}),
                  std::invalid_argument);
}

TEST_CASE("population EM step with one candidate lands on the mixture mean") {
  const auto truth = gmml::MixtureModel::line(V{-6.0, 10.0});
  const V out = gmml::em_step_population(V{3.0}, truth, kQuad);
  REQUIRE(out.size() == 1);
  CHECK(std::abs(out[0] - 2.0) < 1e-9);
}

TEST_CASE("population EM step fixes well-separated truth") {
  const auto truth = gmml::MixtureModel::line(V{-20.0, 20.0, 200.0});
  const V out =
      gmml::em_step_population(V{-20.0, 20.0, 200.0}, truth, kQuad);
  CHECK(std::abs(out[0] + 20.0) < 1e-9);
  CHECK(std::abs(out[1] - 20.0) < 1e-9);
  CHECK(std::abs(out[2] - 200.0) < 1e-9);
}

TEST_CASE("population EM step keeps the merged origin in place") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  const V out = gmml::em_step_population(V{0.0, 0.0}, truth, kQuad);
  CHECK(std::abs(out[0]) < 1e-9);
  CHECK(std::abs(out[1]) < 1e-9);
}

TEST_CASE("first-order step interpolates between staying put and the EM step") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  gmml::Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const V mu{rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
    const double s = rng.uniform(0.05, 0.95);
    const V fo = gmml::first_order_em_step(mu, truth, kQuad, s);
    const V em = gmml::em_step_population(mu, truth, kQuad);
    const auto m = gmml::weight_moments(mu, truth, kQuad);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double theta = 1.0 - s * m.ew[i];
      CHECK(theta >= 0.0);
      CHECK(theta <= 1.0);
      const double blend = theta * mu[i] + (1.0 - theta) * em[i];
      CHECK(std::abs(fo[i] - blend) < 1e-9);
    }
  }
}

TEST_CASE("first-order step rejects stepsizes outside the open unit interval") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  for (double s : {0.0, 1.0, -0.5, 1.5}) {
    CHECK_THROWS_AS(gmml::first_order_em_step(V{0.5, 1.0}, truth, kQuad, s),
                    std::invalid_argument);
  }
  CHECK_THROWS_AS(
      gmml::run_population(V{0.5, 1.0}, gmml::PopulationStepKind::kFirstOrder,
                           1.0, gmml::StoppingRule{}, truth, kQuad),
      std::invalid_argument);
}

TEST_CASE("first-order updates gain at least the squared-gradient quota") {
  gmml::Rng rng(29);
  const double s = 0.5;
  for (int rep = 0; rep < 5; ++rep) {
    const int mt = 1 + rng.uniform_int(3);
    const int mc = 1 + rng.uniform_int(3);
    V tc(mt), mu0(mc);
    for (double& c : tc) c = rng.uniform(-6.0, 6.0);
    for (double& c : mu0) c = rng.uniform(-6.0, 6.0);
    const auto truth = gmml::MixtureModel::line(tc);
    const auto traj = gmml::run_population(
        mu0, gmml::PopulationStepKind::kFirstOrder, s,
        gmml::StoppingRule{50, 1e-14, 0.0}, truth, kQuad);
    for (std::size_t k = 0; k + 1 < traj.steps.size(); ++k) {
      REQUIRE(traj.steps[k + 1] == traj.steps[k] + 1);
      const double gain = traj.likelihoods[k + 1] - traj.likelihoods[k];
      const double quota =
          0.5 * s * traj.grad_norms[k] * traj.grad_norms[k];
      CHECK(gain >= quota - 1e-10);
    }
  }
}

TEST_CASE("EM keeps the likelihood non-decreasing from random starts") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  gmml::Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const V mu0{rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
    const auto traj = gmml::run_population(
        mu0, gmml::PopulationStepKind::kEm, 0.5,
        gmml::StoppingRule{200, 1e-12, 0.0}, truth, kQuad);
    for (std::size_t k = 0; k + 1 < traj.likelihoods.size(); ++k) {
      CHECK(traj.likelihoods[k + 1] >= traj.likelihoods[k] - 1e-12);
    }
  }
}

TEST_CASE("EM started at the truth converges immediately") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  const auto traj = gmml::run_population(
      V{-4.0, 4.0}, gmml::PopulationStepKind::kEm, 0.5,
      gmml::StoppingRule{100, 1e-10, 1e-6}, truth, kQuad);
  CHECK(traj.converged);
  CHECK(traj.total_iters <= 2);
  CHECK(traj.final_grad_norm() <= 1e-6);
}

TEST_CASE("EM from a one-sided start recovers both centers") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  const auto traj = gmml::run_population(
      V{-3.0, 5.0}, gmml::PopulationStepKind::kEm, 0.5,
      gmml::StoppingRule{100000, 1e-12, 1e-9}, truth, kQuad);
  REQUIRE(traj.converged);
  const V& fin = traj.final_iterate();
  CHECK(std::abs(fin[0] + 4.0) <= 1e-4);
  CHECK(std::abs(fin[1] - 4.0) <= 1e-4);
  // A derivative-free hill climb from the same start lands on the same limit.
  const auto [hx, hy] = hill_climb_2d(-3.0, 5.0, truth);
  CHECK(std::abs(fin[0] - hx) <= 1e-4);
  CHECK(std::abs(fin[1] - hy) <= 1e-4);
}

TEST_CASE("trajectory series stay aligned and honor the recording policy") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  const gmml::RegionSet regions{-6.0, -2.0, 2.0, 6.0, 20.0};
  const auto traj = gmml::run_population(
      V{-3.0, 5.0}, gmml::PopulationStepKind::kEm, 0.5,
      gmml::StoppingRule{50, 1e-12, 0.0}, truth, kQuad, &regions);
  REQUIRE(!traj.steps.empty());
  CHECK(traj.steps.front() == 0);
  CHECK(traj.iterates.size() == traj.steps.size());
  CHECK(traj.likelihoods.size() == traj.steps.size());
  CHECK(traj.grad_norms.size() == traj.steps.size());
  CHECK(traj.urn_counts.size() == traj.steps.size());
  CHECK(traj.steps.back() == traj.total_iters);

  const auto bare = gmml::run_population(
      V{-3.0, 5.0}, gmml::PopulationStepKind::kEm, 0.5,
      gmml::StoppingRule{5, 1e-12, 0.0}, truth, kQuad);
  CHECK(bare.urn_counts.empty());
}

TEST_CASE("long histories are thinned to every tenth iterate") {
  // One candidate under one true center approaches the mean geometrically,
  // so a tiny stepsize keeps the movement above any positive threshold for
  // the whole run.
  const auto truth = gmml::MixtureModel::line(V{0.0});
  const int cap = gmml::EmTrajectory::kRecordCap;
  const int extra = 2000;
  const auto traj = gmml::run_population(
      V{1.0}, gmml::PopulationStepKind::kFirstOrder, 0.001,
      gmml::StoppingRule{cap + extra, 1e-300, 0.0}, truth, kQuad);
  CHECK(!traj.converged);
  CHECK(traj.total_iters == cap + extra);
  CHECK(traj.steps.back() == cap + extra);
  // Full history through the cap, then only multiples of ten.
  const std::size_t expected =
      static_cast<std::size_t>(cap + 1 + extra / 10);
  CHECK(traj.steps.size() == expected);
  CHECK(traj.steps[static_cast<std::size_t>(cap)] == cap);
  for (std::size_t k = static_cast<std::size_t>(cap) + 1;
       k < traj.steps.size(); ++k) {
    CHECK(traj.steps[k] % 10 == 0);
  }
}

TEST_CASE("a one-iteration budget reports non-convergence") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  const auto traj = gmml::run_population(
      V{-3.0, 5.0}, gmml::PopulationStepKind::kEm, 0.5,
      gmml::StoppingRule{1, 1e-10, 0.0}, truth, kQuad);
  CHECK(!traj.converged);
  CHECK(traj.total_iters == 1);
}

TEST_CASE("sample EM on a large draw stays near the generating centers") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  gmml::Rng rng(12345);
  const auto draws = gmml::sample(truth, 100000, rng);
  VV data;
  data.reserve(draws.size());
  for (const auto& d : draws) data.push_back(d.point);
  const auto traj = gmml::run_sample(VV{{-4.0}, {4.0}},
                                     data, gmml::StoppingRule{50, 1e-8, 0.0});
  const V& fin = traj.final_iterate();
  CHECK(std::abs(fin[0] + 4.0) <= 0.05);
  CHECK(std::abs(fin[1] - 4.0) <= 0.05);
  for (std::size_t k = 0; k + 1 < traj.likelihoods.size(); ++k) {
    CHECK(traj.likelihoods[k + 1] >= traj.likelihoods[k] - 1e-12);
  }
}

TEST_CASE("sample EM validates its inputs") {
  CHECK_THROWS_AS(
      gmml::run_sample(VV{{0.0}}, VV{}, gmml::StoppingRule{}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      gmml::run_sample(VV{}, VV{{0.0}}, gmml::StoppingRule{}),
      std::invalid_argument);
}

TEST_CASE("critical points are classified by gradient and spectrum") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});

  const auto at_truth =
      gmml::classify_critical_point(V{-4.0, 4.0}, truth, kQuad);
  CHECK(at_truth.kind == gmml::CriticalKind::kLocalMaximum);
  CHECK(at_truth.grad_norm <= 1e-7);
  CHECK(at_truth.eigenvalues.back() < 0.0);

  const auto merged = gmml::classify_critical_point(V{0.0, 0.0}, truth, kQuad);
  CHECK(merged.kind == gmml::CriticalKind::kStrictSaddle);
  CHECK(merged.eigenvalues.back() > 1.0);
  CHECK(merged.eigenvalues.front() < 0.0);

  const auto wandering =
      gmml::classify_critical_point(V{1.0, 2.0}, truth, kQuad);
  CHECK(wandering.kind == gmml::CriticalKind::kIndeterminate);
  CHECK(wandering.grad_norm > 1e-7);

  CHECK(std::strcmp(gmml::to_string(gmml::CriticalKind::kLocalMaximum),
                    "local-maximum") == 0);
  CHECK(std::strcmp(gmml::to_string(gmml::CriticalKind::kStrictSaddle),
                    "strict-saddle") == 0);
  CHECK(std::strcmp(gmml::to_string(gmml::CriticalKind::kIndeterminate),
                    "indeterminate") == 0);
}
