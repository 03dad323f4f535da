#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gmml/density.hpp"
#include "gmml/em.hpp"
#include "gmml/model.hpp"
#include "gmml/population.hpp"
#include "gmml/quadrature.hpp"
#include "gmml/rng.hpp"

namespace {

using V = std::vector<double>;

const gmml::QuadratureSpec kQuad{};  // order-200 Gauss-Hermite

double rel_err(const V& got, const V& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num) / std::max(1.0, std::sqrt(den));
}

/// Random 1-d scenario with centers of moderate magnitude. Candidate count is
/// 1..max_m, truth count 1..3; both drawn uniformly from [-6, 6].
struct Scenario {
  gmml::MixtureModel truth;
  V mu;
};

Scenario random_scenario(gmml::Rng& rng, int max_m) {
  const int mt = 1 + rng.uniform_int(3);
  const int mc = 1 + rng.uniform_int(max_m);
  V tc(mt), mu(mc);
  for (double& c : tc) c = rng.uniform(-6.0, 6.0);
  for (double& c : mu) c = rng.uniform(-6.0, 6.0);
  return {gmml::MixtureModel::line(tc), mu};
}

}  // namespace

TEST_CASE("log-likelihood of the standard normal at its own center") {
  const auto truth = gmml::MixtureModel::line(V{0.0});
  const double got = gmml::population_log_likelihood(V{0.0}, truth, kQuad);
  // E[log phi(X)] = -(1 + log 2 pi) / 2.
  CHECK(got == doctest::Approx(-1.4189385332046727).epsilon(1e-12));
}

TEST_CASE("log-likelihood at well-separated truth equals the plateau value") {
  const auto truth = gmml::MixtureModel::line(V{-20.0, 20.0, 200.0});
  const double got =
      gmml::population_log_likelihood(V{-20.0, 20.0, 200.0}, truth, kQuad);
  // Separation makes cross terms vanish: -1/2 - log(3 sqrt(2 pi)).
  const double want = -0.5 - std::log(3.0) - gmml::kLogSqrt2Pi;
  CHECK(std::abs(got - want) < 1e-6);
  CHECK(got == doctest::Approx(-2.5175508218727820).epsilon(1e-9));
}

TEST_CASE("log-likelihood is invariant under candidate permutation") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  const double a =
      gmml::population_log_likelihood(V{-1.5, 0.25, 3.0}, truth, kQuad);
  const double b =
      gmml::population_log_likelihood(V{3.0, -1.5, 0.25}, truth, kQuad);
  CHECK(std::abs(a - b) <= 1e-12);
}

TEST_CASE("log-likelihood stays finite at extreme center magnitudes") {
  const auto truth = gmml::MixtureModel::line(V{-9.0e8, 9.0e8});
  const double got =
      gmml::population_log_likelihood(V{-9.0e8, 9.0e8}, truth, kQuad);
  CHECK(std::isfinite(got));
  const double want = -0.5 - std::log(2.0) - gmml::kLogSqrt2Pi;
  CHECK(std::abs(got - want) < 1e-6);
}

TEST_CASE("weight moments sum to the mixture totals") {
  gmml::Rng rng(91);
  for (int rep = 0; rep < 25; ++rep) {
    const Scenario sc = random_scenario(rng, 5);
    const auto m = gmml::weight_moments(sc.mu, sc.truth, kQuad);
    double sum_ew = 0.0, sum_ewx = 0.0, mean = 0.0;
    for (double w : m.ew) sum_ew += w;
    for (double wx : m.ewx) sum_ewx += wx;
    for (double c : sc.truth.centers1d()) mean += c;
    mean /= sc.truth.count();
    CHECK(std::abs(sum_ew - 1.0) < 1e-9);
    CHECK(std::abs(sum_ewx - mean) < 1e-8);
  }
}

TEST_CASE("weight-moment totals hold in relative terms at large magnitudes") {
  const auto truth = gmml::MixtureModel::line(V{-1.0e9, 1.0e9, 3.0e9});
  const V mu{-1.1e9, 0.9e9, 3.1e9};
  const auto m = gmml::weight_moments(mu, truth, kQuad);
  double sum_ew = 0.0, sum_ewx = 0.0;
  for (double w : m.ew) sum_ew += w;
  for (double wx : m.ewx) sum_ewx += wx;
  CHECK(std::abs(sum_ew - 1.0) < 1e-9);
  CHECK(std::abs(sum_ewx - 1.0e9) < 1e-9 * 3.0e9);
}

TEST_CASE("posterior mean at the truth reproduces the component center") {
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  for (int order : {200, 400}) {
    gmml::QuadratureSpec spec;
    spec.order = order;
    const auto m = gmml::weight_moments(V{-4.0, 4.0}, truth, spec);
    CHECK(std::abs(m.ewx[1] / m.ew[1] - 4.0) < 1e-3);
  }
  // Doubling the node count leaves the moments unchanged to near roundoff.
  gmml::QuadratureSpec fine;
  fine.order = 400;
  const auto a = gmml::weight_moments(V{-4.0, 4.0}, truth, kQuad);
  const auto b = gmml::weight_moments(V{-4.0, 4.0}, truth, fine);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(a.ew[i] - b.ew[i]) < 1e-12);
    CHECK(std::abs(a.ewx[i] - b.ewx[i]) < 1e-9);
  }
}

TEST_CASE("gradient matches central finite differences of the objective") {
  gmml::Rng rng(417);
  const double h = 1e-5;
  for (int rep = 0; rep < 50; ++rep) {
    const Scenario sc = random_scenario(rng, 5);
    const V g = gmml::population_gradient(sc.mu, sc.truth, kQuad);
    V fd(sc.mu.size());
    for (std::size_t i = 0; i < sc.mu.size(); ++i) {
      V up = sc.mu, dn = sc.mu;
      up[i] += h;
      dn[i] -= h;
      fd[i] = (gmml::population_log_likelihood(up, sc.truth, kQuad) -
               gmml::population_log_likelihood(dn, sc.truth, kQuad)) /
              (2.0 * h);
    }
    CHECK(rel_err(fd, g) <= 1e-6);
  }
}

TEST_CASE("gradient components sum to the first-moment identity") {
  gmml::Rng rng(418);
  for (int rep = 0; rep < 25; ++rep) {
    const Scenario sc = random_scenario(rng, 5);
    const V g = gmml::population_gradient(sc.mu, sc.truth, kQuad);
    const auto m = gmml::weight_moments(sc.mu, sc.truth, kQuad);
    double mean = 0.0;
    for (double c : sc.truth.centers1d()) mean += c;
    mean /= sc.truth.count();
    double sum_g = 0.0, want = mean;
    for (std::size_t i = 0; i < g.size(); ++i) {
      sum_g += g[i];
      want -= sc.mu[i] * m.ew[i];
    }
    CHECK(std::abs(sum_g - want) < 1e-8);
  }
}

TEST_CASE("gradient vanishes at a plateau of well-separated candidates") {
  const auto truth = gmml::MixtureModel::line(V{-20.0, 20.0, 200.0});
  const V g = gmml::population_gradient(V{-20.0, 20.0, 200.0}, truth, kQuad);
  for (double gi : g) CHECK(std::abs(gi) < 1e-9);
}

TEST_CASE("hessian matches central finite differences of the gradient") {
  gmml::Rng rng(517);
  const double h = 1e-4;
  for (int rep = 0; rep < 50; ++rep) {
    const Scenario sc = random_scenario(rng, 4);
    const Eigen::MatrixXd hess =
        gmml::population_hessian(sc.mu, sc.truth, kQuad);
    const auto n = static_cast<Eigen::Index>(sc.mu.size());
    Eigen::MatrixXd fd(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      V up = sc.mu, dn = sc.mu;
      up[static_cast<std::size_t>(j)] += h;
      dn[static_cast<std::size_t>(j)] -= h;
      const V gu = gmml::population_gradient(up, sc.truth, kQuad);
      const V gd = gmml::population_gradient(dn, sc.truth, kQuad);
      for (Eigen::Index i = 0; i < n; ++i) {
        fd(i, j) = (gu[static_cast<std::size_t>(i)] -
                    gd[static_cast<std::size_t>(i)]) /
                   (2.0 * h);
      }
    }
    const double denom = std::max(1.0, hess.norm());
    CHECK((fd - hess).norm() / denom <= 1e-5);
  }
}

TEST_CASE("hessian of a single candidate is exactly minus one") {
  const auto truth = gmml::MixtureModel::line(V{3.0});
  const Eigen::MatrixXd h = gmml::population_hessian(V{0.5}, truth, kQuad);
  REQUIRE(h.rows() == 1);
  CHECK(std::abs(h(0, 0) + 1.0) < 1e-12);
}

TEST_CASE("hessian at the merged origin has one positive and one negative eigenvalue") {
  // With both candidates at 0 under truth {-4, 4} the weights are identically
  // 1/2 and E[X^2] = 17, so H = [[3.75, -4.25], [-4.25, 3.75]].
  const auto truth = gmml::MixtureModel::line(V{-4.0, 4.0});
  const Eigen::MatrixXd h =
      gmml::population_hessian(V{0.0, 0.0}, truth, kQuad);
  CHECK(std::abs(h(0, 0) - 3.75) < 1e-9);
  CHECK(std::abs(h(1, 1) - 3.75) < 1e-9);
  CHECK(std::abs(h(0, 1) + 4.25) < 1e-9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  CHECK(std::abs(es.eigenvalues()(0) + 0.5) < 1e-9);
  CHECK(std::abs(es.eigenvalues()(1) - 8.0) < 1e-9);
}

TEST_CASE("q matrix of a single candidate is zero") {
  const auto truth = gmml::MixtureModel::line(V{-2.0, 2.0});
  const Eigen::MatrixXd q = gmml::q_matrix(V{0.7}, truth, kQuad);
  REQUIRE(q.rows() == 1);
  CHECK(std::abs(q(0, 0)) < 1e-12);
}

TEST_CASE("q matrix is positive semidefinite across random scenarios") {
  gmml::Rng rng(617);
  for (int rep = 0; rep < 100; ++rep) {
    const Scenario sc = random_scenario(rng, 5);
    const Eigen::MatrixXd q = gmml::q_matrix(sc.mu, sc.truth, kQuad);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
    CHECK(es.eigenvalues()(0) >= -1e-8);
  }
}

TEST_CASE("q quadratic form equals its expanded expectation") {
  gmml::Rng rng(618);
  for (int rep = 0; rep < 20; ++rep) {
    const Scenario sc = random_scenario(rng, 5);
    const std::size_t m = sc.mu.size();
    V v(m);
    for (double& vi : v) vi = rng.uniform(-1.0, 1.0);
    const Eigen::MatrixXd q = gmml::q_matrix(sc.mu, sc.truth, kQuad);
    Eigen::Map<const Eigen::VectorXd> vv(v.data(),
                                         static_cast<Eigen::Index>(m));
    const double form = vv.transpose() * q * vv;
    // v' Q v = E[ sum_i v_i^2 w_i (x - mu_i)^2 - (sum_i v_i w_i (x - mu_i))^2 ].
    V w(m);
    const double expanded = gmml::expect_under_mixture(
        [&](double x) {
          gmml::responsibilities_1d(x, sc.mu, w);
          double s2 = 0.0, s1 = 0.0;
          for (std::size_t i = 0; i < m; ++i) {
            const double z = x - sc.mu[i];
            s2 += v[i] * v[i] * w[i] * z * z;
            s1 += v[i] * w[i] * z;
          }
          return s2 - s1 * s1;
        },
        sc.truth, kQuad);
    CHECK(std::abs(form - expanded) < 1e-9);
  }
}

TEST_CASE("hessian decomposes as q minus the weight diagonal") {
  gmml::Rng rng(619);
  for (int rep = 0; rep < 25; ++rep) {
    const Scenario sc = random_scenario(rng, 5);
    const Eigen::MatrixXd h = gmml::population_hessian(sc.mu, sc.truth, kQuad);
    const Eigen::MatrixXd q = gmml::q_matrix(sc.mu, sc.truth, kQuad);
    const auto m = gmml::weight_moments(sc.mu, sc.truth, kQuad);
    Eigen::MatrixXd want = q;
    for (std::size_t i = 0; i < sc.mu.size(); ++i) {
      want(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -=
          m.ew[i];
    }
    CHECK((h - want).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("identity plus scaled hessian stays positive definite") {
  gmml::Rng rng(620);
  for (int rep = 0; rep < 30; ++rep) {
    const Scenario sc = random_scenario(rng, 5);
    const Eigen::MatrixXd h = gmml::population_hessian(sc.mu, sc.truth, kQuad);
    const auto n = h.rows();
    for (double s : {0.1, 0.5, 0.9}) {
      const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + s * h;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      CHECK(es.eigenvalues()(0) > 0.0);
    }
  }
}

TEST_CASE("true centers maximize the population log-likelihood") {
  gmml::Rng rng(717);
  for (int rep = 0; rep < 30; ++rep) {
    const int mt = 1 + rng.uniform_int(3);
    V tc(mt), mu(mt);
    for (double& c : tc) c = rng.uniform(-6.0, 6.0);
    for (double& c : mu) c = rng.uniform(-6.0, 6.0);
    const auto truth = gmml::MixtureModel::line(tc);
    const double at_truth = gmml::population_log_likelihood(tc, truth, kQuad);
    const double at_mu = gmml::population_log_likelihood(mu, truth, kQuad);
    CHECK(at_mu <= at_truth + 1e-8);
  }
}

TEST_CASE("duplicated candidates reproduce the single-component density") {
  const auto truth = gmml::MixtureModel::line(V{0.0});
  const double single =
      gmml::population_log_likelihood(V{0.0}, truth, kQuad);
  const double doubled =
      gmml::population_log_likelihood(V{0.0, 0.0}, truth, kQuad);
  CHECK(std::abs(single - doubled) < 1e-12);
}

TEST_CASE("combined evaluation agrees exactly with the standalone operations") {
  gmml::Rng rng(818);
  for (int rep = 0; rep < 10; ++rep) {
    const Scenario sc = random_scenario(rng, 5);
    const auto ev = gmml::population_eval(sc.mu, sc.truth, kQuad);
    CHECK(ev.loglik ==
          gmml::population_log_likelihood(sc.mu, sc.truth, kQuad));
    const V g = gmml::population_gradient(sc.mu, sc.truth, kQuad);
    const auto m = gmml::weight_moments(sc.mu, sc.truth, kQuad);
    REQUIRE(ev.gradient.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(ev.gradient[i] == g[i]);
      CHECK(ev.ew[i] == m.ew[i]);
    }
  }
}

TEST_CASE("population calculus rejects malformed inputs") {
  const auto truth = gmml::MixtureModel::line(V{-1.0, 1.0});
  CHECK_THROWS_AS(gmml::population_log_likelihood(V{}, truth, kQuad),
                  std::invalid_argument);
  const gmml::MixtureModel planar(V{0.0, 0.0, 1.0, 1.0}, 2);
  CHECK_THROWS_AS(gmml::population_log_likelihood(V{0.0}, planar, kQuad),
                  std::invalid_argument);
}
