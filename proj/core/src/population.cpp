#include "gmml/population.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gmml/density.hpp"

namespace gmml {
namespace {

void require_1d(const MixtureModel& truth) {
  if (truth.dim() != 1) {
    throw std::invalid_argument("population calculus requires 1-d models");
  }
}

/// Visits every (true component, node) pair once, handing the sink the
/// abscissa x, its mixture mass q, the posterior weights w(x), and
/// log p(x | mu). Every public operation below runs through this kernel, so
/// overlapping outputs (likelihood, gradient, ew) agree exactly across calls.
template <typename Sink>
void scan(std::span<const double> mu, const MixtureModel& truth,
          const QuadratureSpec& spec, Sink&& sink) {
  require_1d(truth);
  if (mu.empty()) {
    throw std::invalid_argument("population: empty candidate vector");
  }
  const QuadRule& rule = quad_rule(spec);
  const auto& tc = truth.centers1d();
  const double tmass = 1.0 / static_cast<double>(tc.size());
  const double logm = std::log(static_cast<double>(mu.size()));

  std::vector<double> w(mu.size());
  for (const double c : tc) {
    for (std::size_t k = 0; k < rule.offsets.size(); ++k) {
      const double x = c + rule.offsets[k];
      // Posterior weights and log density in one shifted pass; exponents are
      // centered on the best component so any center magnitude is safe.
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = x - mu[i];
        w[i] = -0.5 * d * d;
        if (w[i] > best) best = w[i];
      }
      double total = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(w[i] - best);
        total += w[i];
      }
      for (std::size_t i = 0; i < w.size(); ++i) w[i] /= total;
      const double logp = best + std::log(total) - logm - kLogSqrt2Pi;
      sink(x, tmass * rule.weights[k], std::span<const double>(w), logp);
    }
  }
}

}  // namespace

PopulationEval population_eval(std::span<const double> mu,
                               const MixtureModel& truth,
                               const QuadratureSpec& spec) {
  PopulationEval out;
  out.gradient.assign(mu.size(), 0.0);
  out.ew.assign(mu.size(), 0.0);
  scan(mu, truth, spec,
       [&](double x, double q, std::span<const double> w, double logp) {
         out.loglik += q * logp;
         for (std::size_t i = 0; i < w.size(); ++i) {
           out.ew[i] += q * w[i];
           out.gradient[i] += q * w[i] * (x - mu[i]);
         }
       });
  return out;
}

double population_log_likelihood(std::span<const double> mu,
                                 const MixtureModel& truth,
                                 const QuadratureSpec& spec) {
  double acc = 0.0;
  scan(mu, truth, spec,
       [&](double, double q, std::span<const double>, double logp) {
         acc += q * logp;
       });
  return acc;
}

WeightMoments weight_moments(std::span<const double> mu,
                             const MixtureModel& truth,
                             const QuadratureSpec& spec) {
  WeightMoments m;
  m.ew.assign(mu.size(), 0.0);
  m.ewx.assign(mu.size(), 0.0);
  scan(mu, truth, spec,
       [&](double x, double q, std::span<const double> w, double) {
         for (std::size_t i = 0; i < w.size(); ++i) {
           m.ew[i] += q * w[i];
           m.ewx[i] += q * w[i] * x;
         }
       });
  return m;
}

std::vector<double> population_gradient(std::span<const double> mu,
                                        const MixtureModel& truth,
                                        const QuadratureSpec& spec) {
  std::vector<double> g(mu.size(), 0.0);
  scan(mu, truth, spec,
       [&](double x, double q, std::span<const double> w, double) {
         for (std::size_t i = 0; i < w.size(); ++i) {
           g[i] += q * w[i] * (x - mu[i]);
         }
       });
  return g;
}

namespace {

/// Q and ew from one pass; the Hessian is Q - diag(ew) by construction.
void q_and_ew(std::span<const double> mu, const MixtureModel& truth,
              const QuadratureSpec& spec, Eigen::MatrixXd& q_out,
              std::vector<double>& ew_out) {
  const auto n = static_cast<Eigen::Index>(mu.size());
  q_out = Eigen::MatrixXd::Zero(n, n);
  ew_out.assign(mu.size(), 0.0);
  std::vector<double> z(mu.size());
  scan(mu, truth, spec,
       [&](double x, double q, std::span<const double> w, double) {
         for (std::size_t i = 0; i < w.size(); ++i) z[i] = x - mu[i];
         for (std::size_t i = 0; i < w.size(); ++i) {
           ew_out[i] += q * w[i];
           q_out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) +=
               q * (w[i] - w[i] * w[i]) * z[i] * z[i];
           for (std::size_t j = i + 1; j < w.size(); ++j) {
             q_out(static_cast<Eigen::Index>(i),
                   static_cast<Eigen::Index>(j)) -=
                 q * w[i] * w[j] * z[i] * z[j];
           }
         }
       });
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) q_out(j, i) = q_out(i, j);
  }
}

}  // namespace

Eigen::MatrixXd population_hessian(std::span<const double> mu,
                                   const MixtureModel& truth,
                                   const QuadratureSpec& spec) {
  Eigen::MatrixXd h;
  std::vector<double> ew;
  q_and_ew(mu, truth, spec, h, ew);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= ew[i];
  }
  return h;
}

Eigen::MatrixXd q_matrix(std::span<const double> mu, const MixtureModel& truth,
                         const QuadratureSpec& spec) {
  Eigen::MatrixXd q;
  std::vector<double> ew;
  q_and_ew(mu, truth, spec, q, ew);
  return q;
}

}  // namespace gmml
