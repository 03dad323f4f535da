#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gmml/model.hpp"
#include "gmml/quadrature.hpp"

namespace gmml {

/// First-order responsibility moments under the true mixture for a candidate
/// center vector mu. ew sums to 1; ewx sums to the mean of the true centers.
struct WeightMoments {
  std::vector<double> ew;   // E[w_i(X)]
  std::vector<double> ewx;  // E[w_i(X) X]
};

/// Population (infinite-data) log-likelihood E[log p(X | mu)], 1-d centers.
/// The candidate count may differ from the true component count.
double population_log_likelihood(std::span<const double> mu,
                                 const MixtureModel& truth,
                                 const QuadratureSpec& spec);

WeightMoments weight_moments(std::span<const double> mu,
                             const MixtureModel& truth,
                             const QuadratureSpec& spec);

/// Gradient of the population log-likelihood: E[w_i(X)(X - mu_i)].
/// Accumulated centered on each candidate, so it stays accurate at center
/// magnitudes where E[w_i X] alone would lose absolute precision.
std::vector<double> population_gradient(std::span<const double> mu,
                                        const MixtureModel& truth,
                                        const QuadratureSpec& spec);

/// Hessian of the population log-likelihood:
///   H_ii = -E[w_i] + E[(w_i - w_i^2)(X - mu_i)^2]
///   H_ij = -E[w_i w_j (X - mu_i)(X - mu_j)]
Eigen::MatrixXd population_hessian(std::span<const double> mu,
                                   const MixtureModel& truth,
                                   const QuadratureSpec& spec);

/// Positive-semidefinite part Q with H = Q - diag(E[w_i]).
Eigen::MatrixXd q_matrix(std::span<const double> mu,
                         const MixtureModel& truth,
                         const QuadratureSpec& spec);

/// Everything an iterative stepper needs from one quadrature pass: the
/// log-likelihood, the gradient, and E[w_i]. Identical in value to the
/// standalone operations above because it shares their node rule.
struct PopulationEval {
  double loglik = 0.0;
  std::vector<double> gradient;
  std::vector<double> ew;
};

PopulationEval population_eval(std::span<const double> mu,
                               const MixtureModel& truth,
                               const QuadratureSpec& spec);

}  // namespace gmml
