#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmml/model.hpp"
#include "gmml/population.hpp"
#include "gmml/quadrature.hpp"

namespace gmml {

/// Iteration is stopped by iterate movement (max-norm), optionally by the
/// gradient norm, and always by the iteration cap. grad_tol = 0 disables the
/// gradient test.
struct StoppingRule {
  int max_iters = 10000;
  double step_tol = 1e-10;
  double grad_tol = 0.0;

  void validate() const;
};

/// Three disjoint 1-d regions used to count centers along a trajectory:
/// two intervals plus the complement of a ball around the origin.
struct RegionSet {
  double left_lo = 0, left_hi = 0;
  double right_lo = 0, right_hi = 0;
  double far_radius = 0;  // region 3 = { |x| > far_radius }

  std::array<int, 3> counts(std::span<const double> mu) const;
};

/// Recorded optimization path. Full history is kept for the first
/// kRecordCap iterations; past the cap only every 10th iterate (and always
/// the final one) is retained. All series share the same index set `steps`.
struct EmTrajectory {
  static constexpr int kRecordCap = 10000;

  std::vector<int> steps;
  std::vector<std::vector<double>> iterates;
  std::vector<double> likelihoods;
  std::vector<double> grad_norms;
  std::vector<std::array<int, 3>> urn_counts;  // empty unless regions given

  bool converged = false;
  int total_iters = 0;

  const std::vector<double>& final_iterate() const { return iterates.back(); }
  double final_likelihood() const { return likelihoods.back(); }
  double final_grad_norm() const { return grad_norms.back(); }
};

/// One EM step on finite data (any dimension): mu_i <- mean of the data
/// weighted by responsibilities.
std::vector<std::vector<double>> em_step_sample(
    const std::vector<std::vector<double>>& data,
    const std::vector<std::vector<double>>& mu);

/// One population EM step (1-d): mu_i <- E[w_i X] / E[w_i].
std::vector<double> em_step_population(std::span<const double> mu,
                                       const MixtureModel& truth,
                                       const QuadratureSpec& spec);

/// One first-order (gradient) EM step: mu_i <- mu_i + s E[w_i(X)(X - mu_i)],
/// s in (0, 1). Coincides with the s-interpolation of the EM step.
std::vector<double> first_order_em_step(std::span<const double> mu,
                                        const MixtureModel& truth,
                                        const QuadratureSpec& spec,
                                        double stepsize = 0.5);

enum class PopulationStepKind { kEm, kFirstOrder };

/// Iterate a population stepper from mu0, recording likelihood, gradient
/// norm, and (when regions are supplied) per-region center counts.
EmTrajectory run_population(std::vector<double> mu0, PopulationStepKind kind,
                            double stepsize, const StoppingRule& stop,
                            const MixtureModel& truth,
                            const QuadratureSpec& spec,
                            const RegionSet* regions = nullptr);

/// Iterate sample EM on finite data, recording the sample log-likelihood and
/// the norm of the sample gradient.
EmTrajectory run_sample(std::vector<std::vector<double>> mu0,
                        const std::vector<std::vector<double>>& data,
                        const StoppingRule& stop);

enum class CriticalKind { kLocalMaximum, kStrictSaddle, kIndeterminate };

const char* to_string(CriticalKind k);

/// Classification of a candidate point by gradient norm and Hessian spectrum.
/// With grad_norm <= grad_tol: strict-saddle when the largest eigenvalue
/// exceeds eig_tol, local-maximum when no eigenvalue does. Points that fail
/// the gradient test are indeterminate.
struct CriticalPointReport {
  std::vector<double> mu;
  double grad_norm = 0.0;
  std::vector<double> eigenvalues;  // ascending
  CriticalKind kind = CriticalKind::kIndeterminate;
};

CriticalPointReport classify_critical_point(std::span<const double> mu,
                                            const MixtureModel& truth,
                                            const QuadratureSpec& spec,
                                            double grad_tol = 1e-7,
                                            double eig_tol = 1e-5);

}  // namespace gmml
