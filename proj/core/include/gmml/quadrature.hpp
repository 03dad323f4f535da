#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gmml/model.hpp"

namespace gmml {

enum class QuadScheme {
  kHermite,    // Gauss-Hermite, nodes/weights by Golub-Welsch
  kTrapezoid,  // truncated trapezoid rule, used to validate the primary scheme
};

/// Deterministic quadrature for expectations under a unit-variance mixture.
/// The rule is applied per true component after the change of variable
/// x = mu_j + offset, so accuracy does not depend on center magnitudes.
struct QuadratureSpec {
  int order = 200;                         // nodes per component
  QuadScheme scheme = QuadScheme::kHermite;
  double truncation_radius = 12.0;         // half-width in std devs (trapezoid)

  void validate() const;  // throws std::invalid_argument
};

/// Standardized rule: E[f(N(mu,1))] ~= sum_k weight[k] * f(mu + offset[k]).
/// Weights include the Gaussian factor and sum to 1 up to roundoff.
struct QuadRule {
  std::vector<double> offsets;
  std::vector<double> weights;
};

/// Cached rule lookup; thread-safe.
const QuadRule& quad_rule(const QuadratureSpec& spec);

/// E[f(X)] for X ~ equal-weight mixture with the given 1-d true centers.
double expect_under_mixture(const std::function<double(double)>& f,
                            const MixtureModel& truth,
                            const QuadratureSpec& spec);

}  // namespace gmml
