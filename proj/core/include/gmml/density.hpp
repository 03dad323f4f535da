#pragma once

#include <span>
#include <vector>

#include "gmml/model.hpp"
#include "gmml/rng.hpp"

namespace gmml {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// log of the largest finite sum exp(v_i - max) can represent; shifts happen
/// against the running maximum so entries like -5e17 are harmless.
///
/// Addends are accumulated in descending order, which makes the result
/// invariant under permutation of the inputs (bit for bit) and slightly more
/// accurate than left-to-right summation.
double logsumexp(std::span<const double> v);

/// log N(x | mu, I_d).
double log_gaussian_pdf(std::span<const double> x, std::span<const double> mu);

/// log of the equal-weight mixture density at x.
double log_mixture_density(std::span<const double> x, const MixtureModel& model);

/// Posterior weights w_i(x), normalized and clamped to [0, 1].
Responsibilities responsibilities(std::span<const double> x,
                                  const MixtureModel& centers);

/// Allocation-free 1-d kernel behind responsibilities(); w must have one slot
/// per center.
void responsibilities_1d(double x, std::span<const double> mu,
                         std::span<double> w);

/// n labeled draws: component uniform over centers, point ~ N(center, I).
std::vector<LabeledSample> sample(const MixtureModel& model, int n, Rng& rng);

/// Smallest pairwise Euclidean distance between centers (count >= 2).
double min_separation(const MixtureModel& model);

/// Average log mixture density of the data under the given centers.
double sample_log_likelihood(const std::vector<std::vector<double>>& data,
                             const MixtureModel& model);

}  // namespace gmml
