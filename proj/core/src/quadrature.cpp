#include "gmml/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>

#include "gmml/density.hpp"

namespace gmml {
namespace {

// Gauss-Hermite nodes/weights by eigendecomposition of the Jacobi matrix
// (Golub-Welsch). Offsets are pre-scaled by sqrt(2) so that
// E[f(N(mu,1))] = sum_k weights[k] * f(mu + offsets[k]).
QuadRule build_hermite(int order) {
  const int n = order;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 0; k < n - 1; ++k) sub[k] = std::sqrt((k + 1) / 2.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("quadrature: Hermite eigensolve failed");
  }

  QuadRule rule;
  rule.offsets.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double sqrt2 = std::sqrt(2.0);
  for (int k = 0; k < n; ++k) {
    rule.offsets[static_cast<std::size_t>(k)] =
        sqrt2 * solver.eigenvalues()[k];
    // Normalized weight = squared first component of the unit eigenvector;
    // the sqrt(pi) total mass cancels against the N(0,1) normalization.
    const double v0 = solver.eigenvectors()(0, k);
    rule.weights[static_cast<std::size_t>(k)] = v0 * v0;
  }
  return rule;
}

QuadRule build_trapezoid(int order, double radius) {
  QuadRule rule;
  rule.offsets.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const double h = 2.0 * radius / (order - 1);
  for (int k = 0; k < order; ++k) {
    const double u = -radius + h * k;
    const double coeff = (k == 0 || k == order - 1) ? 0.5 : 1.0;
    rule.offsets[static_cast<std::size_t>(k)] = u;
    rule.weights[static_cast<std::size_t>(k)] =
        h * coeff * std::exp(-0.5 * u * u - kLogSqrt2Pi);
  }
  return rule;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (order < 16) {
    throw std::invalid_argument("quadrature: order must be >= 16");
  }
  if (scheme == QuadScheme::kTrapezoid && truncation_radius < 8.0) {
    throw std::invalid_argument(
        "quadrature: truncation radius must be >= 8 standard deviations");
  }
}

const QuadRule& quad_rule(const QuadratureSpec& spec) {
  spec.validate();
  using Key = std::tuple<int, int, double>;
  static std::mutex mutex;
  static std::map<Key, QuadRule> cache;  // node-based: references stay valid

  const Key key{static_cast<int>(spec.scheme), spec.order,
                spec.scheme == QuadScheme::kTrapezoid ? spec.truncation_radius
                                                      : 0.0};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    QuadRule rule = spec.scheme == QuadScheme::kHermite
                        ? build_hermite(spec.order)
                        : build_trapezoid(spec.order, spec.truncation_radius);
    it = cache.emplace(key, std::move(rule)).first;
  }
  return it->second;
}

double expect_under_mixture(const std::function<double(double)>& f,
                            const MixtureModel& truth,
                            const QuadratureSpec& spec) {
  if (truth.dim() != 1) {
    throw std::invalid_argument("expect_under_mixture requires 1-d models");
  }
  const QuadRule& rule = quad_rule(spec);
  const auto& centers = truth.centers1d();
  double acc = 0.0;
  for (const double c : centers) {
    double comp = 0.0;
    for (std::size_t k = 0; k < rule.offsets.size(); ++k) {
      comp += rule.weights[k] * f(c + rule.offsets[k]);
    }
    acc += comp;
  }
  return acc / static_cast<double>(centers.size());
}

}  // namespace gmml
