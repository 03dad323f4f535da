#include "gmml/surface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "gmml/parallel.hpp"
#include "gmml/population.hpp"

namespace gmml {

std::vector<SurfaceCritical> SurfaceResult::maxima() const {
  std::vector<SurfaceCritical> out;
  for (const SurfaceCritical& c : criticals) {
    if (c.kind == CriticalKind::kLocalMaximum) out.push_back(c);
  }
  return out;
}

namespace {

/// First-order ascent refinement for grid cells that look like maxima.
std::vector<double> refine_max(std::vector<double> mu,
                               const MixtureModel& truth,
                               const QuadratureSpec& quad) {
  const StoppingRule stop{5000, 1e-12, 1e-9};
  const EmTrajectory traj =
      run_population(std::move(mu), PopulationStepKind::kFirstOrder, 0.5, stop,
                     truth, quad);
  return traj.final_iterate();
}

/// Damped Newton iteration on the gradient for cells that look like saddles;
/// returns empty when the iteration leaves the search box or stalls.
std::vector<double> refine_newton(std::vector<double> mu,
                                  const MixtureModel& truth,
                                  const QuadratureSpec& quad, double lo,
                                  double hi) {
  const double margin = 1.0 + 0.1 * (hi - lo);
  for (int t = 0; t < 60; ++t) {
    const std::vector<double> g = population_gradient(mu, truth, quad);
    double gnorm = 0.0;
    for (const double x : g) gnorm += x * x;
    if (std::sqrt(gnorm) <= 1e-12) return mu;

    const Eigen::MatrixXd h = population_hessian(mu, truth, quad);
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(),
                                               static_cast<Eigen::Index>(g.size()));
    const Eigen::VectorXd step = h.fullPivLu().solve(gv);
    if (!step.allFinite()) return {};

    double max_step = 0.0;
    for (Eigen::Index i = 0; i < step.size(); ++i) {
      // Damp long steps so a near-singular Hessian cannot launch the iterate.
      const double s = std::clamp(step[i], -1.0, 1.0);
      mu[static_cast<std::size_t>(i)] -= s;
      max_step = std::max(max_step, std::abs(s));
    }
    for (const double x : mu) {
      if (x < lo - margin || x > hi + margin) return {};
    }
    if (max_step <= 1e-13) return mu;
  }
  return mu;
}

}  // namespace

SurfaceResult evaluate_surface(const MixtureModel& truth,
                               const SurfaceSpec& spec,
                               const QuadratureSpec& quad, int threads) {
  if (truth.dim() != 1) {
    throw std::invalid_argument("evaluate_surface: truth must be 1-d");
  }
  if (!(spec.step > 0.0) || !(spec.hi > spec.lo)) {
    throw std::invalid_argument("evaluate_surface: bad grid bounds");
  }

  SurfaceResult result;
  const int n =
      static_cast<int>(std::llround((spec.hi - spec.lo) / spec.step)) + 1;
  result.n_per_axis = n;
  result.rows.resize(static_cast<std::size_t>(n) * n);

  parallel_for(n, threads, [&](std::int64_t i) {
    std::vector<double> mu(2);
    mu[0] = spec.lo + spec.step * static_cast<double>(i);
    for (int j = 0; j < n; ++j) {
      mu[1] = spec.lo + spec.step * j;
      const PopulationEval ev = population_eval(mu, truth, quad);
      SurfaceRow& row =
          result.rows[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
      row.mu1 = mu[0];
      row.mu2 = mu[1];
      row.loglik = ev.loglik;
      row.grad_norm = std::sqrt(ev.gradient[0] * ev.gradient[0] +
                                ev.gradient[1] * ev.gradient[1]);
    }
  });

  // Candidate critical cells: strict 8-neighbor maxima of L, and 8-neighbor
  // minima of the gradient norm below the saddle cutoff.
  auto at = [&](int i, int j) -> const SurfaceRow& {
    return result.rows[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
  };
  std::vector<std::vector<double>> refined;
  for (int i = 1; i + 1 < n; ++i) {
    for (int j = 1; j + 1 < n; ++j) {
      bool is_max = true;
      bool is_grad_min = at(i, j).grad_norm <= spec.saddle_grad_cut;
      for (int di = -1; di <= 1 && (is_max || is_grad_min); ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          if (at(i + di, j + dj).loglik >= at(i, j).loglik) is_max = false;
          if (at(i + di, j + dj).grad_norm < at(i, j).grad_norm) {
            is_grad_min = false;
          }
        }
      }
      if (!is_max && !is_grad_min) continue;
      const std::vector<double> start{at(i, j).mu1, at(i, j).mu2};
      std::vector<double> point =
          is_max ? refine_max(start, truth, quad)
                 : refine_newton(start, truth, quad, spec.lo, spec.hi);
      if (!point.empty()) refined.push_back(std::move(point));
    }
  }

  for (const std::vector<double>& point : refined) {
    bool duplicate = false;
    for (const SurfaceCritical& c : result.criticals) {
      const double dx = c.mu1 - point[0];
      const double dy = c.mu2 - point[1];
      if (std::sqrt(dx * dx + dy * dy) <= spec.max_dedupe_dist) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    const CriticalPointReport report =
        classify_critical_point(point, truth, quad);
    SurfaceCritical c;
    c.mu1 = point[0];
    c.mu2 = point[1];
    c.loglik = population_log_likelihood(point, truth, quad);
    c.grad_norm = report.grad_norm;
    c.kind = report.kind;
    result.criticals.push_back(c);
  }
  std::sort(result.criticals.begin(), result.criticals.end(),
            [](const SurfaceCritical& a, const SurfaceCritical& b) {
              return a.loglik > b.loglik;
            });
  return result;
}

}  // namespace gmml
