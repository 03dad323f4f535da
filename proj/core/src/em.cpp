#include "gmml/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "gmml/density.hpp"

namespace gmml {

void StoppingRule::validate() const {
  if (max_iters < 1) throw std::invalid_argument("stop: max_iters must be >= 1");
  if (!(step_tol > 0.0)) throw std::invalid_argument("stop: step_tol must be > 0");
  if (grad_tol < 0.0) throw std::invalid_argument("stop: grad_tol must be >= 0");
}

std::array<int, 3> RegionSet::counts(std::span<const double> mu) const {
  std::array<int, 3> n{0, 0, 0};
  for (const double x : mu) {
    if (left_lo <= x && x <= left_hi) ++n[0];
    if (right_lo <= x && x <= right_hi) ++n[1];
    if (std::abs(x) > far_radius) ++n[2];
  }
  return n;
}

std::vector<std::vector<double>> em_step_sample(
    const std::vector<std::vector<double>>& data,
    const std::vector<std::vector<double>>& mu) {
  if (data.empty()) throw std::invalid_argument("em_step_sample: empty data");
  const std::size_t m = mu.size();
  const std::size_t d = mu[0].size();

  std::vector<double> flat;
  flat.reserve(m * d);
  for (const auto& c : mu) {
    if (c.size() != d) {
      throw std::invalid_argument("em_step_sample: ragged center list");
    }
    flat.insert(flat.end(), c.begin(), c.end());
  }
  const MixtureModel model(std::move(flat), static_cast<int>(d));

  std::vector<double> wsum(m, 0.0);
  std::vector<std::vector<double>> wxsum(m, std::vector<double>(d, 0.0));
  for (const auto& x : data) {
    if (x.size() != d) {
      throw std::invalid_argument("em_step_sample: data/center dim mismatch");
    }
    const Responsibilities r = responsibilities(x, model);
    for (std::size_t i = 0; i < m; ++i) {
      wsum[i] += r.weights[i];
      for (std::size_t k = 0; k < d; ++k) {
        wxsum[i][k] += r.weights[i] * x[k];
      }
    }
  }

  std::vector<std::vector<double>> out(m, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < d; ++k) out[i][k] = wxsum[i][k] / wsum[i];
  }
  return out;
}

std::vector<double> em_step_population(std::span<const double> mu,
                                       const MixtureModel& truth,
                                       const QuadratureSpec& spec) {
  // ewx/ew == mu + gradient/ew; the centered form keeps full precision when
  // centers are huge.
  const PopulationEval eval = population_eval(mu, truth, spec);
  std::vector<double> out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out[i] = mu[i] + eval.gradient[i] / eval.ew[i];
  }
  return out;
}

std::vector<double> first_order_em_step(std::span<const double> mu,
                                        const MixtureModel& truth,
                                        const QuadratureSpec& spec,
                                        double stepsize) {
  if (!(stepsize > 0.0 && stepsize < 1.0)) {
    throw std::invalid_argument("first_order_em_step: stepsize must be in (0,1)");
  }
  const std::vector<double> g = population_gradient(mu, truth, spec);
  std::vector<double> out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) out[i] = mu[i] + stepsize * g[i];
  return out;
}

namespace {

double l2_norm(std::span<const double> v) {
  double q = 0.0;
  for (const double x : v) q += x * x;
  return std::sqrt(q);
}

/// Append-one-row helper enforcing the recording policy: full history up to
/// kRecordCap, every 10th iterate beyond it. Returns true when recorded.
bool record_row(EmTrajectory& traj, int t, const std::vector<double>& mu,
                double loglik, double grad_norm, const RegionSet* regions) {
  if (t > EmTrajectory::kRecordCap && t % 10 != 0) return false;
  traj.steps.push_back(t);
  traj.iterates.push_back(mu);
  traj.likelihoods.push_back(loglik);
  traj.grad_norms.push_back(grad_norm);
  if (regions != nullptr) traj.urn_counts.push_back(regions->counts(mu));
  return true;
}

void force_final_row(EmTrajectory& traj, int t, const std::vector<double>& mu,
                     double loglik, double grad_norm,
                     const RegionSet* regions) {
  if (!traj.steps.empty() && traj.steps.back() == t) return;
  traj.steps.push_back(t);
  traj.iterates.push_back(mu);
  traj.likelihoods.push_back(loglik);
  traj.grad_norms.push_back(grad_norm);
  if (regions != nullptr) traj.urn_counts.push_back(regions->counts(mu));
}

}  // namespace

EmTrajectory run_population(std::vector<double> mu0, PopulationStepKind kind,
                            double stepsize, const StoppingRule& stop,
                            const MixtureModel& truth,
                            const QuadratureSpec& spec,
                            const RegionSet* regions) {
  stop.validate();
  if (kind == PopulationStepKind::kFirstOrder &&
      !(stepsize > 0.0 && stepsize < 1.0)) {
    throw std::invalid_argument("run_population: stepsize must be in (0,1)");
  }

  EmTrajectory traj;
  std::vector<double> mu = std::move(mu0);
  PopulationEval eval = population_eval(mu, truth, spec);
  double gnorm = l2_norm(eval.gradient);
  record_row(traj, 0, mu, eval.loglik, gnorm, regions);

  if (stop.grad_tol > 0.0 && gnorm <= stop.grad_tol) {
    traj.converged = true;
    traj.total_iters = 0;
    return traj;
  }

  int t = 0;
  for (t = 1; t <= stop.max_iters; ++t) {
    double movement = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double step = kind == PopulationStepKind::kEm
                              ? eval.gradient[i] / eval.ew[i]
                              : stepsize * eval.gradient[i];
      movement = std::max(movement, std::abs(step));
      mu[i] += step;
    }
    eval = population_eval(mu, truth, spec);
    gnorm = l2_norm(eval.gradient);
    record_row(traj, t, mu, eval.loglik, gnorm, regions);

    if (movement <= stop.step_tol ||
        (stop.grad_tol > 0.0 && gnorm <= stop.grad_tol)) {
      traj.converged = true;
      break;
    }
  }
  traj.total_iters = std::min(t, stop.max_iters);
  force_final_row(traj, traj.total_iters, mu, eval.loglik, gnorm, regions);
  return traj;
}

namespace {

/// One fused pass over the data: sample log-likelihood, per-component weight
/// sums, and centered weighted residual sums (for gradient and EM step).
struct SampleEval {
  double loglik = 0.0;
  std::vector<double> wsum;                   // per component
  std::vector<std::vector<double>> residual;  // sum of w * (x - mu) per comp
  double grad_norm = 0.0;
};

SampleEval sample_eval(const std::vector<std::vector<double>>& data,
                       const std::vector<std::vector<double>>& mu) {
  const std::size_t m = mu.size();
  const std::size_t d = mu[0].size();
  SampleEval ev;
  ev.wsum.assign(m, 0.0);
  ev.residual.assign(m, std::vector<double>(d, 0.0));

  std::vector<double> logw(m);
  for (const auto& x : data) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      double q = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = x[k] - mu[i][k];
        q += diff * diff;
      }
      logw[i] = -0.5 * q;
      best = std::max(best, logw[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      logw[i] = std::exp(logw[i] - best);
      total += logw[i];
    }
    ev.loglik += best + std::log(total) -
                 std::log(static_cast<double>(m)) -
                 static_cast<double>(d) * kLogSqrt2Pi;
    for (std::size_t i = 0; i < m; ++i) {
      const double w = logw[i] / total;
      ev.wsum[i] += w;
      for (std::size_t k = 0; k < d; ++k) {
        ev.residual[i][k] += w * (x[k] - mu[i][k]);
      }
    }
  }
  ev.loglik /= static_cast<double>(data.size());

  double q = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double g = ev.residual[i][k] / static_cast<double>(data.size());
      q += g * g;
    }
  }
  ev.grad_norm = std::sqrt(q);
  return ev;
}

}  // namespace

EmTrajectory run_sample(std::vector<std::vector<double>> mu0,
                        const std::vector<std::vector<double>>& data,
                        const StoppingRule& stop) {
  stop.validate();
  if (data.empty()) throw std::invalid_argument("run_sample: empty data");
  if (mu0.empty()) throw std::invalid_argument("run_sample: empty centers");

  const std::size_t m = mu0.size();
  const std::size_t d = mu0[0].size();
  auto flatten = [&](const std::vector<std::vector<double>>& mu) {
    std::vector<double> flat;
    flat.reserve(m * d);
    for (const auto& c : mu) flat.insert(flat.end(), c.begin(), c.end());
    return flat;
  };

  EmTrajectory traj;
  std::vector<std::vector<double>> mu = std::move(mu0);
  SampleEval ev = sample_eval(data, mu);
  record_row(traj, 0, flatten(mu), ev.loglik, ev.grad_norm, nullptr);

  if (stop.grad_tol > 0.0 && ev.grad_norm <= stop.grad_tol) {
    traj.converged = true;
    traj.total_iters = 0;
    return traj;
  }

  int t = 0;
  for (t = 1; t <= stop.max_iters; ++t) {
    double movement = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        const double step = ev.residual[i][k] / ev.wsum[i];
        movement = std::max(movement, std::abs(step));
        mu[i][k] += step;
      }
    }
    ev = sample_eval(data, mu);
    record_row(traj, t, flatten(mu), ev.loglik, ev.grad_norm, nullptr);

    if (movement <= stop.step_tol ||
        (stop.grad_tol > 0.0 && ev.grad_norm <= stop.grad_tol)) {
      traj.converged = true;
      break;
    }
  }
  traj.total_iters = std::min(t, stop.max_iters);
  force_final_row(traj, traj.total_iters, flatten(mu), ev.loglik, ev.grad_norm,
                  nullptr);
  return traj;
}

const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::kLocalMaximum: return "local-maximum";
    case CriticalKind::kStrictSaddle: return "strict-saddle";
    case CriticalKind::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

CriticalPointReport classify_critical_point(std::span<const double> mu,
                                            const MixtureModel& truth,
                                            const QuadratureSpec& spec,
                                            double grad_tol, double eig_tol) {
  CriticalPointReport report;
  report.mu.assign(mu.begin(), mu.end());

  const std::vector<double> g = population_gradient(mu, truth, spec);
  report.grad_norm = l2_norm(g);

  const Eigen::MatrixXd h = population_hessian(mu, truth, spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  report.eigenvalues.assign(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + mu.size());

  if (report.grad_norm > grad_tol) {
    report.kind = CriticalKind::kIndeterminate;
  } else if (report.eigenvalues.back() > eig_tol) {
    report.kind = CriticalKind::kStrictSaddle;
  } else {
    report.kind = CriticalKind::kLocalMaximum;
  }
  return report;
}

}  // namespace gmml
