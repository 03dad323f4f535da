#include "gmml/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "gmml/density.hpp"
#include "gmml/parallel.hpp"
#include "gmml/population.hpp"
#include "gmml/quadrature.hpp"

namespace gmml {

std::vector<LabeledSample> random_init(const MixtureModel& truth, Rng& rng) {
  return sample(truth, truth.count(), rng);
}

bool event_e_holds(const std::vector<LabeledSample>& init,
                   const MixtureModel& truth, double radius) {
  const double r = radius < 0.0 ? static_cast<double>(init.size()) : radius;
  for (const auto& s : init) {
    const auto c = truth.center(s.component);
    double q = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double d = s.point[k] - c[k];
      q += d * d;
    }
    if (std::sqrt(q) > r) return false;
  }
  return true;
}

const char* to_string(InitRule r) {
  switch (r) {
    case InitRule::kSingleton: return "singleton";
    case InitRule::kAllOneSide: return "all-one-side";
    case InitRule::kBalancedRecurse: return "balanced-recurse";
    case InitRule::kBadSplit: return "bad-split";
  }
  return "bad-split";
}

namespace {

/// Depth-first recursion over tree nodes. Records the (left, right) counts of
/// every node where a split was computed, including the one that fails.
bool classify_rec(const std::vector<double>& pts,
                  const TreeConstructionSpec& spec, int level, double partial,
                  std::vector<LevelCounts>& levels) {
  if (pts.size() == 1) return true;  // rule (a): singleton
  if (level > spec.levels) return false;  // several points left at one leaf

  const double offset = spec.R * std::pow(spec.ratio, level - 1);
  const double hw =
      2.0 * spec.R * std::pow(spec.ratio, level) / (1.0 - spec.ratio);
  const Urn left{partial - offset, hw};
  const Urn right{partial + offset, hw};

  std::vector<double> lp, rp;
  int outside = 0;
  for (const double x : pts) {
    if (left.contains(x)) {
      lp.push_back(x);
    } else if (right.contains(x)) {
      rp.push_back(x);
    } else {
      ++outside;
    }
  }
  levels.push_back(
      {level, static_cast<int>(lp.size()), static_cast<int>(rp.size())});
  if (outside > 0) return false;
  if (lp.empty() || rp.empty()) return true;  // rule (b): all one side
  if (lp.size() != rp.size()) return false;   // rule (c) demands exact halves
  if (!classify_rec(lp, spec, level + 1, partial - offset, levels)) {
    return false;
  }
  return classify_rec(rp, spec, level + 1, partial + offset, levels);
}

}  // namespace

InitClassification classify_init(const std::vector<double>& points,
                                 const TreeConstructionSpec& spec) {
  spec.validate();
  if (points.empty()) {
    throw std::invalid_argument("classify_init: empty point set");
  }
  InitClassification out;
  if (points.size() == 1) {
    out.good = true;
    out.reason = InitRule::kSingleton;
    return out;
  }
  out.good = classify_rec(points, spec, 1, 0.0, out.levels);
  if (!out.good) {
    out.reason = InitRule::kBadSplit;
  } else {
    const LevelCounts& root = out.levels.front();
    out.reason = (root.left == 0 || root.right == 0) ? InitRule::kAllOneSide
                                                     : InitRule::kBalancedRecurse;
  }
  return out;
}

double exact_good_init_probability(int M) {
  if (M < 1 || (M & (M - 1)) != 0) {
    throw std::invalid_argument(
        "exact_good_init_probability: count must be a power of two");
  }
  if (M == 1) return 1.0;
  const double p_half = exact_good_init_probability(M / 2);
  // C(M, M/2) multiplicatively; every prefix is itself a binomial, so the
  // intermediate divisions are exact in double up to M = 32.
  double binom = 1.0;
  for (int i = 1; i <= M / 2; ++i) {
    binom = binom * (M / 2 + i) / i;
  }
  const double pow2 = std::ldexp(1.0, M);
  return 2.0 / pow2 + binom / pow2 * p_half * p_half;
}

WilsonInterval wilson_interval(int successes, int trials) {
  if (trials < 1) throw std::invalid_argument("wilson: trials must be >= 1");
  if (successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson: successes out of range");
  }
  const double z = 1.959963984540054;  // 97.5th percentile of N(0,1)
  const double n = trials;
  const double p = successes / n;
  const double z2n = z * z / n;
  const double center = (p + z2n / 2.0) / (1.0 + z2n);
  const double half =
      z / (1.0 + z2n) * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

bool trapping_check(const EmTrajectory& traj) {
  if (traj.urn_counts.empty()) {
    throw std::invalid_argument("trapping_check: trajectory has no region counts");
  }
  const auto& first = traj.urn_counts.front();
  for (const auto& row : traj.urn_counts) {
    if (row[0] != first[0] || row[1] != first[1]) return false;
  }
  return true;
}

McResult mc_failure_rate(const MixtureModel& truth,
                         const TreeConstructionSpec* tree,
                         const McConfig& config) {
  if (config.trials < 1) {
    throw std::invalid_argument("mc_failure_rate: trials must be >= 1");
  }
  if (truth.dim() != 1) {
    throw std::invalid_argument("mc_failure_rate: truth must be 1-d");
  }
  config.stop.validate();

  RegionSet regions_storage;
  const RegionSet* regions = nullptr;
  if (tree != nullptr) {
    regions_storage = tree_level1_regions(*tree);
    regions = &regions_storage;
  }

  const double l_star =
      population_log_likelihood(truth.centers1d(), truth, config.quad);
  const double threshold = l_star - config.success_margin;

  McResult result;
  result.records.resize(static_cast<std::size_t>(config.trials));
  parallel_for(config.trials, config.threads, [&](std::int64_t idx) {
    TrialRecord rec;
    rec.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(idx));
    Rng rng(rec.seed);
    const std::vector<LabeledSample> init = random_init(truth, rng);
    rec.init.reserve(init.size());
    rec.labels.reserve(init.size());
    for (const auto& s : init) {
      rec.init.push_back(s.point[0]);
      rec.labels.push_back(s.component);
    }
    rec.event_e = event_e_holds(init, truth);
    if (tree != nullptr) {
      const InitClassification cls = classify_init(rec.init, *tree);
      rec.good_init = cls.good;
      rec.good_reason = cls.reason;
    }

    const EmTrajectory traj =
        run_population(rec.init, config.stepper, config.stepsize, config.stop,
                       truth, config.quad, regions);
    rec.converged = traj.converged;
    rec.iterations = traj.total_iters;
    rec.final_loglik = traj.final_likelihood();
    rec.final_mu = traj.final_iterate();
    rec.success = rec.final_loglik > threshold;
    if (tree != nullptr) rec.trapped = trapping_check(traj);
    result.records[static_cast<std::size_t>(idx)] = std::move(rec);
  });

  McSummary& s = result.summary;
  s.trials = config.trials;
  s.l_star = l_star;
  bool any_failure = false;
  double best_failure = -std::numeric_limits<double>::infinity();
  for (const TrialRecord& rec : result.records) {
    s.successes += rec.success ? 1 : 0;
    s.good_inits += rec.good_init ? 1 : 0;
    s.all_one_side_goods +=
        rec.good_init && rec.good_reason == InitRule::kAllOneSide ? 1 : 0;
    s.event_e_count += rec.event_e ? 1 : 0;
    s.trapped_count += rec.trapped ? 1 : 0;
    if (!rec.success) {
      any_failure = true;
      best_failure = std::max(best_failure, rec.final_loglik);
    }
    if (tree != nullptr && rec.event_e && rec.success && !rec.good_init) {
      s.necessity_ok = false;
    }
  }
  const double n = config.trials;
  s.success_rate = s.successes / n;
  s.good_init_rate = s.good_inits / n;
  s.event_e_rate = s.event_e_count / n;
  s.success_ci = wilson_interval(s.successes, s.trials);
  s.good_init_ci = wilson_interval(s.good_inits, s.trials);
  s.c_gap = any_failure ? l_star - best_failure : 0.0;
  return result;
}

LemmaCheckReport LemmaCheckReport::make(std::string lemma, std::string config,
                                        double computed, double bound) {
  LemmaCheckReport r;
  r.lemma = std::move(lemma);
  r.configuration = std::move(config);
  r.computed = computed;
  r.bound = bound;
  r.margin = computed - bound;
  r.pass = r.margin >= -1e-9;
  return r;
}

namespace {

/// E[w_target(X) * X] under `truth`, with responsibilities taken against the
/// full candidate list.
double expected_weighted_x(const std::vector<double>& candidates, int target,
                           const MixtureModel& truth,
                           const QuadratureSpec& quad) {
  std::vector<double> w(candidates.size());
  const auto f = [&](double x) {
    responsibilities_1d(x, candidates, w);
    return w[static_cast<std::size_t>(target)] * x;
  };
  return expect_under_mixture(f, truth, quad);
}

void require_target(const std::vector<double>& candidates, int target,
                    const char* lemma) {
  if (candidates.empty()) {
    throw hypothesis_error(std::string(lemma) + ": empty candidate list");
  }
  if (target < 0 || target >= static_cast<int>(candidates.size())) {
    throw hypothesis_error(std::string(lemma) + ": target index out of range");
  }
}

}  // namespace

LemmaCheckReport check_lemma_general_calc(const GeneralCalcConfig& config,
                                          const QuadratureSpec& quad) {
  require_target(config.candidates, config.target, "general_calc");
  if (config.truth.empty()) {
    throw hypothesis_error("general_calc: empty truth center list");
  }
  if (!(config.match_fraction > 0.0 && config.match_fraction < 1.0)) {
    throw hypothesis_error("general_calc: match_fraction must be in (0, 1)");
  }
  const double a = config.a;
  const int m_hyp = static_cast<int>(
      std::max(config.truth.size(), config.candidates.size()));
  if (!(a > std::log(static_cast<double>(m_hyp)) + 3.0)) {
    throw hypothesis_error("general_calc: requires a > log(M) + 3");
  }
  bool has_near = false;
  for (const double t : config.truth) {
    if (!(t > a || t < -10.0 * a)) {
      throw hypothesis_error(
          "general_calc: every true center must lie in (-inf,-10a) u (a,inf)");
    }
    if (t > a && t < 3.0 * a) has_near = true;
  }
  if (!has_near) {
    throw hypothesis_error("general_calc: needs a true center in (a, 3a)");
  }
  const double mu_i = config.candidates[static_cast<std::size_t>(config.target)];
  if (!(mu_i >= 0.0 && mu_i <= 4.0 * a)) {
    throw hypothesis_error("general_calc: target center must lie in [0, 4a]");
  }
  for (const double t : config.truth) {
    if (t >= -10.0 * a) continue;
    bool matched = false;
    for (const double c : config.candidates) {
      if (std::abs(c - t) <= std::abs(t) * config.match_fraction) {
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw hypothesis_error(
          "general_calc: far-negative true center lacks a matching candidate");
    }
  }

  const MixtureModel truth = MixtureModel::line(config.truth);
  const double computed =
      expected_weighted_x(config.candidates, config.target, truth, quad);
  std::ostringstream cfg;
  cfg << "a=" << a << " truth_count=" << config.truth.size()
      << " candidates=" << config.candidates.size()
      << " target=" << config.target
      << " match_fraction=" << config.match_fraction;
  return LemmaCheckReport::make("general_calc", cfg.str(), computed, 0.0);
}

LemmaCheckReport check_lemma_center_positive(const CenterPositiveConfig& config,
                                             const QuadratureSpec& quad) {
  require_target(config.candidates, config.target, "center_positive");
  const double a = config.a;
  const int m = static_cast<int>(config.candidates.size());
  if (!(a > std::log(static_cast<double>(m)) + 3.0)) {
    throw hypothesis_error("center_positive: requires a > log(M) + 3");
  }
  if (!(config.mu_star >= a)) {
    throw hypothesis_error("center_positive: requires mu_star >= a");
  }
  const double mu_i = config.candidates[static_cast<std::size_t>(config.target)];
  if (!(mu_i >= 0.0)) {
    throw hypothesis_error("center_positive: target center must be >= 0");
  }

  const bool strong = config.mu_star <= 3.0 * a && mu_i <= 4.0 * a;
  const double bound =
      strong ? a / (5.0 * m) * std::exp(-4.5 * a * a) : 0.0;
  const MixtureModel truth = MixtureModel::line({config.mu_star});
  const double computed =
      expected_weighted_x(config.candidates, config.target, truth, quad);
  std::ostringstream cfg;
  cfg << "a=" << a << " mu_star=" << config.mu_star << " M=" << m
      << " target=" << config.target
      << (strong ? " part=strong" : " part=sign-only");
  return LemmaCheckReport::make("center_positive", cfg.str(), computed, bound);
}

LemmaCheckReport check_lemma_center_negative(const CenterNegativeConfig& config,
                                             const QuadratureSpec& quad) {
  require_target(config.candidates, config.target, "center_negative");
  const double r = config.r;
  if (!(r > 0.0)) {
    throw hypothesis_error("center_negative: requires r > 0");
  }
  const double mu_i = config.candidates[static_cast<std::size_t>(config.target)];
  if (!(mu_i >= 0.0)) {
    throw hypothesis_error("center_negative: target center must be >= 0");
  }
  int matched = config.matched;
  if (matched >= 0) {
    if (matched >= static_cast<int>(config.candidates.size()) ||
        std::abs(config.candidates[static_cast<std::size_t>(matched)] + r) >
            r / 6.0) {
      throw hypothesis_error(
          "center_negative: declared matching candidate is not within r/6 of -r");
    }
  } else {
    for (std::size_t j = 0; j < config.candidates.size(); ++j) {
      if (std::abs(config.candidates[j] + r) <= r / 6.0) {
        matched = static_cast<int>(j);
        break;
      }
    }
    if (matched < 0) {
      throw hypothesis_error(
          "center_negative: no candidate lies within r/6 of -r");
    }
  }

  const double bound = -3.0 * r * std::exp(-r * r / 18.0);
  const MixtureModel truth = MixtureModel::line({-r});
  const double computed =
      expected_weighted_x(config.candidates, config.target, truth, quad);
  std::ostringstream cfg;
  cfg << "r=" << r << " M=" << config.candidates.size()
      << " target=" << config.target << " matched=" << matched;
  return LemmaCheckReport::make("center_negative", cfg.str(), computed, bound);
}

LemmaCheckReport check_lemma_wdifference(const WdifferenceConfig& config) {
  require_target(config.candidates, config.target, "wdifference");
  const double mu_i = config.candidates[static_cast<std::size_t>(config.target)];
  if (!(mu_i >= 0.0)) {
    throw hypothesis_error("wdifference: target center must be >= 0");
  }
  if (config.grid_points < 2) {
    throw hypothesis_error("wdifference: grid_points must be >= 2");
  }
  if (!(config.window_lo < 0.0)) {
    throw hypothesis_error("wdifference: window_lo must be negative");
  }

  const auto idx = static_cast<std::size_t>(config.target);
  std::vector<double> w(config.candidates.size());
  const auto weight_at = [&](double x) {
    responsibilities_1d(x, config.candidates, w);
    return w[idx];
  };

  double min_right = std::numeric_limits<double>::infinity();
  const double hr = 1.0 / (config.grid_points - 1);
  for (int k = 0; k < config.grid_points; ++k) {
    min_right = std::min(min_right, weight_at(1.0 + hr * k));
  }
  double sup_left = -std::numeric_limits<double>::infinity();
  int argmax = 0;
  const double hl = -config.window_lo / (config.grid_points - 1);
  for (int k = 0; k < config.grid_points; ++k) {
    const double value = weight_at(config.window_lo + hl * k);
    if (value > sup_left) {
      sup_left = value;
      argmax = k;
    }
  }

  const double m = static_cast<double>(config.candidates.size());
  const double bound = sup_left / (m * std::exp(2.0));
  std::ostringstream cfg;
  cfg << "M=" << config.candidates.size() << " target=" << config.target
      << " mu_i=" << mu_i << " window_lo=" << config.window_lo;
  LemmaCheckReport report =
      LemmaCheckReport::make("wdifference", cfg.str(), min_right, bound);
  report.sup_at_window_edge = argmax == 0;
  return report;
}

GeneralCalcConfig random_general_calc_config(Rng& rng) {
  GeneralCalcConfig config;
  const int m = 1 + rng.uniform_int(6);
  config.a = std::log(static_cast<double>(m)) + 3.0 + rng.uniform(0.1, 3.0);
  const double a = config.a;

  config.truth.push_back(rng.uniform(1.01 * a, 2.99 * a));  // the near center
  std::vector<double> far_negatives;
  for (int i = 1; i < m; ++i) {
    if (rng.uniform() < 0.5) {
      const double t = -rng.uniform(10.5 * a, 30.0 * a);
      config.truth.push_back(t);
      far_negatives.push_back(t);
    } else {
      config.truth.push_back(rng.uniform(1.01 * a, 10.0 * a));
    }
  }

  config.target = 0;
  config.candidates.push_back(rng.uniform(0.0, 4.0 * a));
  for (const double t : far_negatives) {
    config.candidates.push_back(
        t + std::abs(t) * config.match_fraction * rng.uniform(-0.9, 0.9));
  }
  while (config.candidates.size() < static_cast<std::size_t>(m)) {
    config.candidates.push_back(rng.uniform(-a, 6.0 * a));
  }
  return config;
}

CenterPositiveConfig random_center_positive_config(Rng& rng) {
  CenterPositiveConfig config;
  const int m = 1 + rng.uniform_int(8);
  config.a = std::log(static_cast<double>(m)) + 3.0 + rng.uniform(0.1, 2.0);
  const bool strong = rng.uniform() < 0.5;
  config.mu_star = strong ? rng.uniform(config.a, 3.0 * config.a)
                          : rng.uniform(config.a, 8.0 * config.a);
  config.target = 0;
  config.candidates.push_back(strong ? rng.uniform(0.0, 4.0 * config.a)
                                     : rng.uniform(0.0, 8.0 * config.a));
  for (int i = 1; i < m; ++i) {
    config.candidates.push_back(rng.uniform(-5.0 * config.a, 5.0 * config.a));
  }
  return config;
}

CenterNegativeConfig random_center_negative_config(Rng& rng) {
  CenterNegativeConfig config;
  config.r = rng.uniform(6.0, 30.0);
  const int m = 2 + rng.uniform_int(7);
  config.target = 0;
  config.candidates.push_back(rng.uniform(0.0, 3.0 * config.r));
  config.candidates.push_back(-config.r +
                              config.r / 6.0 * rng.uniform(-0.99, 0.99));
  for (int i = 2; i < m; ++i) {
    config.candidates.push_back(rng.uniform(-2.0 * config.r, 2.0 * config.r));
  }
  return config;
}

WdifferenceConfig random_wdifference_config(Rng& rng) {
  WdifferenceConfig config;
  const int m = 1 + rng.uniform_int(8);
  config.target = 0;
  config.candidates.push_back(rng.uniform(0.0, 10.0));
  for (int i = 1; i < m; ++i) {
    config.candidates.push_back(rng.uniform(-10.0, 20.0));
  }
  return config;
}

SaddleTrialSummary saddle_avoidance_trial(const MixtureModel& truth,
                                          const SaddleTrialConfig& config) {
  if (config.trials < 1) {
    throw std::invalid_argument("saddle_avoidance_trial: trials must be >= 1");
  }
  if (truth.dim() != 1) {
    throw std::invalid_argument("saddle_avoidance_trial: truth must be 1-d");
  }
  if (!(config.stepsize > 0.0 && config.stepsize < 1.0)) {
    throw std::invalid_argument(
        "saddle_avoidance_trial: stepsize must be in (0,1)");
  }
  config.stop.validate();

  SaddleTrialSummary sum;
  sum.trials = config.trials;
  sum.limits.resize(static_cast<std::size_t>(config.trials));
  std::vector<double> final_grads(static_cast<std::size_t>(config.trials), 0.0);
  std::vector<double> min_eigs(static_cast<std::size_t>(config.trials), 1.0);

  parallel_for(config.trials, config.threads, [&](std::int64_t idx) {
    Rng rng(derive_seed(config.master_seed, static_cast<std::uint64_t>(idx)));
    const std::vector<LabeledSample> init = random_init(truth, rng);
    std::vector<double> mu0;
    mu0.reserve(init.size());
    for (const auto& s : init) mu0.push_back(s.point[0]);

    const EmTrajectory traj =
        run_population(std::move(mu0), PopulationStepKind::kFirstOrder,
                       config.stepsize, config.stop, truth, config.quad);
    final_grads[static_cast<std::size_t>(idx)] = traj.final_grad_norm();
    sum.limits[static_cast<std::size_t>(idx)] =
        classify_critical_point(traj.final_iterate(), truth, config.quad);

    if (config.jacobian_stride > 0) {
      double local_min = 1.0;
      for (std::size_t k = 0; k < traj.iterates.size();
           k += static_cast<std::size_t>(config.jacobian_stride)) {
        const Eigen::MatrixXd h =
            population_hessian(traj.iterates[k], truth, config.quad);
        const Eigen::MatrixXd jac =
            Eigen::MatrixXd::Identity(h.rows(), h.cols()) +
            config.stepsize * h;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jac);
        local_min = std::min(local_min, solver.eigenvalues().minCoeff());
      }
      min_eigs[static_cast<std::size_t>(idx)] = local_min;
    }
  });

  for (int i = 0; i < config.trials; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (final_grads[idx] <= 1e-7) ++sum.reached_grad_tol;
    sum.worst_final_grad = std::max(sum.worst_final_grad, final_grads[idx]);
    sum.min_jacobian_eig = std::min(sum.min_jacobian_eig, min_eigs[idx]);
    switch (sum.limits[idx].kind) {
      case CriticalKind::kLocalMaximum: ++sum.local_maxima; break;
      case CriticalKind::kStrictSaddle: ++sum.strict_saddles; break;
      case CriticalKind::kIndeterminate: ++sum.indeterminate; break;
    }
  }
  return sum;
}

}  // namespace gmml
