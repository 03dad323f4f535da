#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmml/constructions.hpp"
#include "gmml/em.hpp"
#include "gmml/model.hpp"
#include "gmml/rng.hpp"

namespace gmml {

/// M labeled draws from the truth, one per candidate center to initialize.
std::vector<LabeledSample> random_init(const MixtureModel& truth, Rng& rng);

/// Event E: every init point lies within `radius` of the true center that
/// generated it. radius defaults to the number of points.
bool event_e_holds(const std::vector<LabeledSample>& init,
                   const MixtureModel& truth, double radius = -1.0);

/// Which rule decided the top-level verdict of classify_init.
enum class InitRule { kSingleton, kAllOneSide, kBalancedRecurse, kBadSplit };

const char* to_string(InitRule r);

struct LevelCounts {
  int level = 0;  // urn level the node split into
  int left = 0;
  int right = 0;
};

/// Recursive goodness of an initialization against a tree construction:
/// a point set is good if it is a singleton, if it falls entirely in one of
/// the node's two child urns, or if it splits exactly in half with both halves
/// recursively good. Anything else (including points outside both urns) is
/// bad.
struct InitClassification {
  bool good = false;
  InitRule reason = InitRule::kBadSplit;
  std::vector<LevelCounts> levels;  // visited nodes in depth-first order
};

InitClassification classify_init(const std::vector<double>& points,
                                 const TreeConstructionSpec& spec);

/// Closed-form probability that a uniform random assignment of M = 2^k
/// points over the tree leaves is good: P(1) = 1 and
/// P(M) = 2/2^M + C(M, M/2)/2^M * P(M/2)^2.
double exact_good_init_probability(int M);

/// 95% Wilson score interval for a binomial proportion.
struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

WilsonInterval wilson_interval(int successes, int trials);

/// One Monte Carlo run: random init from the truth, an EM variant iterated
/// to the stopping rule, success judged by the final population likelihood.
struct TrialRecord {
  std::uint64_t seed = 0;
  std::vector<double> init;
  std::vector<int> labels;
  bool event_e = false;
  bool good_init = false;     // false when no tree spec was supplied
  InitRule good_reason = InitRule::kBadSplit;
  bool success = false;       // final loglik > L(truth) - margin
  bool trapped = false;       // level-1 urn counts constant (tree runs)
  bool converged = false;
  int iterations = 0;
  double final_loglik = 0.0;
  std::vector<double> final_mu;
};

struct McConfig {
  int trials = 500;
  double success_margin = 0.1;
  PopulationStepKind stepper = PopulationStepKind::kEm;
  double stepsize = 0.5;
  StoppingRule stop{2500, 1e-10, 0.0};
  std::uint64_t master_seed = 20260817ULL;
  int threads = 0;  // 0 = GMML_THREADS env or hardware concurrency
  QuadratureSpec quad{};
};

struct McSummary {
  int trials = 0;
  int successes = 0;
  int good_inits = 0;
  int all_one_side_goods = 0;  // goods by the root all-one-side rule alone
  int event_e_count = 0;
  int trapped_count = 0;
  double success_rate = 0.0;
  double good_init_rate = 0.0;
  double event_e_rate = 0.0;
  WilsonInterval success_ci;
  WilsonInterval good_init_ci;
  double l_star = 0.0;           // population likelihood of the truth
  double c_gap = 0.0;            // L* minus the best failed trial, 0 if none
  bool necessity_ok = true;      // success => good among event-E trials
};

struct McResult {
  McSummary summary;
  std::vector<TrialRecord> records;
};

/// Failure-rate experiment. When tree is non-null, trials are classified
/// against it and level-1 urn counts are tracked. Deterministic for a fixed
/// master seed regardless of thread count.
McResult mc_failure_rate(const MixtureModel& truth,
                         const TreeConstructionSpec* tree,
                         const McConfig& config);

/// True iff the first two region counts never change along the trajectory.
bool trapping_check(const EmTrajectory& traj);

/// Hypothesis violations in the checks below raise this; the CLI maps it to
/// its dedicated exit code.
class hypothesis_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Outcome of one inequality check: pass iff margin >= -1e-9.
struct LemmaCheckReport {
  std::string lemma;
  std::string configuration;
  double computed = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool pass = false;
  bool sup_at_window_edge = false;  // weight-ratio check only

  static LemmaCheckReport make(std::string lemma, std::string config,
                               double computed, double bound);
};

/// E[w_i(X) X] >= 0 for a candidate mu_i in [0, 4a] when every true center
/// sits in (-inf, -10a) u (a, inf), at least one sits in (a, 3a),
/// a > log M + 3, and each far-negative true center has a candidate within
/// match_fraction of its magnitude.
struct GeneralCalcConfig {
  double a = 0.0;
  std::vector<double> truth;       // 1-d true centers
  std::vector<double> candidates;  // current centers
  int target = 0;                  // index i with candidates[i] in [0, 4a]
  double match_fraction = 1.0 / 6.0;
};

LemmaCheckReport check_lemma_general_calc(const GeneralCalcConfig& config,
                                          const QuadratureSpec& quad);

/// Single true component at mu_star >= a: E[w_i(X) X] >= 0, and when
/// mu_star <= 3a and mu_i <= 4a the stronger bound a/(5M) exp(-9a^2/2).
struct CenterPositiveConfig {
  double a = 0.0;
  double mu_star = 0.0;
  std::vector<double> candidates;
  int target = 0;  // candidates[target] >= 0
};

LemmaCheckReport check_lemma_center_positive(const CenterPositiveConfig& config,
                                             const QuadratureSpec& quad);

/// Single true component at -r with a candidate within r/6 of it:
/// E[w_i(X) X] >= -3r exp(-r^2/18) for any candidate mu_i >= 0.
struct CenterNegativeConfig {
  double r = 0.0;
  std::vector<double> candidates;
  int target = 0;    // candidates[target] >= 0
  int matched = -1;  // index within r/6 of -r; -1 = locate automatically
};

LemmaCheckReport check_lemma_center_negative(const CenterNegativeConfig& config,
                                             const QuadratureSpec& quad);

/// min over [1,2] of w_i >= sup over (-inf, 0] of w_i / (M e^2) for any
/// candidate mu_i >= 0. Both sides are evaluated on dense grids, the sup on
/// [-50, 0]; the report flags a sup attained at the truncation edge.
struct WdifferenceConfig {
  std::vector<double> candidates;
  int target = 0;
  int grid_points = 10000;
  double window_lo = -50.0;
};

LemmaCheckReport check_lemma_wdifference(const WdifferenceConfig& config);

/// Random hypothesis-satisfying configurations for sweep testing the four
/// inequality checks. Every draw passes the corresponding checker's
/// hypothesis validation by construction.
GeneralCalcConfig random_general_calc_config(Rng& rng);
CenterPositiveConfig random_center_positive_config(Rng& rng);
CenterNegativeConfig random_center_negative_config(Rng& rng);
WdifferenceConfig random_wdifference_config(Rng& rng);

/// First-order EM from random inits; counts limit points classified as
/// strict saddles and tracks the minimum eigenvalue of I + s H seen along
/// recorded iterates (checked every jacobian_stride-th record).
struct SaddleTrialConfig {
  int trials = 200;
  double stepsize = 0.5;
  StoppingRule stop{400000, 1e-10, 9e-8};
  std::uint64_t master_seed = 7ULL;
  int threads = 0;
  int jacobian_stride = 0;  // 0 = skip the Jacobian sweep
  QuadratureSpec quad{};
};

struct SaddleTrialSummary {
  int trials = 0;
  int reached_grad_tol = 0;   // final grad norm <= 1e-7
  int strict_saddles = 0;
  int local_maxima = 0;
  int indeterminate = 0;
  double worst_final_grad = 0.0;
  double min_jacobian_eig = 1.0;  // over sampled iterates, all trials
  std::vector<CriticalPointReport> limits;
};

SaddleTrialSummary saddle_avoidance_trial(const MixtureModel& truth,
                                          const SaddleTrialConfig& config);

}  // namespace gmml
