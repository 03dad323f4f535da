// Command-line front end for the mixture-likelihood experiment library.
//
// Exit codes: 0 success; 1 usage or configuration error; 2 stepper ran out
// of iterations; 3 hypothesis/precondition violation (including failed
// cross-scheme quadrature validation); 4 inequality-bound violation in the
// check suite.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gmml/constructions.hpp"
#include "gmml/density.hpp"
#include "gmml/em.hpp"
#include "gmml/experiments.hpp"
#include "gmml/io.hpp"
#include "gmml/model.hpp"
#include "gmml/population.hpp"
#include "gmml/quadrature.hpp"
#include "gmml/surface.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitHypothesis = 3;
constexpr int kExitBoundViolation = 4;

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 20260817ULL;
  int quad_order = 200;
  bool quad_validate = false;
  int threads = 0;
  std::string out = "out";
};

void add_global_options(CLI::App* cmd, GlobalOpts& g) {
  cmd->add_option("--config", g.config_path,
                  "JSON config file; explicit flags override its values");
  cmd->add_option("--seed", g.seed, "Master seed for seeded experiments");
  cmd->add_option("--quad-order", g.quad_order,
                  "Quadrature nodes per component (>= 16)");
  cmd->add_flag("--quad-validate", g.quad_validate,
                "Re-evaluate headline scalars with the trapezoid scheme and "
                "require agreement");
  cmd->add_option("--threads", g.threads,
                  "Worker threads (0 = auto, capped by GMML_THREADS)");
  cmd->add_option("--out", g.out, "Output directory");
}

/// Loads the config file named by --config, if any. Must run after parsing;
/// each option then falls back to the file value unless passed explicitly.
json load_config(const CLI::App& cmd, const GlobalOpts& g) {
  if (g.config_path.empty()) return json::object();
  std::ifstream in(g.config_path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + g.config_path);
  json j;
  in >> j;
  if (!j.is_object()) {
    throw CLI::ValidationError("--config", "config root must be a JSON object");
  }
  (void)cmd;
  return j;
}

template <typename T>
void cfg(const CLI::App& cmd, const json& file, const std::string& flag,
         const char* key, T& value) {
  const CLI::Option* opt = cmd.get_option_no_throw(flag);
  if (opt != nullptr && opt->count() > 0) return;  // explicit flag wins
  if (const auto it = file.find(key); it != file.end()) value = it->get<T>();
}

gmml::QuadratureSpec quad_spec(const GlobalOpts& g) {
  gmml::QuadratureSpec spec;
  spec.order = g.quad_order;
  spec.validate();
  return spec;
}

gmml::QuadratureSpec trapezoid_validation_spec() {
  return {4000, gmml::QuadScheme::kTrapezoid, 12.0};
}

/// Cross-scheme check behind --quad-validate: the trapezoid value must agree
/// within 1e-8, relaxed to 1e-6 once center magnitudes pass 1e3.
void require_cross_scheme(const std::string& label, double hermite_value,
                          std::span<const double> mu,
                          const gmml::MixtureModel& truth) {
  const double other =
      gmml::population_log_likelihood(mu, truth, trapezoid_validation_spec());
  double magnitude = 0.0;
  for (const double x : mu) magnitude = std::max(magnitude, std::abs(x));
  for (const double x : truth.centers1d()) {
    magnitude = std::max(magnitude, std::abs(x));
  }
  const double tol = magnitude <= 1e3 ? 1e-8 : 1e-6;
  if (std::abs(other - hermite_value) > tol) {
    std::ostringstream msg;
    msg << "quadrature validation failed for " << label << ": hermite "
        << gmml::format_double(hermite_value) << " vs trapezoid "
        << gmml::format_double(other) << " (tol " << tol << ")";
    throw gmml::hypothesis_error(msg.str());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  gmml::write_text_file(path, j.dump(2) + "\n");
}

void echo_config(const GlobalOpts& g, json command_config) {
  command_config["seed"] = g.seed;
  command_config["quad_order"] = g.quad_order;
  command_config["quad_validate"] = g.quad_validate;
  command_config["threads"] = g.threads;
  command_config["out"] = g.out;
  write_json(std::filesystem::path(g.out) / "config.json", command_config);
}

std::vector<double> parse_center_list(const std::string& text,
                                      const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() &&
             std::isspace(static_cast<unsigned char>(item[used]))) {
        ++used;
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty center list");
  return out;
}

json report_to_json(const gmml::CriticalPointReport& report) {
  return json{{"mu", report.mu},
              {"grad_norm", report.grad_norm},
              {"eigenvalues", report.eigenvalues},
              {"kind", gmml::to_string(report.kind)}};
}

// ---------------------------------------------------------------------------
// surface

struct SurfaceArgs {
  GlobalOpts g;
  std::string model_path;
  double lo = -10.0, hi = 10.0, step = 0.1;
};

int run_surface(const CLI::App& cmd, SurfaceArgs& args) {
  const json file = load_config(cmd, args.g);
  cfg(cmd, file, "--model", "model", args.model_path);
  cfg(cmd, file, "--lo", "lo", args.lo);
  cfg(cmd, file, "--hi", "hi", args.hi);
  cfg(cmd, file, "--step", "step", args.step);

  const gmml::MixtureModel truth =
      args.model_path.empty() ? gmml::MixtureModel::line({-4.0, 4.0})
                              : gmml::read_model_json(args.model_path);
  if (truth.dim() != 1 || truth.count() != 2) {
    throw gmml::hypothesis_error("surface: truth must have two 1-d centers");
  }

  gmml::SurfaceSpec spec;
  spec.lo = args.lo;
  spec.hi = args.hi;
  spec.step = args.step;
  const gmml::QuadratureSpec quad = quad_spec(args.g);
  const gmml::SurfaceResult result =
      gmml::evaluate_surface(truth, spec, quad, args.g.threads);

  if (args.g.quad_validate) {
    for (const gmml::SurfaceCritical& c : result.criticals) {
      const std::vector<double> mu{c.mu1, c.mu2};
      require_cross_scheme("critical point", c.loglik, mu, truth);
    }
    const std::size_t stride = std::max<std::size_t>(1, result.rows.size() / 64);
    for (std::size_t i = 0; i < result.rows.size(); i += stride) {
      const gmml::SurfaceRow& row = result.rows[i];
      const std::vector<double> mu{row.mu1, row.mu2};
      require_cross_scheme("surface row", row.loglik, mu, truth);
    }
  }

  const std::filesystem::path out(args.g.out);
  gmml::write_surface_csv(out / "surface.csv", result);
  gmml::write_criticals_csv(out / "criticals.csv", result);
  echo_config(args.g, json{{"command", "surface"},
                           {"model", args.model_path},
                           {"lo", args.lo},
                           {"hi", args.hi},
                           {"step", args.step}});

  json summary{{"grid_points", result.rows.size()},
               {"criticals", json::array()}};
  for (const gmml::SurfaceCritical& c : result.criticals) {
    summary["criticals"].push_back(json{{"mu", {c.mu1, c.mu2}},
                                        {"loglik", c.loglik},
                                        {"grad_norm", c.grad_norm},
                                        {"kind", gmml::to_string(c.kind)}});
  }
  write_json(out / "surface_summary.json", summary);
  std::cout << "surface: " << result.rows.size() << " grid points, "
            << result.criticals.size() << " critical points -> " << out.string()
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// construct

struct ConstructArgs {
  GlobalOpts g;
  std::string kind = "three";
  double R = 5.0;
  double gamma = 20.0;
  int count = 0;
  int levels = 3;
  double ratio = 0.01;
  bool paper_faithful = false;
  double c = 25.0;
  double delta = 0.0;
  std::string left, right, far;
};

int run_construct(const CLI::App& cmd, ConstructArgs& args) {
  const json file = load_config(cmd, args.g);
  cfg(cmd, file, "--kind", "kind", args.kind);
  cfg(cmd, file, "--R", "R", args.R);
  cfg(cmd, file, "--gamma", "gamma", args.gamma);
  cfg(cmd, file, "--count", "count", args.count);
  cfg(cmd, file, "--levels", "levels", args.levels);
  cfg(cmd, file, "--ratio", "ratio", args.ratio);
  cfg(cmd, file, "--paper-faithful", "paper_faithful", args.paper_faithful);
  cfg(cmd, file, "--c", "c", args.c);
  cfg(cmd, file, "--delta", "delta", args.delta);
  cfg(cmd, file, "--left", "left", args.left);
  cfg(cmd, file, "--right", "right", args.right);
  cfg(cmd, file, "--far", "far", args.far);

  gmml::MixtureModel model;
  if (args.kind == "three") {
    model = gmml::three_component({args.R, args.gamma});
  } else if (args.kind == "extended") {
    if (args.count < 3) {
      throw CLI::ValidationError("--count", "extended construction needs --count >= 3");
    }
    model = gmml::extended_m_construction(args.count, args.R, args.gamma);
  } else if (args.kind == "tree" || args.kind == "pruned") {
    gmml::TreeConstructionSpec spec;
    spec.levels = args.levels;
    spec.R = args.R;
    spec.ratio = args.ratio;
    spec.paper_faithful = args.paper_faithful;
    model = args.kind == "tree"
                ? gmml::tree_construction(spec)
                : gmml::pruned_tree(spec, args.count > 0 ? args.count
                                                         : spec.count());
  } else if (args.kind == "diffuse") {
    gmml::DiffuseSpec spec;
    spec.c = args.c;
    spec.left = parse_center_list(args.left, "--left");
    spec.right = parse_center_list(args.right, "--right");
    if (!args.far.empty()) spec.far_centers = parse_center_list(args.far, "--far");
    spec.delta = args.delta > 0.0
                     ? args.delta
                     : std::log(static_cast<double>(spec.inner_count())) + 4.0;
    model = gmml::make_diffuse(spec);
  } else {
    throw CLI::ValidationError("--kind",
                               "expected three|extended|tree|pruned|diffuse");
  }

  const std::filesystem::path out(args.g.out);
  std::filesystem::create_directories(out);
  gmml::write_model_json((out / "model.json").string(), model);
  echo_config(args.g, json{{"command", "construct"},
                           {"kind", args.kind},
                           {"R", args.R},
                           {"gamma", args.gamma},
                           {"count", args.count},
                           {"levels", args.levels},
                           {"ratio", args.ratio},
                           {"paper_faithful", args.paper_faithful},
                           {"c", args.c},
                           {"delta", args.delta}});
  json summary{{"kind", args.kind},
               {"count", model.count()},
               {"dim", model.dim()}};
  if (model.count() >= 2) summary["min_separation"] = gmml::min_separation(model);
  write_json(out / "construct.json", summary);
  std::cout << "construct: " << model.count() << " centers -> "
            << (out / "model.json").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// boundary-values

struct BoundaryArgs {
  GlobalOpts g;
  double R = 5.0;
  double gamma = 20.0;
  int grid_n = 60;
  int refine_starts = 8;
};

int run_boundary(const CLI::App& cmd, BoundaryArgs& args) {
  const json file = load_config(cmd, args.g);
  cfg(cmd, file, "--R", "R", args.R);
  cfg(cmd, file, "--gamma", "gamma", args.gamma);
  cfg(cmd, file, "--grid-n", "grid_n", args.grid_n);
  cfg(cmd, file, "--refine-starts", "refine_starts", args.refine_starts);

  const gmml::ThreeComponentSpec spec{args.R, args.gamma};
  gmml::FaceSearchSpec search;
  search.grid_n = args.grid_n;
  search.refine_starts = args.refine_starts;
  const gmml::QuadratureSpec quad = quad_spec(args.g);
  const gmml::BoundaryValues values = gmml::boundary_values(spec, quad, search);

  if (args.g.quad_validate) {
    const gmml::MixtureModel truth = gmml::three_component(spec);
    const auto inner = gmml::interior_point(spec);
    require_cross_scheme("v0", values.v0,
                         std::span<const double>(inner.data(), inner.size()),
                         truth);
    for (const gmml::FaceResult* face : {&values.v1, &values.v2, &values.v3}) {
      require_cross_scheme(
          "face value", face->value,
          std::span<const double>(face->argmax.data(), face->argmax.size()),
          truth);
    }
  }

  auto face_json = [](const gmml::FaceResult& f) {
    return json{{"value", f.value},
                {"argmax", f.argmax},
                {"refinement_converged", f.refinement_converged}};
  };
  const double margin = values.v0 - values.max_face_value();
  const std::filesystem::path out(args.g.out);
  echo_config(args.g, json{{"command", "boundary-values"},
                           {"R", args.R},
                           {"gamma", args.gamma},
                           {"grid_n", args.grid_n},
                           {"refine_starts", args.refine_starts}});
  write_json(out / "boundary_values.json", json{{"v0", values.v0},
                                                {"v1", face_json(values.v1)},
                                                {"v2", face_json(values.v2)},
                                                {"v3", face_json(values.v3)},
                                                {"margin", margin}});
  std::cout << "boundary-values: v0 " << gmml::format_double(values.v0)
            << ", max face " << gmml::format_double(values.max_face_value())
            << ", margin " << gmml::format_double(margin) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  GlobalOpts g;
  std::string model_path;
  std::string preset;
  std::string init;
  bool interior = false;
  std::string stepper = "em";
  double stepsize = 0.5;
  int max_iters = 10000;
  double step_tol = 1e-10;
  double grad_tol = 0.0;
  double preset_R = 0.0;  // 0 = preset default
  double preset_gamma = 0.0;
};

struct PresetTruth {
  gmml::MixtureModel truth;
  std::optional<gmml::RegionSet> regions;
  std::optional<std::vector<double>> interior;
};

PresetTruth resolve_truth(const std::string& model_path,
                          const std::string& preset, double preset_R,
                          double preset_gamma) {
  PresetTruth out;
  if (!model_path.empty()) {
    out.truth = gmml::read_model_json(model_path);
    return out;
  }
  if (preset == "two" || preset.empty()) {
    out.truth = gmml::MixtureModel::line({-4.0, 4.0});
  } else if (preset == "three") {
    const gmml::ThreeComponentSpec spec{preset_R > 0 ? preset_R : 5.0,
                                        preset_gamma > 0 ? preset_gamma : 20.0};
    out.truth = gmml::three_component(spec);
    const auto inner = gmml::interior_point(spec);
    out.interior = std::vector<double>(inner.begin(), inner.end());
  } else if (preset == "tree-m8" || preset == "tree-m4") {
    gmml::TreeConstructionSpec spec;
    spec.levels = preset == "tree-m8" ? 3 : 2;
    spec.R = preset_R > 0 ? preset_R : (preset == "tree-m8" ? 9e8 : 5e6);
    spec.paper_faithful = true;
    out.truth = gmml::tree_construction(spec);
    out.regions = gmml::tree_level1_regions(spec);
  } else {
    throw CLI::ValidationError("--preset", "expected two|three|tree-m8|tree-m4");
  }
  return out;
}

int run_run(const CLI::App& cmd, RunArgs& args) {
  const json file = load_config(cmd, args.g);
  cfg(cmd, file, "--model", "model", args.model_path);
  cfg(cmd, file, "--preset", "preset", args.preset);
  cfg(cmd, file, "--init", "init", args.init);
  cfg(cmd, file, "--interior", "interior", args.interior);
  cfg(cmd, file, "--stepper", "stepper", args.stepper);
  cfg(cmd, file, "--stepsize", "stepsize", args.stepsize);
  cfg(cmd, file, "--max-iters", "max_iters", args.max_iters);
  cfg(cmd, file, "--step-tol", "step_tol", args.step_tol);
  cfg(cmd, file, "--grad-tol", "grad_tol", args.grad_tol);
  cfg(cmd, file, "--R", "R", args.preset_R);
  cfg(cmd, file, "--gamma", "gamma", args.preset_gamma);

  const PresetTruth preset = resolve_truth(args.model_path, args.preset,
                                           args.preset_R, args.preset_gamma);
  std::vector<double> mu0;
  if (args.interior) {
    if (!preset.interior.has_value()) {
      throw CLI::ValidationError("--interior",
                                 "only valid with --preset three");
    }
    mu0 = *preset.interior;
  } else if (!args.init.empty()) {
    mu0 = parse_center_list(args.init, "--init");
  } else {
    throw CLI::ValidationError("--init", "an initial center list is required");
  }

  gmml::PopulationStepKind kind;
  if (args.stepper == "em") {
    kind = gmml::PopulationStepKind::kEm;
  } else if (args.stepper == "first-order") {
    kind = gmml::PopulationStepKind::kFirstOrder;
  } else {
    throw CLI::ValidationError("--stepper", "expected em|first-order");
  }

  const gmml::StoppingRule stop{args.max_iters, args.step_tol, args.grad_tol};
  const gmml::QuadratureSpec quad = quad_spec(args.g);
  const gmml::EmTrajectory traj = gmml::run_population(
      mu0, kind, args.stepsize, stop, preset.truth, quad,
      preset.regions.has_value() ? &*preset.regions : nullptr);

  const gmml::CriticalPointReport report =
      gmml::classify_critical_point(traj.final_iterate(), preset.truth, quad);
  const double l_star = gmml::population_log_likelihood(
      preset.truth.centers1d(), preset.truth, quad);

  if (args.g.quad_validate) {
    require_cross_scheme("final likelihood", traj.final_likelihood(),
                         traj.final_iterate(), preset.truth);
  }

  const std::filesystem::path out(args.g.out);
  gmml::write_trajectory_csv(out / "trajectory.csv", traj);
  echo_config(args.g, json{{"command", "run"},
                           {"model", args.model_path},
                           {"preset", args.preset},
                           {"init", mu0},
                           {"stepper", args.stepper},
                           {"stepsize", args.stepsize},
                           {"max_iters", args.max_iters},
                           {"step_tol", args.step_tol},
                           {"grad_tol", args.grad_tol}});
  json report_json = report_to_json(report);
  report_json["converged"] = traj.converged;
  report_json["iterations"] = traj.total_iters;
  report_json["final_loglik"] = traj.final_likelihood();
  report_json["l_star"] = l_star;
  report_json["gap_to_truth"] = l_star - traj.final_likelihood();
  write_json(out / "report.json", report_json);

  std::cout << "run: " << (traj.converged ? "converged" : "hit max_iters")
            << " after " << traj.total_iters << " iterations, final loglik "
            << gmml::format_double(traj.final_likelihood()) << ", kind "
            << gmml::to_string(report.kind) << "\n";
  return traj.converged ? kExitOk : kExitNoConvergence;
}

// ---------------------------------------------------------------------------
// mc-failure

struct McArgs {
  GlobalOpts g;
  std::string model_path;
  std::string preset = "tree-m8";
  int trials = 500;
  std::string stepper = "em";
  double stepsize = 0.5;
  double margin = 0.1;
  int max_iters = 2500;
  double step_tol = 1e-10;
  double grad_tol = 0.0;
};

int run_mc(const CLI::App& cmd, McArgs& args) {
  const json file = load_config(cmd, args.g);
  cfg(cmd, file, "--model", "model", args.model_path);
  cfg(cmd, file, "--preset", "preset", args.preset);
  cfg(cmd, file, "--trials", "trials", args.trials);
  cfg(cmd, file, "--stepper", "stepper", args.stepper);
  cfg(cmd, file, "--stepsize", "stepsize", args.stepsize);
  cfg(cmd, file, "--margin", "margin", args.margin);
  cfg(cmd, file, "--max-iters", "max_iters", args.max_iters);
  cfg(cmd, file, "--step-tol", "step_tol", args.step_tol);
  cfg(cmd, file, "--grad-tol", "grad_tol", args.grad_tol);

  gmml::MixtureModel truth;
  std::optional<gmml::TreeConstructionSpec> tree;
  if (!args.model_path.empty()) {
    truth = gmml::read_model_json(args.model_path);
  } else if (args.preset == "tree-m8" || args.preset == "tree-m4") {
    gmml::TreeConstructionSpec spec;
    spec.levels = args.preset == "tree-m8" ? 3 : 2;
    spec.R = args.preset == "tree-m8" ? 9e8 : 5e6;
    spec.paper_faithful = true;
    truth = gmml::tree_construction(spec);
    tree = spec;
  } else if (args.preset == "two") {
    truth = gmml::MixtureModel::line({-4.0, 4.0});
  } else {
    throw CLI::ValidationError("--preset", "expected tree-m8|tree-m4|two");
  }

  gmml::McConfig config;
  config.trials = args.trials;
  config.success_margin = args.margin;
  if (args.stepper == "em") {
    config.stepper = gmml::PopulationStepKind::kEm;
  } else if (args.stepper == "first-order") {
    config.stepper = gmml::PopulationStepKind::kFirstOrder;
  } else {
    throw CLI::ValidationError("--stepper", "expected em|first-order");
  }
  config.stepsize = args.stepsize;
  config.stop = gmml::StoppingRule{args.max_iters, args.step_tol, args.grad_tol};
  config.master_seed = args.g.seed;
  config.threads = args.g.threads;
  config.quad = quad_spec(args.g);

  const gmml::McResult result =
      gmml::mc_failure_rate(truth, tree.has_value() ? &*tree : nullptr, config);

  if (args.g.quad_validate) {
    require_cross_scheme("L(truth)", result.summary.l_star, truth.centers1d(),
                         truth);
  }

  const gmml::McSummary& s = result.summary;
  json summary{{"trials", s.trials},
               {"successes", s.successes},
               {"good_inits", s.good_inits},
               {"all_one_side_goods", s.all_one_side_goods},
               {"event_e_count", s.event_e_count},
               {"trapped_count", s.trapped_count},
               {"success_rate", s.success_rate},
               {"good_init_rate", s.good_init_rate},
               {"event_e_rate", s.event_e_rate},
               {"success_wilson_low", s.success_ci.low},
               {"success_wilson_high", s.success_ci.high},
               {"good_init_wilson_low", s.good_init_ci.low},
               {"good_init_wilson_high", s.good_init_ci.high},
               {"l_star", s.l_star},
               {"c_gap", s.c_gap},
               {"necessity_ok", s.necessity_ok}};
  if (tree.has_value()) {
    const int m = truth.count();
    if ((m & (m - 1)) == 0) {
      summary["exact_good_init_probability"] =
          gmml::exact_good_init_probability(m);
    }
  }

  const std::filesystem::path out(args.g.out);
  gmml::write_trials_csv(out / "trials.csv", result.records);
  echo_config(args.g, json{{"command", "mc-failure"},
                           {"model", args.model_path},
                           {"preset", args.preset},
                           {"trials", args.trials},
                           {"stepper", args.stepper},
                           {"stepsize", args.stepsize},
                           {"margin", args.margin},
                           {"max_iters", args.max_iters},
                           {"step_tol", args.step_tol},
                           {"grad_tol", args.grad_tol}});
  write_json(out / "summary.json", summary);
  std::cout << "mc-failure: " << s.successes << "/" << s.trials
            << " successes, good-init rate " << s.good_init_rate << ", c_gap "
            << gmml::format_double(s.c_gap) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// classify-init

struct ClassifyArgs {
  GlobalOpts g;
  std::string points;
  int levels = 3;
  double R = 9e8;
  double ratio = 0.01;
  bool paper_faithful = true;
};

int run_classify(const CLI::App& cmd, ClassifyArgs& args) {
  const json file = load_config(cmd, args.g);
  cfg(cmd, file, "--points", "points", args.points);
  cfg(cmd, file, "--levels", "levels", args.levels);
  cfg(cmd, file, "--R", "R", args.R);
  cfg(cmd, file, "--ratio", "ratio", args.ratio);
  cfg(cmd, file, "--paper-faithful", "paper_faithful", args.paper_faithful);

  if (args.points.empty()) {
    throw CLI::ValidationError("--points", "a point list is required");
  }
  const std::vector<double> points = parse_center_list(args.points, "--points");
  gmml::TreeConstructionSpec spec;
  spec.levels = args.levels;
  spec.R = args.R;
  spec.ratio = args.ratio;
  spec.paper_faithful = args.paper_faithful;

  const gmml::InitClassification result = gmml::classify_init(points, spec);
  json levels = json::array();
  for (const gmml::LevelCounts& lc : result.levels) {
    levels.push_back(
        json{{"level", lc.level}, {"left", lc.left}, {"right", lc.right}});
  }
  json out_json{{"good", result.good},
                {"reason", gmml::to_string(result.reason)},
                {"levels", levels}};
  const int m = static_cast<int>(points.size());
  if (m >= 1 && (m & (m - 1)) == 0) {
    out_json["exact_good_init_probability"] =
        gmml::exact_good_init_probability(m);
  }

  const std::filesystem::path out(args.g.out);
  echo_config(args.g, json{{"command", "classify-init"},
                           {"points", points},
                           {"levels", args.levels},
                           {"R", args.R},
                           {"ratio", args.ratio},
                           {"paper_faithful", args.paper_faithful}});
  write_json(out / "classification.json", out_json);
  std::cout << "classify-init: " << (result.good ? "good" : "bad") << " ("
            << gmml::to_string(result.reason) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// lemma-suite

struct LemmaArgs {
  GlobalOpts g;
  int trials = 200;
  std::string check;  // empty = full randomized sweep
  double a = 0.0;
  double mu_star = 0.0;
  double r = 0.0;
  std::string truth;
  std::string candidates;
  int target = 0;
  double match_fraction = 1.0 / 6.0;
};

json lemma_report_json(const gmml::LemmaCheckReport& r) {
  return json{{"lemma", r.lemma},
              {"configuration", r.configuration},
              {"computed", r.computed},
              {"bound", r.bound},
              {"margin", r.margin},
              {"pass", r.pass},
              {"sup_at_window_edge", r.sup_at_window_edge}};
}

void write_lemma_csv(const std::filesystem::path& path,
                     const std::vector<gmml::LemmaCheckReport>& reports) {
  std::ostringstream out;
  out << "lemma,configuration,computed,bound,margin,pass,sup_at_window_edge\n";
  for (const gmml::LemmaCheckReport& r : reports) {
    std::string config = r.configuration;
    for (char& ch : config) {
      if (ch == ',') ch = ';';
    }
    out << r.lemma << ',' << config << ',' << gmml::format_double(r.computed)
        << ',' << gmml::format_double(r.bound) << ','
        << gmml::format_double(r.margin) << ',' << (r.pass ? 1 : 0) << ','
        << (r.sup_at_window_edge ? 1 : 0) << '\n';
  }
  gmml::write_text_file(path, out.str());
}

int run_lemmas(const CLI::App& cmd, LemmaArgs& args) {
  const json file = load_config(cmd, args.g);
  cfg(cmd, file, "--trials", "trials", args.trials);
  cfg(cmd, file, "--check", "check", args.check);
  cfg(cmd, file, "--a", "a", args.a);
  cfg(cmd, file, "--mu-star", "mu_star", args.mu_star);
  cfg(cmd, file, "--r", "r", args.r);
  cfg(cmd, file, "--truth", "truth", args.truth);
  cfg(cmd, file, "--candidates", "candidates", args.candidates);
  cfg(cmd, file, "--target", "target", args.target);
  cfg(cmd, file, "--match-fraction", "match_fraction", args.match_fraction);

  const gmml::QuadratureSpec quad = quad_spec(args.g);
  std::vector<gmml::LemmaCheckReport> reports;

  if (args.check.empty()) {
    gmml::Rng rng(args.g.seed);
    for (int t = 0; t < args.trials; ++t) {
      reports.push_back(
          gmml::check_lemma_general_calc(gmml::random_general_calc_config(rng), quad));
      reports.push_back(gmml::check_lemma_center_positive(
          gmml::random_center_positive_config(rng), quad));
      reports.push_back(gmml::check_lemma_center_negative(
          gmml::random_center_negative_config(rng), quad));
      reports.push_back(
          gmml::check_lemma_wdifference(gmml::random_wdifference_config(rng)));
    }
  } else if (args.check == "general_calc") {
    gmml::GeneralCalcConfig config;
    config.a = args.a;
    config.truth = parse_center_list(args.truth, "--truth");
    config.candidates = parse_center_list(args.candidates, "--candidates");
    config.target = args.target;
    config.match_fraction = args.match_fraction;
    reports.push_back(gmml::check_lemma_general_calc(config, quad));
  } else if (args.check == "center_positive") {
    gmml::CenterPositiveConfig config;
    config.a = args.a;
    config.mu_star = args.mu_star;
    config.candidates = parse_center_list(args.candidates, "--candidates");
    config.target = args.target;
    reports.push_back(gmml::check_lemma_center_positive(config, quad));
  } else if (args.check == "center_negative") {
    gmml::CenterNegativeConfig config;
    config.r = args.r;
    config.candidates = parse_center_list(args.candidates, "--candidates");
    config.target = args.target;
    reports.push_back(gmml::check_lemma_center_negative(config, quad));
  } else if (args.check == "wdifference") {
    gmml::WdifferenceConfig config;
    config.candidates = parse_center_list(args.candidates, "--candidates");
    config.target = args.target;
    reports.push_back(gmml::check_lemma_wdifference(config));
  } else {
    throw CLI::ValidationError(
        "--check",
        "expected general_calc|center_positive|center_negative|wdifference");
  }

  int failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const gmml::LemmaCheckReport& r : reports) {
    if (!r.pass) ++failures;
    worst_margin = std::min(worst_margin, r.margin);
  }

  const std::filesystem::path out(args.g.out);
  write_lemma_csv(out / "lemma_reports.csv", reports);
  echo_config(args.g, json{{"command", "lemma-suite"},
                           {"trials", args.trials},
                           {"check", args.check}});
  write_json(out / "lemma_summary.json",
             json{{"checks", reports.size()},
                  {"failures", failures},
                  {"worst_margin", worst_margin}});
  std::cout << "lemma-suite: " << reports.size() << " checks, " << failures
            << " failures, worst margin " << gmml::format_double(worst_margin)
            << "\n";
  return failures == 0 ? kExitOk : kExitBoundViolation;
}

// ---------------------------------------------------------------------------
// saddle-trials

struct SaddleArgs {
  GlobalOpts g;
  std::string model_path;
  std::string preset = "two";
  int trials = 200;
  double stepsize = 0.5;
  int max_iters = 400000;
  double step_tol = 1e-10;
  double grad_tol = 9e-8;
  int jacobian_stride = 0;
};

int run_saddles(const CLI::App& cmd, SaddleArgs& args) {
  const json file = load_config(cmd, args.g);
  cfg(cmd, file, "--model", "model", args.model_path);
  cfg(cmd, file, "--preset", "preset", args.preset);
  cfg(cmd, file, "--trials", "trials", args.trials);
  cfg(cmd, file, "--stepsize", "stepsize", args.stepsize);
  cfg(cmd, file, "--max-iters", "max_iters", args.max_iters);
  cfg(cmd, file, "--step-tol", "step_tol", args.step_tol);
  cfg(cmd, file, "--grad-tol", "grad_tol", args.grad_tol);
  cfg(cmd, file, "--jacobian-stride", "jacobian_stride", args.jacobian_stride);

  gmml::MixtureModel truth;
  if (!args.model_path.empty()) {
    truth = gmml::read_model_json(args.model_path);
  } else if (args.preset == "two") {
    truth = gmml::MixtureModel::line({-4.0, 4.0});
  } else if (args.preset == "three") {
    truth = gmml::three_component({5.0, 20.0});
  } else {
    throw CLI::ValidationError("--preset", "expected two|three");
  }

  gmml::SaddleTrialConfig config;
  config.trials = args.trials;
  config.stepsize = args.stepsize;
  config.stop = gmml::StoppingRule{args.max_iters, args.step_tol, args.grad_tol};
  config.master_seed = args.g.seed;
  config.threads = args.g.threads;
  config.jacobian_stride = args.jacobian_stride;
  config.quad = quad_spec(args.g);

  const gmml::SaddleTrialSummary summary =
      gmml::saddle_avoidance_trial(truth, config);

  std::ostringstream csv;
  csv << "trial";
  for (int i = 1; i <= truth.count(); ++i) csv << ",mu_" << i;
  csv << ",grad_norm,kind\n";
  for (std::size_t i = 0; i < summary.limits.size(); ++i) {
    const gmml::CriticalPointReport& rep = summary.limits[i];
    csv << i;
    for (const double mu : rep.mu) csv << ',' << gmml::format_double(mu);
    csv << ',' << gmml::format_double(rep.grad_norm) << ','
        << gmml::to_string(rep.kind) << '\n';
  }

  const std::filesystem::path out(args.g.out);
  gmml::write_text_file(out / "limits.csv", csv.str());
  echo_config(args.g, json{{"command", "saddle-trials"},
                           {"model", args.model_path},
                           {"preset", args.preset},
                           {"trials", args.trials},
                           {"stepsize", args.stepsize},
                           {"max_iters", args.max_iters},
                           {"step_tol", args.step_tol},
                           {"grad_tol", args.grad_tol},
                           {"jacobian_stride", args.jacobian_stride}});
  write_json(out / "saddle_summary.json",
             json{{"trials", summary.trials},
                  {"reached_grad_tol", summary.reached_grad_tol},
                  {"strict_saddles", summary.strict_saddles},
                  {"local_maxima", summary.local_maxima},
                  {"indeterminate", summary.indeterminate},
                  {"worst_final_grad", summary.worst_final_grad},
                  {"min_jacobian_eig", summary.min_jacobian_eig}});
  std::cout << "saddle-trials: " << summary.reached_grad_tol << "/"
            << summary.trials << " reached grad tol, "
            << summary.strict_saddles << " strict saddles\n";
  return summary.reached_grad_tol == summary.trials ? kExitOk
                                                    : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Likelihood-landscape experiments for equal-weight Gaussian "
               "mixtures"};
  app.require_subcommand(1);

  SurfaceArgs surface_args;
  CLI::App* surface = app.add_subcommand(
      "surface", "Dense likelihood/gradient grid for two-candidate models");
  add_global_options(surface, surface_args.g);
  surface->add_option("--model", surface_args.model_path,
                      "Truth model JSON (default: centers -4, 4)");
  surface->add_option("--lo", surface_args.lo, "Grid lower bound");
  surface->add_option("--hi", surface_args.hi, "Grid upper bound");
  surface->add_option("--step", surface_args.step, "Grid step");

  ConstructArgs construct_args;
  CLI::App* construct =
      app.add_subcommand("construct", "Emit an adversarial instance as JSON");
  add_global_options(construct, construct_args.g);
  construct->add_option("--kind", construct_args.kind,
                        "three|extended|tree|pruned|diffuse");
  construct->add_option("--R", construct_args.R, "Scale parameter");
  construct->add_option("--gamma", construct_args.gamma, "Far-center factor");
  construct->add_option("--count", construct_args.count,
                        "Center count (extended/pruned)");
  construct->add_option("--levels", construct_args.levels, "Tree levels");
  construct->add_option("--ratio", construct_args.ratio, "Tree level ratio");
  construct->add_flag("--paper-faithful", construct_args.paper_faithful,
                      "Enforce the strict scale constraints");
  construct->add_option("--c", construct_args.c, "Diffuse separation factor");
  construct->add_option("--delta", construct_args.delta,
                        "Diffuse ball radius (0 = log(M)+4)");
  construct->add_option("--left", construct_args.left,
                        "Diffuse left-ball centers, comma separated");
  construct->add_option("--right", construct_args.right,
                        "Diffuse right-ball centers, comma separated");
  construct->add_option("--far", construct_args.far,
                        "Diffuse far centers, comma separated");

  BoundaryArgs boundary_args;
  CLI::App* boundary = app.add_subcommand(
      "boundary-values", "Interior value and face maxima of the trapping region");
  add_global_options(boundary, boundary_args.g);
  boundary->add_option("--R", boundary_args.R, "Scale parameter");
  boundary->add_option("--gamma", boundary_args.gamma, "Far-center factor");
  boundary->add_option("--grid-n", boundary_args.grid_n,
                       "Per-axis face grid resolution");
  boundary->add_option("--refine-starts", boundary_args.refine_starts,
                       "Grid cells refined by local ascent");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand(
      "run", "Iterate a population stepper and classify the limit point");
  add_global_options(run, run_args.g);
  run->add_option("--model", run_args.model_path, "Truth model JSON");
  run->add_option("--preset", run_args.preset,
                  "two|three|tree-m8|tree-m4 (ignored with --model)");
  run->add_option("--R", run_args.preset_R, "Preset scale override");
  run->add_option("--gamma", run_args.preset_gamma, "Preset gamma override");
  run->add_option("--init", run_args.init, "Initial centers, comma separated");
  run->add_flag("--interior", run_args.interior,
                "Start from the trapping-region interior point (three preset)");
  run->add_option("--stepper", run_args.stepper, "em|first-order");
  run->add_option("--stepsize", run_args.stepsize, "First-order stepsize");
  run->add_option("--max-iters", run_args.max_iters, "Iteration cap");
  run->add_option("--step-tol", run_args.step_tol, "Movement stop threshold");
  run->add_option("--grad-tol", run_args.grad_tol,
                  "Gradient-norm stop threshold (0 = off)");

  McArgs mc_args;
  CLI::App* mc = app.add_subcommand(
      "mc-failure", "Monte Carlo failure-rate experiment from random inits");
  add_global_options(mc, mc_args.g);
  mc->add_option("--model", mc_args.model_path, "Truth model JSON");
  mc->add_option("--preset", mc_args.preset, "tree-m8|tree-m4|two");
  mc->add_option("--trials", mc_args.trials, "Trial count");
  mc->add_option("--stepper", mc_args.stepper, "em|first-order");
  mc->add_option("--stepsize", mc_args.stepsize, "First-order stepsize");
  mc->add_option("--margin", mc_args.margin, "Success margin below L(truth)");
  mc->add_option("--max-iters", mc_args.max_iters, "Iteration cap per trial");
  mc->add_option("--step-tol", mc_args.step_tol, "Movement stop threshold");
  mc->add_option("--grad-tol", mc_args.grad_tol,
                 "Gradient-norm stop threshold (0 = off)");

  ClassifyArgs classify_args;
  CLI::App* classify = app.add_subcommand(
      "classify-init", "Recursive goodness check for an initial point set");
  add_global_options(classify, classify_args.g);
  classify->add_option("--points", classify_args.points,
                       "Initial points, comma separated");
  classify->add_option("--levels", classify_args.levels, "Tree levels");
  classify->add_option("--R", classify_args.R, "Tree scale");
  classify->add_option("--ratio", classify_args.ratio, "Tree level ratio");
  classify->add_flag("--paper-faithful,!--no-paper-faithful",
                     classify_args.paper_faithful,
                     "Enforce the strict scale constraints");

  LemmaArgs lemma_args;
  CLI::App* lemmas = app.add_subcommand(
      "lemma-suite", "Numerical inequality checks with hypothesis validation");
  add_global_options(lemmas, lemma_args.g);
  lemmas->add_option("--trials", lemma_args.trials,
                     "Randomized configurations per inequality");
  lemmas->add_option("--check", lemma_args.check,
                     "Run a single named check instead of the sweep");
  lemmas->add_option("--a", lemma_args.a, "Separation parameter");
  lemmas->add_option("--mu-star", lemma_args.mu_star, "Single truth center");
  lemmas->add_option("--r", lemma_args.r, "Negative-center magnitude");
  lemmas->add_option("--truth", lemma_args.truth,
                     "Truth centers, comma separated");
  lemmas->add_option("--candidates", lemma_args.candidates,
                     "Candidate centers, comma separated");
  lemmas->add_option("--target", lemma_args.target, "Tested candidate index");
  lemmas->add_option("--match-fraction", lemma_args.match_fraction,
                     "Far-center matching radius as a fraction of magnitude");

  SaddleArgs saddle_args;
  CLI::App* saddles = app.add_subcommand(
      "saddle-trials", "First-order runs from random inits; classify limits");
  add_global_options(saddles, saddle_args.g);
  saddles->add_option("--model", saddle_args.model_path, "Truth model JSON");
  saddles->add_option("--preset", saddle_args.preset, "two|three");
  saddles->add_option("--trials", saddle_args.trials, "Trial count");
  saddles->add_option("--stepsize", saddle_args.stepsize, "Stepsize");
  saddles->add_option("--max-iters", saddle_args.max_iters, "Iteration cap");
  saddles->add_option("--step-tol", saddle_args.step_tol,
                      "Movement stop threshold");
  saddles->add_option("--grad-tol", saddle_args.grad_tol,
                      "Gradient-norm stop threshold");
  saddles->add_option("--jacobian-stride", saddle_args.jacobian_stride,
                      "Check the step Jacobian every k-th recorded iterate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (surface->parsed()) return run_surface(*surface, surface_args);
    if (construct->parsed()) return run_construct(*construct, construct_args);
    if (boundary->parsed()) return run_boundary(*boundary, boundary_args);
    if (run->parsed()) return run_run(*run, run_args);
    if (mc->parsed()) return run_mc(*mc, mc_args);
    if (classify->parsed()) return run_classify(*classify, classify_args);
    if (lemmas->parsed()) return run_lemmas(*lemmas, lemma_args);
    if (saddles->parsed()) return run_saddles(*saddles, saddle_args);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const gmml::hypothesis_error& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
