#include "gmml/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmml/population.hpp"

namespace gmml {

void ThreeComponentSpec::validate() const {
  if (!(R > 0.0)) throw std::invalid_argument("three_component: R must be > 0");
  if (!(gamma > 1.0)) {
    throw std::invalid_argument("three_component: gamma must be > 1");
  }
}

MixtureModel three_component(const ThreeComponentSpec& spec) {
  spec.validate();
  return MixtureModel::line({-spec.R, spec.R, spec.gamma * spec.R});
}

bool region_d_contains(std::span<const double> mu,
                       const ThreeComponentSpec& spec) {
  if (mu.size() != 3) return false;
  const double gr = spec.gamma * spec.R;
  return mu[0] <= gr / 3.0 && mu[1] >= 2.0 * gr / 3.0 && mu[2] >= 2.0 * gr / 3.0;
}

std::array<double, 3> interior_point(const ThreeComponentSpec& spec) {
  const double gr = spec.gamma * spec.R;
  return {0.0, gr, gr};
}

double BoundaryValues::max_face_value() const {
  return std::max({v1.value, v2.value, v3.value});
}

namespace {

struct Interval {
  double lo = 0.0, hi = 0.0;
};

/// Maximizes L over one closed face of the region: coordinate `fixed` pinned
/// at its boundary value, the other two ranging over box-clipped intervals.
/// Coarse grid scan, then projected gradient ascent from the best cells.
FaceResult face_max(int fixed, double fixed_val, const Interval& a,
                    const Interval& b, const MixtureModel& truth,
                    const QuadratureSpec& quad, const FaceSearchSpec& search) {
  const int free_a = fixed == 0 ? 1 : 0;
  const int free_b = fixed == 2 ? 1 : 2;

  std::vector<double> mu(3);
  mu[static_cast<std::size_t>(fixed)] = fixed_val;
  auto eval_at = [&](double x, double y) {
    mu[static_cast<std::size_t>(free_a)] = x;
    mu[static_cast<std::size_t>(free_b)] = y;
    return population_log_likelihood(mu, truth, quad);
  };

  // Coarse scan, keeping the best cells as refinement starts.
  struct Cell {
    double value;
    double x, y;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(search.grid_n) * search.grid_n);
  const double ha = (a.hi - a.lo) / (search.grid_n - 1);
  const double hb = (b.hi - b.lo) / (search.grid_n - 1);
  for (int i = 0; i < search.grid_n; ++i) {
    for (int j = 0; j < search.grid_n; ++j) {
      const double x = a.lo + ha * i;
      const double y = b.lo + hb * j;
      cells.push_back({eval_at(x, y), x, y});
    }
  }
  std::partial_sort(cells.begin(),
                    cells.begin() + std::min<std::size_t>(
                                        cells.size(),
                                        static_cast<std::size_t>(
                                            search.refine_starts)),
                    cells.end(),
                    [](const Cell& l, const Cell& r) { return l.value > r.value; });

  FaceResult coarse;
  coarse.value = cells.front().value;
  mu[static_cast<std::size_t>(free_a)] = cells.front().x;
  mu[static_cast<std::size_t>(free_b)] = cells.front().y;
  coarse.argmax = {mu[0], mu[1], mu[2]};
  coarse.refinement_converged = false;

  FaceResult best = coarse;
  const int starts =
      std::min(static_cast<int>(cells.size()), search.refine_starts);
  for (int s = 0; s < starts; ++s) {
    double x = cells[static_cast<std::size_t>(s)].x;
    double y = cells[static_cast<std::size_t>(s)].y;
    bool converged = false;
    for (int t = 0; t < search.refine_max_iters; ++t) {
      mu[static_cast<std::size_t>(free_a)] = x;
      mu[static_cast<std::size_t>(free_b)] = y;
      const PopulationEval ev = population_eval(mu, truth, quad);
      const double nx = std::clamp(
          x + search.refine_stepsize * ev.gradient[static_cast<std::size_t>(free_a)],
          a.lo, a.hi);
      const double ny = std::clamp(
          y + search.refine_stepsize * ev.gradient[static_cast<std::size_t>(free_b)],
          b.lo, b.hi);
      const double movement = std::max(std::abs(nx - x), std::abs(ny - y));
      x = nx;
      y = ny;
      if (movement <= search.refine_step_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) continue;
    const double value = eval_at(x, y);
    if (!best.refinement_converged || value > best.value) {
      best.value = std::max(value, coarse.value);
      if (value >= coarse.value) {
        mu[static_cast<std::size_t>(free_a)] = x;
        mu[static_cast<std::size_t>(free_b)] = y;
        best.argmax = {mu[0], mu[1], mu[2]};
      } else {
        best.argmax = coarse.argmax;
      }
      best.refinement_converged = true;
    }
  }
  return best;
}

}  // namespace

BoundaryValues boundary_values(const ThreeComponentSpec& spec,
                               const QuadratureSpec& quad,
                               const FaceSearchSpec& search) {
  spec.validate();
  if (search.grid_n < 2) {
    throw std::invalid_argument("boundary_values: grid_n must be >= 2");
  }
  const MixtureModel truth = three_component(spec);
  const double gr = spec.gamma * spec.R;
  const double box = search.box_factor * gr;
  const Interval low_free{-box, gr / 3.0};       // mu1's range inside D
  const Interval high_free{2.0 * gr / 3.0, box}; // mu2/mu3's range inside D

  BoundaryValues out;
  const auto inner = interior_point(spec);
  out.v0 = population_log_likelihood(std::span<const double>(inner), truth, quad);
  out.v1 = face_max(0, gr / 3.0, high_free, high_free, truth, quad, search);
  out.v2 = face_max(1, 2.0 * gr / 3.0, low_free, high_free, truth, quad, search);
  out.v3 = face_max(2, 2.0 * gr / 3.0, low_free, high_free, truth, quad, search);
  return out;
}

MixtureModel extended_m_construction(int M, double R, double gamma) {
  if (M < 3) throw std::invalid_argument("extended construction needs M >= 3");
  if (!(R > 0.0) || !(gamma > 1.0)) {
    throw std::invalid_argument("extended construction: R > 0, gamma > 1");
  }
  std::vector<double> centers(static_cast<std::size_t>(M));
  for (int i = 1; i < M; ++i) {
    centers[static_cast<std::size_t>(i - 1)] =
        (2.0 * i - M) * R / (M - 2.0);
  }
  centers.back() = gamma * R;
  return MixtureModel::line(std::move(centers));
}

void TreeConstructionSpec::validate() const {
  if (levels < 1 || levels > 30) {
    throw std::invalid_argument("tree: levels must be in [1, 30]");
  }
  if (!(R > 0.0)) throw std::invalid_argument("tree: R must be > 0");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("tree: ratio must be in (0, 1)");
  }
  if (paper_faithful) {
    if (std::abs(ratio - 0.01) > 1e-12) {
      throw std::invalid_argument("tree: paper-faithful mode pins ratio = 1/100");
    }
    const double min_r = std::pow(100.0, levels + 1) * (count() + 1);
    if (R < min_r) {
      throw std::invalid_argument(
          "tree: paper-faithful mode requires R >= 100^(levels+1) * (count+1)");
    }
  }
}

MixtureModel tree_construction(const TreeConstructionSpec& spec) {
  spec.validate();
  const int m = spec.levels;
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(1) << m);
  for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
    double mu = 0.0;
    double scale = spec.R;
    for (int i = 0; i < m; ++i) {
      mu += (((bits >> i) & 1u) ? 1.0 : -1.0) * scale;
      scale *= spec.ratio;
    }
    centers.push_back(mu);
  }
  std::sort(centers.begin(), centers.end());
  for (std::size_t i = 1; i < centers.size(); ++i) {
    if (!(centers[i - 1] < centers[i])) {
      throw std::invalid_argument("tree: ratio produces coincident centers");
    }
  }
  return MixtureModel::line(std::move(centers));
}

namespace {

void prune_rec(const TreeConstructionSpec& spec, int level, double partial,
               int count, std::vector<double>& out) {
  if (count == 0) return;
  if (level > spec.levels) {
    out.push_back(partial);
    return;
  }
  const double offset = spec.R * std::pow(spec.ratio, level - 1);
  const int left = (count + 1) / 2;  // ceil; a lone center descends leftward
  prune_rec(spec, level + 1, partial - offset, left, out);
  prune_rec(spec, level + 1, partial + offset, count - left, out);
}

}  // namespace

MixtureModel pruned_tree(const TreeConstructionSpec& spec, int M) {
  spec.validate();
  const int full = spec.count();
  if (M <= full / 2 || M > full) {
    throw std::invalid_argument(
        "pruned_tree: count must satisfy 2^(levels-1) < M <= 2^levels");
  }
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(M));
  prune_rec(spec, 1, 0.0, M, centers);
  std::sort(centers.begin(), centers.end());
  return MixtureModel::line(std::move(centers));
}

UrnPartition urns_at_level(const TreeConstructionSpec& spec, int level) {
  spec.validate();
  if (level < 1 || level > spec.levels) {
    throw std::invalid_argument("urns_at_level: level out of range");
  }
  UrnPartition part;
  part.level = level;
  const double halfwidth =
      2.0 * spec.R * std::pow(spec.ratio, level) / (1.0 - spec.ratio);
  part.urns.reserve(static_cast<std::size_t>(1) << level);
  for (std::uint32_t bits = 0; bits < (1u << level); ++bits) {
    double center = 0.0;
    double scale = spec.R;
    for (int i = 0; i < level; ++i) {
      center += ((bits >> i) & 1u) ? scale : -scale;
      scale *= spec.ratio;
    }
    part.urns.push_back({center, halfwidth});
  }
  std::sort(part.urns.begin(), part.urns.end(),
            [](const Urn& a, const Urn& b) { return a.center < b.center; });
  return part;
}

RegionSet tree_level1_regions(const TreeConstructionSpec& spec) {
  const UrnPartition level1 = urns_at_level(spec, 1);
  RegionSet regions;
  regions.left_lo = level1.urns[0].center - level1.urns[0].halfwidth;
  regions.left_hi = level1.urns[0].center + level1.urns[0].halfwidth;
  regions.right_lo = level1.urns[1].center - level1.urns[1].halfwidth;
  regions.right_hi = level1.urns[1].center + level1.urns[1].halfwidth;
  regions.far_radius = 2.0 * spec.R;
  return regions;
}

void DiffuseSpec::validate() const {
  if (!(c > 20.0)) throw std::invalid_argument("diffuse: c must be > 20");
  if (left.empty() || right.empty()) {
    throw std::invalid_argument("diffuse: both inner balls must be nonempty");
  }
  if (!(delta > std::log(static_cast<double>(inner_count())) + 3.0)) {
    throw std::invalid_argument("diffuse: delta must exceed log(M) + 3");
  }
  const double cd = c * delta;
  for (const double x : left) {
    if (std::abs(x + cd) > delta) {
      throw std::invalid_argument("diffuse: left center outside B(-c*delta, delta)");
    }
  }
  for (const double x : right) {
    if (std::abs(x - cd) > delta) {
      throw std::invalid_argument("diffuse: right center outside B(c*delta, delta)");
    }
  }
  for (const double x : far_centers) {
    if (std::abs(x) <= 20.0 * cd) {
      throw std::invalid_argument("diffuse: far center inside B(0, 20*c*delta)");
    }
  }
}

MixtureModel make_diffuse(const DiffuseSpec& spec) {
  spec.validate();
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(spec.total_count()));
  centers.insert(centers.end(), spec.left.begin(), spec.left.end());
  centers.insert(centers.end(), spec.right.begin(), spec.right.end());
  centers.insert(centers.end(), spec.far_centers.begin(), spec.far_centers.end());
  return MixtureModel::line(std::move(centers));
}

bool validate_diffuse(const MixtureModel& model, double c, double delta) {
  if (model.dim() != 1) return false;
  const double cd = c * delta;
  int left = 0, right = 0;
  for (const double x : model.centers1d()) {
    if (std::abs(x + cd) <= delta) {
      ++left;
    } else if (std::abs(x - cd) <= delta) {
      ++right;
    } else if (std::abs(x) <= 20.0 * cd) {
      return false;  // neither inner ball nor the far region
    }
  }
  return left >= 1 && right >= 1;
}

RegionSet diffuse_regions(double c, double delta) {
  const double cd = c * delta;
  RegionSet regions;
  regions.left_lo = -cd - 2.0 * delta;
  regions.left_hi = -cd + 2.0 * delta;
  regions.right_lo = cd - 2.0 * delta;
  regions.right_hi = cd + 2.0 * delta;
  regions.far_radius = 20.0 * cd;
  return regions;
}

}  // namespace gmml
