#pragma once

#include <array>
#include <span>
#include <vector>

#include "gmml/em.hpp"
#include "gmml/model.hpp"
#include "gmml/quadrature.hpp"

namespace gmml {

/// Three components at (-R, R, gamma*R). For gamma large this family has a
/// non-global local maximum trapped in the region D below.
struct ThreeComponentSpec {
  double R = 5.0;
  double gamma = 20.0;

  void validate() const;  // R > 0, gamma > 1
};

MixtureModel three_component(const ThreeComponentSpec& spec);

/// D = { mu1 <= gR/3,  mu2 >= 2gR/3,  mu3 >= 2gR/3 } with g = gamma.
bool region_d_contains(std::span<const double> mu,
                       const ThreeComponentSpec& spec);

/// Interior point (0, gR, gR) whose likelihood exceeds the boundary maxima.
std::array<double, 3> interior_point(const ThreeComponentSpec& spec);

struct FaceSearchSpec {
  int grid_n = 60;            // per-axis grid resolution (>= 50)
  int refine_starts = 8;      // best grid cells refined by projected ascent
  int refine_max_iters = 5000;
  double refine_stepsize = 0.5;
  double refine_step_tol = 1e-9;
  double box_factor = 5.0;    // search box is [-f*gR, f*gR]^3 intersect face
};

struct FaceResult {
  double value = 0.0;               // max of L over the face
  std::array<double, 3> argmax{};   // where it was attained
  bool refinement_converged = true; // false -> coarse grid value returned
};

/// v0 = L at the interior point; v1..v3 = face maxima of the region D
/// found by coarse grid search plus local ascent refinement.
struct BoundaryValues {
  double v0 = 0.0;
  FaceResult v1, v2, v3;

  double max_face_value() const;
};

BoundaryValues boundary_values(const ThreeComponentSpec& spec,
                               const QuadratureSpec& quad,
                               const FaceSearchSpec& search = {});

/// M >= 3 generalization: centers (2i - M) R / (M - 2) for i = 1..M-1 plus a
/// far center at gamma*R.
MixtureModel extended_m_construction(int M, double R, double gamma);

/// Binary-tree center layout: mu(eps) = sum_i eps_i ratio^(i-1) R over all
/// sign vectors eps in {-1,+1}^levels. paper_faithful pins ratio = 1/100 and
/// requires R >= 100^(levels+1) (count+1).
struct TreeConstructionSpec {
  int levels = 3;
  double R = 9e8;
  double ratio = 0.01;
  bool paper_faithful = false;

  int count() const { return 1 << levels; }
  void validate() const;
};

MixtureModel tree_construction(const TreeConstructionSpec& spec);

/// Tree with only M <= 2^levels centers kept: each node sends ceil(l/2) of
/// its l centers to the left child and floor(l/2) to the right, so a single
/// center descends to the leftmost leaf of its subtree.
MixtureModel pruned_tree(const TreeConstructionSpec& spec, int M);

/// Disjoint urns around each level-l sign prefix: center = partial sum of the
/// first l terms of mu(eps), half-width = 2 R ratio^l / (1 - ratio).
struct Urn {
  double center = 0.0;
  double halfwidth = 0.0;

  bool contains(double x) const {
    return center - halfwidth <= x && x <= center + halfwidth;
  }
};

struct UrnPartition {
  int level = 0;
  std::vector<Urn> urns;  // 2^level urns, in increasing center order
};

UrnPartition urns_at_level(const TreeConstructionSpec& spec, int level);

/// Level-1 urn pair plus far region, for trajectory center counting.
RegionSet tree_level1_regions(const TreeConstructionSpec& spec);

/// Diffuse family: M centers split between B(-c*delta, delta) and
/// B(c*delta, delta), with every one of the two balls nonempty, plus
/// far centers outside B(0, 20*c*delta).
struct DiffuseSpec {
  double c = 25.0;
  double delta = 0.0;
  std::vector<double> left;   // inside B(-c delta, delta)
  std::vector<double> right;  // inside B(+c delta, delta)
  std::vector<double> far_centers;  // outside B(0, 20 c delta)

  int inner_count() const {
    return static_cast<int>(left.size() + right.size());
  }
  int total_count() const {
    return inner_count() + static_cast<int>(far_centers.size());
  }
  void validate() const;  // c > 20, delta > log(inner_count()) + 3, regions
};

MixtureModel make_diffuse(const DiffuseSpec& spec);

/// True iff every center is in one of the three diffuse regions and both
/// inner balls are nonempty.
bool validate_diffuse(const MixtureModel& model, double c, double delta);

/// Trapping regions B(-c delta, 2 delta), B(c delta, 2 delta), complement of
/// B(0, 20 c delta).
RegionSet diffuse_regions(double c, double delta);

}  // namespace gmml
