#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gmml/constructions.hpp"
#include "gmml/density.hpp"
#include "gmml/model.hpp"
#include "gmml/population.hpp"
#include "gmml/quadrature.hpp"

namespace {

using V = std::vector<double>;

const gmml::QuadratureSpec kQuad{};

void check_centers(const gmml::MixtureModel& m, const V& want, double tol) {
  REQUIRE(m.dim() == 1);
  REQUIRE(m.count() == static_cast<int>(want.size()));
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(std::abs(m.centers1d()[i] - want[i]) <= tol);
  }
}

}  // namespace

TEST_CASE("three-component family places centers at -R, R, gamma R") {
  const gmml::ThreeComponentSpec spec{5.0, 20.0};
  check_centers(gmml::three_component(spec), V{-5.0, 5.0, 100.0}, 0.0);
  CHECK_THROWS_AS(gmml::three_component({0.0, 20.0}), std::invalid_argument);
  CHECK_THROWS_AS(gmml::three_component({5.0, 1.0}), std::invalid_argument);
}

TEST_CASE("trapping region membership follows the face inequalities") {
  const gmml::ThreeComponentSpec spec{5.0, 20.0};  // gamma R = 100
  const auto inner = gmml::interior_point(spec);
  CHECK(inner[0] == 0.0);
  CHECK(inner[1] == 100.0);
  CHECK(inner[2] == 100.0);
  CHECK(gmml::region_d_contains(inner, spec));
  const double gr3 = 100.0 / 3.0;
  CHECK(gmml::region_d_contains(V{gr3, 2.0 * gr3, 2.0 * gr3}, spec));
  CHECK(!gmml::region_d_contains(V{34.0, 100.0, 100.0}, spec));
  CHECK(!gmml::region_d_contains(V{0.0, 50.0, 100.0}, spec));
  CHECK(!gmml::region_d_contains(V{0.0, 100.0, 50.0}, spec));
  CHECK(!gmml::region_d_contains(V{0.0, 100.0}, spec));
}

TEST_CASE("boundary survey reproduces the frozen interior and face values") {
  const gmml::ThreeComponentSpec spec{5.0, 20.0};
  const auto bv = gmml::boundary_values(spec, kQuad);

  CHECK(std::abs(bv.v0 - -10.619835095019473) < 1e-9);
  CHECK(std::abs(bv.v2.value - -10.85088415520612) < 1e-6);
  CHECK(std::abs(bv.v3.value - -10.85088415520612) < 1e-6);
  const double margin = bv.v0 - bv.max_face_value();
  CHECK(std::abs(margin - 0.23104906018664906) < 1e-6);
  CHECK(margin > 0.01);

  CHECK(bv.v1.refinement_converged);
  CHECK(bv.v2.refinement_converged);
  CHECK(bv.v3.refinement_converged);

  // Each argmax sits on its face and reproduces the reported value.
  const gmml::MixtureModel truth = gmml::three_component(spec);
  const double gr = 100.0;
  CHECK(bv.v1.argmax[0] == gr / 3.0);
  CHECK(bv.v2.argmax[1] == 2.0 * gr / 3.0);
  CHECK(bv.v3.argmax[2] == 2.0 * gr / 3.0);
  for (const auto& face : {bv.v1, bv.v2, bv.v3}) {
    const double at = gmml::population_log_likelihood(
        V{face.argmax[0], face.argmax[1], face.argmax[2]}, truth, kQuad);
    CHECK(std::abs(at - face.value) < 1e-12);
    CHECK(face.value < bv.v0);
  }

  CHECK_THROWS_AS(
      gmml::boundary_values(spec, kQuad, gmml::FaceSearchSpec{1}),
      std::invalid_argument);
}

TEST_CASE("interior value approaches its closed form as gamma grows") {
  const gmml::ThreeComponentSpec spec{5.0, 40.0};
  const auto inner = gmml::interior_point(spec);
  const double v0 = gmml::population_log_likelihood(
      V{inner[0], inner[1], inner[2]}, gmml::three_component(spec), kQuad);
  const double want = -(2.0 * 25.0 + 3.0 - 2.0 * std::log(2.0)) / 6.0 -
                      std::log(3.0) - gmml::kLogSqrt2Pi;
  CHECK(std::abs(v0 - want) < 1e-2);
}

TEST_CASE("interior-over-boundary margin grows with gamma") {
  const double slack = 5e-10;
  double prev = -1e300;
  for (double gamma : {10.0, 20.0, 40.0}) {
    const gmml::ThreeComponentSpec spec{5.0, gamma};
    const auto bv = gmml::boundary_values(spec, kQuad);
    const double margin = bv.v0 - bv.max_face_value();
    CHECK(margin >= prev - slack);
    prev = margin;
  }
}

TEST_CASE("extended family spaces inner centers evenly and adds a far center") {
  check_centers(gmml::extended_m_construction(4, 3.0, 50.0),
                V{-3.0, 0.0, 3.0, 150.0}, 0.0);
  check_centers(gmml::extended_m_construction(5, 3.0, 100.0),
                V{-3.0, -1.0, 1.0, 3.0, 300.0}, 1e-12);
  // M = 3 degenerates to the three-component family.
  const auto a = gmml::extended_m_construction(3, 5.0, 20.0);
  const auto b = gmml::three_component({5.0, 20.0});
  check_centers(a, b.centers1d(), 0.0);
  CHECK_THROWS_AS(gmml::extended_m_construction(2, 3.0, 50.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gmml::extended_m_construction(4, 3.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("tree layout enumerates signed geometric sums in sorted order") {
  gmml::TreeConstructionSpec spec;
  spec.levels = 2;
  spec.R = 1.0;
  check_centers(gmml::tree_construction(spec),
                V{-1.01, -0.99, 0.99, 1.01}, 1e-15);
  CHECK(spec.count() == 4);

  gmml::TreeConstructionSpec one;
  one.levels = 1;
  one.R = 2.0;
  check_centers(gmml::tree_construction(one), V{-2.0, 2.0}, 0.0);
}

TEST_CASE("tree validation guards levels, ratio, and the faithful scale") {
  gmml::TreeConstructionSpec spec;
  spec.levels = 0;
  CHECK_THROWS_AS(gmml::tree_construction(spec), std::invalid_argument);
  spec.levels = 2;
  spec.ratio = 1.0;
  CHECK_THROWS_AS(gmml::tree_construction(spec), std::invalid_argument);
  spec.ratio = 0.02;
  spec.paper_faithful = true;
  spec.R = 1e9;
  CHECK_THROWS_AS(gmml::tree_construction(spec), std::invalid_argument);
  spec.ratio = 0.01;
  spec.R = 100.0 * 100.0 * 100.0 * 5.0 - 1.0;
  CHECK_THROWS_AS(gmml::tree_construction(spec), std::invalid_argument);
  spec.R = 100.0 * 100.0 * 100.0 * 5.0;
  CHECK_NOTHROW(gmml::tree_construction(spec));
}

TEST_CASE("faithful-scale trees keep the documented separations") {
  gmml::TreeConstructionSpec m4;
  m4.levels = 2;
  m4.R = 5e6;
  m4.paper_faithful = true;
  check_centers(gmml::tree_construction(m4),
                V{-5.05e6, -4.95e6, 4.95e6, 5.05e6}, 1e-6);

  gmml::TreeConstructionSpec m8;
  m8.levels = 3;
  m8.R = 9e8;
  m8.paper_faithful = true;
  const auto tree = gmml::tree_construction(m8);
  CHECK(tree.count() == 8);
  CHECK(gmml::min_separation(tree) >= 9e4);
}

TEST_CASE("pruning sends odd counts toward the leftmost leaves") {
  gmml::TreeConstructionSpec spec;
  spec.levels = 2;
  spec.R = 1.0;
  check_centers(gmml::pruned_tree(spec, 3), V{-1.01, -0.99, 0.99}, 1e-15);
  // The full count reproduces the unpruned tree.
  check_centers(gmml::pruned_tree(spec, 4),
                gmml::tree_construction(spec).centers1d(), 0.0);
  CHECK_THROWS_AS(gmml::pruned_tree(spec, 2), std::invalid_argument);
  CHECK_THROWS_AS(gmml::pruned_tree(spec, 5), std::invalid_argument);
}

TEST_CASE("urns are disjoint, nested, and centered on sign prefixes") {
  gmml::TreeConstructionSpec spec;
  spec.levels = 2;
  spec.R = 1.0;

  const auto level1 = gmml::urns_at_level(spec, 1);
  REQUIRE(level1.urns.size() == 2);
  CHECK(level1.urns[0].center == -1.0);
  CHECK(level1.urns[1].center == 1.0);
  CHECK(std::abs(level1.urns[0].halfwidth - 2.0 / 99.0) < 1e-15);

  const auto level2 = gmml::urns_at_level(spec, 2);
  REQUIRE(level2.urns.size() == 4);
  CHECK(std::abs(level2.urns[0].halfwidth - 2.0 / 9900.0) < 1e-17);

  // Disjoint within a level, ascending, and nested under the parent level.
  for (std::size_t i = 1; i < level2.urns.size(); ++i) {
    CHECK(level2.urns[i - 1].center + level2.urns[i - 1].halfwidth <
          level2.urns[i].center - level2.urns[i].halfwidth);
  }
  const auto tree = gmml::tree_construction(spec);
  for (std::size_t i = 0; i < 4; ++i) {
    const double leaf = tree.centers1d()[i];
    CHECK(level2.urns[i].contains(leaf));
    const auto& parent = level1.urns[i / 2];
    CHECK(parent.contains(level2.urns[i].center - level2.urns[i].halfwidth));
    CHECK(parent.contains(level2.urns[i].center + level2.urns[i].halfwidth));
  }

  CHECK_THROWS_AS(gmml::urns_at_level(spec, 0), std::invalid_argument);
  CHECK_THROWS_AS(gmml::urns_at_level(spec, 3), std::invalid_argument);
}

TEST_CASE("level-one regions wrap the urn pair and a far zone") {
  gmml::TreeConstructionSpec spec;
  spec.levels = 2;
  spec.R = 1.0;
  const gmml::RegionSet regions = gmml::tree_level1_regions(spec);
  CHECK(std::abs(regions.left_lo - (-1.0 - 2.0 / 99.0)) < 1e-15);
  CHECK(std::abs(regions.left_hi - (-1.0 + 2.0 / 99.0)) < 1e-15);
  CHECK(std::abs(regions.right_lo - (1.0 - 2.0 / 99.0)) < 1e-15);
  CHECK(std::abs(regions.right_hi - (1.0 + 2.0 / 99.0)) < 1e-15);
  CHECK(regions.far_radius == 2.0);
  const auto counts = regions.counts(V{-1.0, 0.99, 1.02, 0.0, 2.5});
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 1);
}

TEST_CASE("diffuse families enforce the scale and ball constraints") {
  const double delta = std::log(2.0) + 4.0;
  gmml::DiffuseSpec spec;
  spec.c = 25.0;
  spec.delta = delta;
  spec.left = {-25.0 * delta + 0.3};
  spec.right = {25.0 * delta - 0.5};
  const auto model = gmml::make_diffuse(spec);
  CHECK(model.count() == 2);
  CHECK(gmml::validate_diffuse(model, 25.0, delta));

  gmml::DiffuseSpec with_far = spec;
  with_far.delta = std::log(2.0) + 4.0;  // inner count stays 2
  with_far.far_centers = {30.0 * 25.0 * delta};
  const auto bigger = gmml::make_diffuse(with_far);
  CHECK(bigger.count() == 3);
  CHECK(gmml::validate_diffuse(bigger, 25.0, delta));

  gmml::DiffuseSpec bad = spec;
  bad.c = 20.0;
  CHECK_THROWS_AS(gmml::make_diffuse(bad), std::invalid_argument);
  bad = spec;
  bad.delta = std::log(2.0) + 3.0;
  CHECK_THROWS_AS(gmml::make_diffuse(bad), std::invalid_argument);
  bad = spec;
  bad.left.clear();
  CHECK_THROWS_AS(gmml::make_diffuse(bad), std::invalid_argument);
  bad = spec;
  bad.left = {-25.0 * delta + 2.0 * delta};
  CHECK_THROWS_AS(gmml::make_diffuse(bad), std::invalid_argument);
  bad = spec;
  bad.far_centers = {10.0 * 25.0 * delta};
  CHECK_THROWS_AS(gmml::make_diffuse(bad), std::invalid_argument);

  // A stray center between the regions fails post-hoc validation.
  CHECK(!gmml::validate_diffuse(gmml::MixtureModel::line(V{0.0, -25.0 * delta,
                                                           25.0 * delta}),
                                25.0, delta));
}

TEST_CASE("diffuse trapping regions double the ball radius") {
  const double c = 25.0, delta = 5.0;
  const gmml::RegionSet regions = gmml::diffuse_regions(c, delta);
  CHECK(regions.left_lo == -c * delta - 2.0 * delta);
  CHECK(regions.left_hi == -c * delta + 2.0 * delta);
  CHECK(regions.right_lo == c * delta - 2.0 * delta);
  CHECK(regions.right_hi == c * delta + 2.0 * delta);
  CHECK(regions.far_radius == 20.0 * c * delta);
}
