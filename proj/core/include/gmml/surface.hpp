#pragma once

#include <string>
#include <vector>

#include "gmml/em.hpp"
#include "gmml/model.hpp"
#include "gmml/quadrature.hpp"

namespace gmml {

/// Dense evaluation of the two-candidate population likelihood surface over
/// a square grid, with critical points located by grid scan plus refinement.
struct SurfaceSpec {
  double lo = -10.0;
  double hi = 10.0;
  double step = 0.1;
  double max_dedupe_dist = 1e-3;   // refined maxima closer than this merge
  double saddle_grad_cut = 0.1;    // grid grad-norm minima above this ignored
};

struct SurfaceRow {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double loglik = 0.0;
  double grad_norm = 0.0;
};

struct SurfaceCritical {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double loglik = 0.0;
  double grad_norm = 0.0;
  CriticalKind kind = CriticalKind::kIndeterminate;
};

struct SurfaceResult {
  std::vector<SurfaceRow> rows;  // row-major over (mu1, mu2)
  int n_per_axis = 0;
  std::vector<SurfaceCritical> criticals;

  std::vector<SurfaceCritical> maxima() const;
};

SurfaceResult evaluate_surface(const MixtureModel& truth,
                               const SurfaceSpec& spec,
                               const QuadratureSpec& quad, int threads = 0);

}  // namespace gmml
