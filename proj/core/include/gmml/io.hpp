#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gmml/em.hpp"
#include "gmml/experiments.hpp"
#include "gmml/surface.hpp"

namespace gmml {

/// Formats a double with 17 significant digits, enough to round-trip any
/// IEEE 754 binary64 value exactly.
std::string format_double(double x);

/// Writes an EM trajectory as CSV with header
///   t,mu_1..mu_M,loglik,grad_norm,n1,n2,n3
/// The region-count columns hold -1 when no regions were tracked.
void write_trajectory_csv(const std::filesystem::path& path,
                          const EmTrajectory& traj);

/// Writes one row per Monte Carlo trial with header
///   trial,seed,event_e,good_init,success,trapped,converged,iterations,
///   final_loglik,mu_1..mu_M
void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<TrialRecord>& records);

/// Writes the dense surface grid with header mu1,mu2,loglik,grad_norm.
void write_surface_csv(const std::filesystem::path& path,
                       const SurfaceResult& surface);

/// Writes the refined critical points with header
///   mu1,mu2,loglik,grad_norm,kind.
void write_criticals_csv(const std::filesystem::path& path,
                         const SurfaceResult& surface);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& contents);

}  // namespace gmml
