#include "gmml/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gmml {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  return out;
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path,
                          const EmTrajectory& traj) {
  if (traj.steps.empty()) {
    throw std::invalid_argument("write_trajectory_csv: empty trajectory");
  }
  std::ofstream out = open_output(path);
  const std::size_t m = traj.iterates.front().size();
  out << "t";
  for (std::size_t i = 1; i <= m; ++i) out << ",mu_" << i;
  out << ",loglik,grad_norm,n1,n2,n3\n";
  for (std::size_t row = 0; row < traj.steps.size(); ++row) {
    out << traj.steps[row];
    for (const double mu : traj.iterates[row]) out << ',' << format_double(mu);
    out << ',' << format_double(traj.likelihoods[row]) << ','
        << format_double(traj.grad_norms[row]);
    if (traj.urn_counts.empty()) {
      out << ",-1,-1,-1";
    } else {
      const auto& counts = traj.urn_counts[row];
      out << ',' << counts[0] << ',' << counts[1] << ',' << counts[2];
    }
    out << '\n';
  }
}

void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<TrialRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("write_trials_csv: no records");
  }
  std::ofstream out = open_output(path);
  const std::size_t m = records.front().final_mu.size();
  out << "trial,seed,event_e,good_init,success,trapped,converged,iterations,"
         "final_loglik";
  for (std::size_t i = 1; i <= m; ++i) out << ",mu_" << i;
  out << '\n';
  for (std::size_t row = 0; row < records.size(); ++row) {
    const TrialRecord& r = records[row];
    out << row << ',' << r.seed << ',' << (r.event_e ? 1 : 0) << ','
        << (r.good_init ? 1 : 0) << ',' << (r.success ? 1 : 0) << ','
        << (r.trapped ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ','
        << r.iterations << ',' << format_double(r.final_loglik);
    for (const double mu : r.final_mu) out << ',' << format_double(mu);
    out << '\n';
  }
}

void write_surface_csv(const std::filesystem::path& path,
                       const SurfaceResult& surface) {
  std::ofstream out = open_output(path);
  out << "mu1,mu2,loglik,grad_norm\n";
  for (const SurfaceRow& row : surface.rows) {
    out << format_double(row.mu1) << ',' << format_double(row.mu2) << ','
        << format_double(row.loglik) << ',' << format_double(row.grad_norm)
        << '\n';
  }
}

void write_criticals_csv(const std::filesystem::path& path,
                         const SurfaceResult& surface) {
  std::ofstream out = open_output(path);
  out << "mu1,mu2,loglik,grad_norm,kind\n";
  for (const SurfaceCritical& c : surface.criticals) {
    out << format_double(c.mu1) << ',' << format_double(c.mu2) << ','
        << format_double(c.loglik) << ',' << format_double(c.grad_norm) << ','
        << to_string(c.kind) << '\n';
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents) {
  std::ofstream out = open_output(path);
  out << contents;
}

}  // namespace gmml
