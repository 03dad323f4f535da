#include "gmml/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gmml {

double logsumexp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const double m = sorted.front();
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (const double x : sorted) acc += std::exp(x - m);
  return m + std::log(acc);
}

double log_gaussian_pdf(std::span<const double> x, std::span<const double> mu) {
  if (x.size() != mu.size()) {
    throw std::invalid_argument("log_gaussian_pdf: dimension mismatch");
  }
  double q = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - mu[k];
    q += d * d;
  }
  return -0.5 * q - static_cast<double>(x.size()) * kLogSqrt2Pi;
}

double log_mixture_density(std::span<const double> x,
                           const MixtureModel& model) {
  std::vector<double> terms(static_cast<std::size_t>(model.count()));
  for (int i = 0; i < model.count(); ++i) {
    terms[static_cast<std::size_t>(i)] = log_gaussian_pdf(x, model.center(i));
  }
  return logsumexp(terms) - std::log(static_cast<double>(model.count()));
}

void responsibilities_1d(double x, std::span<const double> mu,
                         std::span<double> w) {
  // Equal weights cancel; shift by the max exponent before exponentiating so
  // centers anywhere on the line are safe.
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = x - mu[i];
    w[i] = -0.5 * d * d;
    best = std::max(best, w[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    w[i] = std::exp(w[i] - best);
    total += w[i];
  }
  for (std::size_t i = 0; i < mu.size(); ++i) w[i] /= total;
}

Responsibilities responsibilities(std::span<const double> x,
                                  const MixtureModel& centers) {
  Responsibilities r;
  r.weights.resize(static_cast<std::size_t>(centers.count()));
  if (centers.dim() == 1) {
    responsibilities_1d(x[0], centers.centers1d(), r.weights);
    return r;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < centers.count(); ++i) {
    const auto c = centers.center(i);
    double q = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - c[k];
      q += d * d;
    }
    r.weights[static_cast<std::size_t>(i)] = -0.5 * q;
    best = std::max(best, r.weights[static_cast<std::size_t>(i)]);
  }
  double total = 0.0;
  for (double& w : r.weights) {
    w = std::exp(w - best);
    total += w;
  }
  for (double& w : r.weights) w /= total;
  return r;
}

std::vector<LabeledSample> sample(const MixtureModel& model, int n, Rng& rng) {
  std::vector<LabeledSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    LabeledSample s;
    s.component = rng.uniform_int(model.count());
    const auto c = model.center(s.component);
    s.point.resize(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) s.point[k] = c[k] + rng.normal();
    out.push_back(std::move(s));
  }
  return out;
}

double min_separation(const MixtureModel& model) {
  if (model.count() < 2) {
    throw std::invalid_argument("min_separation needs at least two centers");
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.count(); ++i) {
    for (int j = i + 1; j < model.count(); ++j) {
      const auto a = model.center(i);
      const auto b = model.center(j);
      double q = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        q += d * d;
      }
      best = std::min(best, std::sqrt(q));
    }
  }
  return best;
}

double sample_log_likelihood(const std::vector<std::vector<double>>& data,
                             const MixtureModel& model) {
  if (data.empty()) {
    throw std::invalid_argument("sample_log_likelihood: empty data");
  }
  double acc = 0.0;
  for (const auto& x : data) acc += log_mixture_density(x, model);
  return acc / static_cast<double>(data.size());
}

}  // namespace gmml
