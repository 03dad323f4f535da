#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace gmml {

/// Equal-weight isotropic Gaussian mixture: M unit-variance components in R^d,
/// fully described by its center list. Center magnitudes up to ~1e9 are in
/// scope, so nothing here ever exponentiates a squared distance directly.
class MixtureModel {
 public:
  MixtureModel() = default;

  /// Row-major flat center data, one row per component.
  MixtureModel(std::vector<double> flat, int dim);

  /// Convenience for the one-dimensional case.
  static MixtureModel line(std::vector<double> centers);

  int dim() const { return dim_; }
  int count() const { return count_; }

  std::span<const double> center(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * dim_,
            static_cast<std::size_t>(dim_)};
  }

  /// The flat data viewed as scalars; only valid when dim() == 1.
  const std::vector<double>& centers1d() const;

  const std::vector<double>& flat() const { return data_; }

 private:
  std::vector<double> data_;
  int dim_ = 0;
  int count_ = 0;
};

/// One draw from the mixture together with the component that generated it.
struct LabeledSample {
  std::vector<double> point;
  int component = 0;
};

/// Posterior component weights at a single point. Entries lie in [0, 1] and
/// sum to 1 up to roundoff.
struct Responsibilities {
  std::vector<double> weights;
};

void to_json(nlohmann::json& j, const MixtureModel& m);
void from_json(const nlohmann::json& j, MixtureModel& m);

/// Parse/serialize the on-disk JSON schema {"dim": d, "centers": [[..], ..]}.
MixtureModel read_model_json(const std::string& path);
void write_model_json(const std::string& path, const MixtureModel& m);

}  // namespace gmml
