#include "gmml/model.hpp"

#include <fstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace gmml {

MixtureModel::MixtureModel(std::vector<double> flat, int dim)
    : data_(std::move(flat)), dim_(dim) {
  if (dim_ <= 0) throw std::invalid_argument("model: dim must be positive");
  if (data_.empty() || data_.size() % static_cast<std::size_t>(dim_) != 0) {
    throw std::invalid_argument(
        "model: center data must be a nonempty multiple of dim");
  }
  count_ = static_cast<int>(data_.size() / static_cast<std::size_t>(dim_));
}

MixtureModel MixtureModel::line(std::vector<double> centers) {
  return MixtureModel(std::move(centers), 1);
}

const std::vector<double>& MixtureModel::centers1d() const {
  if (dim_ != 1) {
    throw std::logic_error("centers1d requires a one-dimensional model");
  }
  return data_;
}

void to_json(nlohmann::json& j, const MixtureModel& m) {
  nlohmann::json centers = nlohmann::json::array();
  for (int i = 0; i < m.count(); ++i) {
    const auto c = m.center(i);
    centers.push_back(std::vector<double>(c.begin(), c.end()));
  }
  j = nlohmann::json{{"dim", m.dim()}, {"centers", std::move(centers)}};
}

void from_json(const nlohmann::json& j, MixtureModel& m) {
  const int dim = j.at("dim").get<int>();
  if (dim <= 0) throw std::invalid_argument("model json: dim must be positive");
  const auto& centers = j.at("centers");
  if (!centers.is_array() || centers.empty()) {
    throw std::invalid_argument("model json: centers must be a nonempty array");
  }
  std::vector<double> flat;
  flat.reserve(centers.size() * static_cast<std::size_t>(dim));
  for (const auto& row : centers) {
    const auto v = row.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dim) {
      throw std::invalid_argument("model json: center row length != dim");
    }
    flat.insert(flat.end(), v.begin(), v.end());
  }
  m = MixtureModel(std::move(flat), dim);
}

MixtureModel read_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return j.get<MixtureModel>();
}

void write_model_json(const std::string& path, const MixtureModel& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << nlohmann::json(m).dump(2) << '\n';
}

}  // namespace gmml
