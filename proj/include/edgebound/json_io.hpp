#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "edgebound/distributions.hpp"
#include "edgebound/errors.hpp"
#include "edgebound/spd_matrix.hpp"
#include "edgebound/tensor.hpp"

namespace edgebound {

using json = nlohmann::ordered_json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Square matrix from nested arrays, or a bare number as a 1 x 1 matrix.
inline Matrix matrix_from_json(const json& j) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw DomainError("matrix: expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  for (const auto& r : j) {
    if (!r.is_array()) throw DomainError("matrix: rows must be arrays");
    if (cols < 0) cols = static_cast<Eigen::Index>(r.size());
    if (static_cast<Eigen::Index>(r.size()) != cols) throw DomainError("matrix: ragged rows");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw DomainError("vector: expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline json tensor_to_json(const MomentTensor& t) {
  return {{"order", t.order()}, {"dim", t.dim()}, {"entries", t.entries()}};
}

inline MomentTensor tensor_from_json(const json& j) {
  return MomentTensor::from_entries(j.at("order").get<int>(), j.at("dim").get<int>(),
                                    j.at("entries").get<std::vector<double>>());
}

inline json spec_to_json(const DistributionSpec& s) {
  json j = {{"family", s.family}, {"d", s.d}};
  if (s.sigma) j["sigma"] = matrix_to_json(*s.sigma);
  if (s.mean) j["mean"] = vector_to_json(*s.mean);
  if (!s.path.empty()) j["path"] = s.path;
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

inline DistributionSpec spec_from_json(const json& j) {
  DistributionSpec s;
  s.family = j.value("family", std::string("gaussian"));
  s.d = j.at("d").get<int>();
  if (j.contains("sigma")) s.sigma = matrix_from_json(j.at("sigma"));
  if (j.contains("mean")) s.mean = vector_from_json(j.at("mean"));
  s.path = j.value("path", std::string());
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  s.validate();
  return s;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DomainError("invalid JSON in '" + path + "': " + e.what());
  }
}

}  // namespace edgebound
