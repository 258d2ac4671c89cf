#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edgebound/errors.hpp"
#include "edgebound/spd_matrix.hpp"

namespace edgebound {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Provenance {
  std::optional<std::uint64_t> seed;
  std::string label;
};

// n x d observations, n >= 2, all entries finite. Immutable once built.
class Sample {
 public:
  Sample(RowMatrix data, Provenance provenance = {}, std::vector<std::string> columns = {})
      : data_(std::move(data)), provenance_(std::move(provenance)), columns_(std::move(columns)) {
    if (data_.rows() < 2) throw DomainError("Sample: need at least 2 rows");
    if (data_.cols() < 1) throw DomainError("Sample: need at least 1 column");
    if (!data_.allFinite()) throw DomainError("Sample: non-finite entries");
    if (columns_.empty()) {
      for (Eigen::Index j = 0; j < data_.cols(); ++j) columns_.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(columns_.size()) != data_.cols())
      throw DomainError("Sample: column name count does not match width");
  }

  Eigen::Index n() const { return data_.rows(); }
  int d() const { return static_cast<int>(data_.cols()); }
  const RowMatrix& data() const { return data_; }
  auto row(Eigen::Index i) const { return data_.row(i); }
  const Provenance& provenance() const { return provenance_; }
  const std::vector<std::string>& columns() const { return columns_; }

  Vector mean() const { return data_.colwise().mean().transpose(); }

  // Biased (1/n) covariance about the sample mean.
  Matrix covariance() const {
    RowMatrix centered = data_.rowwise() - data_.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(n());
  }

 private:
  RowMatrix data_;
  Provenance provenance_;
  std::vector<std::string> columns_;
};

// Rows multiplied by the symmetric inverse square root of sigma.
inline Sample whiten(const Sample& s, const SpdMatrix& sigma) {
  if (sigma.dim() != s.d()) throw DomainError("whiten: dimension mismatch");
  Matrix root = sigma.inverse_sqrt();
  RowMatrix out = s.data() * root;  // root is symmetric
  return Sample(std::move(out), {s.provenance().seed, s.provenance().label + "+whitened"}, s.columns());
}

inline Sample read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("read_csv: empty file " + path);
  std::vector<std::string> columns;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      columns.push_back(cell);
    }
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
      if (used == 0 || used != cell.size())
        throw DomainError("read_csv: bad number '" + cell + "' on data line " + std::to_string(rows + 1));
      values.push_back(v);
      ++count;
    }
    if (count != columns.size())
      throw DomainError("read_csv: line " + std::to_string(rows + 1) + " has wrong field count");
    ++rows;
  }
  RowMatrix data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < values.size(); ++i) data.data()[i] = values[i];
  return Sample(std::move(data), {std::nullopt, "csv:" + path}, std::move(columns));
}

inline void write_csv(std::ostream& out, const Sample& s) {
  for (std::size_t j = 0; j < s.columns().size(); ++j) out << (j ? "," : "") << s.columns()[j];
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    for (Eigen::Index j = 0; j < s.d(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", s.data()(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

inline void write_csv(const std::string& path, const Sample& s) {
  std::ofstream out(path);
  if (!out) throw DomainError("write_csv: cannot open " + path);
  write_csv(out, s);
}

}  // namespace edgebound
