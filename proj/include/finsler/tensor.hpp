#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace finsler {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense rank-3 array, all extents equal to `dim`, row-major (i, j, k).
class Tensor3 {
public:
  Tensor3() = default;
  explicit Tensor3(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

  int dim() const noexcept { return dim_; }
  double& operator()(int i, int j, int k) { return data_[flat(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[flat(i, j, k)]; }
  const std::vector<double>& data() const noexcept { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

private:
  std::size_t flat(int i, int j, int k) const { return static_cast<std::size_t>((i * dim_ + j) * dim_ + k); }
  int dim_ = 0;
  std::vector<double> data_;
};

/// Dense rank-4 array, all extents equal to `dim`, row-major (i, j, k, l).
class Tensor4 {
public:
  Tensor4() = default;
  explicit Tensor4(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim * dim), 0.0) {}

  int dim() const noexcept { return dim_; }
  double& operator()(int i, int j, int k, int l) { return data_[flat(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[flat(i, j, k, l)]; }
  const std::vector<double>& data() const noexcept { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

private:
  std::size_t flat(int i, int j, int k, int l) const {
    return static_cast<std::size_t>(((i * dim_ + j) * dim_ + k) * dim_ + l);
  }
  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace finsler
