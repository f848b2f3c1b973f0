#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

namespace cloudfill {

// Dense row-major double tensor. Compute happens in double everywhere;
// the file formats down-convert to float32 at the boundary.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    v_.assign(count(shape_), 0.0);
  }

  Tensor(std::initializer_list<std::size_t> shape)
      : Tensor(std::vector<std::size_t>(shape)) {}

  static Tensor full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.v_.begin(), t.v_.end(), value);
    return t;
  }

  std::size_t ndim() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t numel() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  // 2D access (matrices are [rows x cols])
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }
  double& at(std::size_t r, std::size_t c) { return v_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return v_[r * cols() + c]; }

  // 4D access for [T,B,H,W] stacks
  double& at4(std::size_t t, std::size_t b, std::size_t r, std::size_t c) {
    return v_[((t * shape_[1] + b) * shape_[2] + r) * shape_[3] + c];
  }
  double at4(std::size_t t, std::size_t b, std::size_t r, std::size_t c) const {
    return v_[((t * shape_[1] + b) * shape_[2] + r) * shape_[3] + c];
  }

  void fill(double value) { std::fill(v_.begin(), v_.end(), value); }
  void zero() { fill(0.0); }

  bool all_finite() const {
    for (double x : v_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.v_ == b.v_;
  }

 private:
  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return s.empty() ? 0 : n;
  }

  std::vector<std::size_t> shape_;
  std::vector<double> v_;
};

}  // namespace cloudfill
