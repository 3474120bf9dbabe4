#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "deepemo/error.hpp"

namespace deepemo {

/// Dense n-dimensional array, row-major. Element type is float for model
/// storage and double for the gradient-check mode of the same kernels.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;

  explicit TensorT(std::vector<int> shape_in) : shape(std::move(shape_in)) {
    data.assign(static_cast<size_t>(count(shape)), T(0));
  }

  TensorT(std::vector<int> shape_in, std::vector<T> data_in)
      : shape(std::move(shape_in)), data(std::move(data_in)) {
    if (static_cast<int64_t>(data.size()) != count(shape)) {
      fail(ErrorCode::ShapeMismatch, "tensor data length does not match shape");
    }
  }

  static int64_t count(const std::vector<int>& dims) {
    int64_t n = 1;
    for (int d : dims) {
      if (d <= 0) fail(ErrorCode::ShapeMismatch, "tensor dims must be positive");
      n *= d;
    }
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  bool same_shape(const TensorT& other) const { return shape == other.shape; }

  void fill(T value) { std::fill(data.begin(), data.end(), value); }
  void zero() { fill(T(0)); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& operator[](size_t i) { return data[i]; }
  const T& operator[](size_t i) const { return data[i]; }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) os << ",";
      os << shape[i];
    }
    os << "]";
    return os.str();
  }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

template <typename T>
void check_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::ShapeMismatch,
         std::string(what) + ": shape " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace deepemo
