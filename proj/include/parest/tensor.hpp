#pragma once

#include <cstddef>
#include <vector>

#include "parest/errors.hpp"
#include "parest/rng.hpp"

namespace parest {

// Dense row-major 2-D array. Training runs in float; a double instantiation
// exists for finite-difference gradient checks.
template <typename T>
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, T(0)) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }

  static Tensor full(int r, int c, T v) {
    Tensor t(r, c);
    for (T& x : t.data) x = v;
    return t;
  }

  static Tensor randn(int r, int c, T std_dev, Rng& rng) {
    Tensor t(r, c);
    for (T& x : t.data) x = static_cast<T>(rng.normal(0.0, 1.0)) * std_dev;
    return t;
  }

  std::size_t size() const { return data.size(); }

  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  T at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  void fill(T v) {
    for (T& x : data) x = v;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(rows, cols);
    for (std::size_t i = 0; i < data.size(); ++i) {
      out.data[i] = static_cast<U>(data[i]);
    }
    return out;
  }
};

}  // namespace parest
