#pragma once

// Dense row-major tensor with a dynamic shape. This is deliberately minimal:
// the layers that need speed index raw data() with hand-computed strides, so
// the class only has to own storage, remember the shape, and stay cheap to
// copy/move. Scalar is float for bulk data and double for the deterministic
// test mode.

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmgf {

template <class S>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape, S fill_value = S(0))
      : shape_(std::move(shape)) {
    data_.assign(count_(shape_), fill_value);
  }

  Tensor(std::initializer_list<int> shape, S fill_value = S(0))
      : Tensor(std::vector<int>(shape), fill_value) {}

  static Tensor from(std::vector<int> shape, std::vector<S> values) {
    Tensor t;
    if (count_(shape) != values.size())
      throw std::invalid_argument("Tensor::from: shape/value count mismatch");
    t.shape_ = std::move(shape);
    t.data_ = std::move(values);
    return t;
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const {
    assert(i >= 0 && i < rank());
    return shape_[static_cast<size_t>(i)];
  }
  const std::vector<int>& shape() const { return shape_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }
  std::vector<S>& raw() { return data_; }
  const std::vector<S>& raw() const { return data_; }

  void fill(S v) { data_.assign(data_.size(), v); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  // Reinterpret under a new shape with identical element count.
  void reshape(std::vector<int> shape) {
    if (count_(shape) != data_.size())
      throw std::invalid_argument("Tensor::reshape: element count mismatch");
    shape_ = std::move(shape);
  }

  S& operator()(int i) { return data_[idx1_(i)]; }
  S operator()(int i) const { return data_[idx1_(i)]; }
  S& operator()(int i, int j) { return data_[idx2_(i, j)]; }
  S operator()(int i, int j) const { return data_[idx2_(i, j)]; }
  S& operator()(int i, int j, int k) { return data_[idx3_(i, j, k)]; }
  S operator()(int i, int j, int k) const { return data_[idx3_(i, j, k)]; }
  S& operator()(int i, int j, int k, int l) { return data_[idx4_(i, j, k, l)]; }
  S operator()(int i, int j, int k, int l) const {
    return data_[idx4_(i, j, k, l)];
  }
  S& operator()(int i, int j, int k, int l, int m) {
    return data_[idx5_(i, j, k, l, m)];
  }
  S operator()(int i, int j, int k, int l, int m) const {
    return data_[idx5_(i, j, k, l, m)];
  }

  std::string shape_str() const {
    std::string s = "[";
    for (int i = 0; i < rank(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[static_cast<size_t>(i)]);
    }
    return s + "]";
  }

 private:
  static size_t count_(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  size_t idx1_(int i) const {
    assert(rank() == 1);
    return check_(static_cast<size_t>(i));
  }
  size_t idx2_(int i, int j) const {
    assert(rank() == 2);
    return check_(static_cast<size_t>(i) * su_(1) + static_cast<size_t>(j));
  }
  size_t idx3_(int i, int j, int k) const {
    assert(rank() == 3);
    return check_((static_cast<size_t>(i) * su_(1) + static_cast<size_t>(j)) *
                      su_(2) +
                  static_cast<size_t>(k));
  }
  size_t idx4_(int i, int j, int k, int l) const {
    assert(rank() == 4);
    return check_(((static_cast<size_t>(i) * su_(1) + static_cast<size_t>(j)) *
                       su_(2) +
                   static_cast<size_t>(k)) *
                      su_(3) +
                  static_cast<size_t>(l));
  }
  size_t idx5_(int i, int j, int k, int l, int m) const {
    assert(rank() == 5);
    return check_(
        (((static_cast<size_t>(i) * su_(1) + static_cast<size_t>(j)) * su_(2) +
          static_cast<size_t>(k)) *
             su_(3) +
         static_cast<size_t>(l)) *
            su_(4) +
        static_cast<size_t>(m));
  }

  size_t su_(int i) const { return static_cast<size_t>(shape_[static_cast<size_t>(i)]); }
  size_t check_(size_t flat) const {
    assert(flat < data_.size());
    return flat;
  }

  std::vector<int> shape_;
  std::vector<S> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <class To, class From>
Tensor<To> convert(const Tensor<From>& in) {
  Tensor<To> out(in.shape());
  const From* src = in.data();
  To* dst = out.data();
  for (size_t i = 0; i < in.size(); ++i) dst[i] = static_cast<To>(src[i]);
  return out;
}

}  // namespace mmgf
