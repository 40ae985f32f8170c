#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "modabric/error.hpp"

namespace modabric {

#ifdef MODABRIC_USE_FLOAT32
using real_t = float;
#else
using real_t = double;
#endif

// Dense row-major n-dimensional array: the single compute currency of the
// library. Invariant: product(shape) == v.size(). Zero extents are legal
// (empty gather results); negative or fractional extents are not expressible.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<real_t> v;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> s, real_t fill = 0) : shape(std::move(s)) {
    v.assign(count(shape), fill);
  }

  Tensor(std::vector<std::size_t> s, std::vector<real_t> data)
      : shape(std::move(s)), v(std::move(data)) {
    if (v.size() != count(shape)) throw DimensionError("tensor data length does not match shape");
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return n;
  }

  std::size_t size() const { return v.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t extent(std::size_t i) const { return shape[i]; }

  real_t* data() { return v.data(); }
  const real_t* data() const { return v.data(); }

  real_t& operator()(std::size_t i) { return v[i]; }
  real_t operator()(std::size_t i) const { return v[i]; }
  real_t& operator()(std::size_t i, std::size_t j) { return v[i * shape[1] + j]; }
  real_t operator()(std::size_t i, std::size_t j) const { return v[i * shape[1] + j]; }
  real_t& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return v[(i * shape[1] + j) * shape[2] + k];
  }
  real_t operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return v[(i * shape[1] + j) * shape[2] + k];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (real_t x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void fill(real_t x) { std::fill(v.begin(), v.end(), x); }
};

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

inline std::string shape_str(const Tensor& t) { return shape_str(t.shape); }

// NaN/Inf anywhere is a hard error; `what` names the producing operation.
inline void ensure_finite(const Tensor& t, const std::string& what) {
  if (!t.all_finite()) throw ValueError("non-finite values in " + what);
}

inline void require_shape(const Tensor& t, const std::vector<std::size_t>& want,
                          const std::string& what) {
  if (t.shape != want)
    throw DimensionError(what + ": expected shape " + shape_str(want) + ", got " + shape_str(t));
}

}  // namespace modabric
