#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "modabric/io_util.hpp"
#include "modabric/rng.hpp"
#include "modabric/tensor.hpp"

namespace modabric {

// Named parameters with matching gradient accumulators. Shared-encoder names
// and per-task head names live under disjoint prefixes ("shared/", "head/").
// A step updates exactly the parameters whose gradients were touched since
// the previous step; everything else stays bit-identical.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor init) {
    auto [it, inserted] = slots_.try_emplace(name);
    if (!inserted) throw ValueError("parameter '" + name + "' already exists");
    it->second.value = std::move(init);
    it->second.grad = Tensor(it->second.value.shape);
    return it->second.value;
  }

  bool has(const std::string& name) const { return slots_.count(name) != 0; }

  const Tensor& value(const std::string& name) const { return slot(name).value; }
  Tensor& value(const std::string& name) { return slot(name).value; }

  // Gradient accumulator, marked touched: the next sgd_step will consume it.
  Tensor& grad_acc(const std::string& name) {
    Slot& s = slot(name);
    s.touched = true;
    return s.grad;
  }

  const Tensor& grad(const std::string& name) const { return slot(name).grad; }
  bool touched(const std::string& name) const { return slot(name).touched; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(slots_.size());
    for (const auto& [name, _] : slots_) out.push_back(name);
    return out;
  }

  std::size_t size() const { return slots_.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [_, s] : slots_) n += s.value.size();
    return n;
  }

  // p <- p - lr*g for touched parameters only; their gradients are then reset
  // to zero and the touched marks cleared. A non-finite gradient aborts with
  // the offending parameter named.
  void sgd_step(real_t learning_rate) {
    for (auto& [name, s] : slots_) {
      if (!s.touched) continue;
      if (!s.grad.all_finite())
        throw ValueError("non-finite gradient for parameter '" + name + "'");
      for (std::size_t i = 0; i < s.value.size(); ++i) s.value.v[i] -= learning_rate * s.grad.v[i];
      s.grad.fill(0);
      s.touched = false;
    }
  }

  void zero_all_grads() {
    for (auto& [_, s] : slots_) {
      s.grad.fill(0);
      s.touched = false;
    }
  }

 private:
  struct Slot {
    Tensor value, grad;
    bool touched = false;
  };

  Slot& slot(const std::string& name) {
    auto it = slots_.find(name);
    if (it == slots_.end()) throw IndexError("unknown parameter '" + name + "'");
    return it->second;
  }
  const Slot& slot(const std::string& name) const {
    auto it = slots_.find(name);
    if (it == slots_.end()) throw IndexError("unknown parameter '" + name + "'");
    return it->second;
  }

  std::map<std::string, Slot> slots_;
};

inline void sgd_step(ParameterStore& store, real_t learning_rate) { store.sgd_step(learning_rate); }

inline void fill_uniform(Tensor& t, real_t lo, real_t hi, Rng& rng) {
  for (real_t& x : t.v) x = static_cast<real_t>(rng.next_uniform(lo, hi));
}

// Scaled-uniform init in +-sqrt(6/(fan_in+fan_out)) for dense/conv weights.
inline void fill_glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const real_t limit = static_cast<real_t>(std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)));
  fill_uniform(t, -limit, limit, rng);
}

// ---------------------------------------------------------------------------
// Checkpoint container. Little-endian binary:
//   u32 format version (1), u8 endianness tag (1 = little), u64 parameter
//   count, then per parameter: u32 name length, UTF-8 name bytes, u32 rank,
//   u64 extents[rank], raw IEEE-754 64-bit floats (row-major).
// Round-trips bit-exactly. Only parameter values are persisted.
// ---------------------------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

inline void save_parameters(const ParameterStore& store, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  detail::write_pod<uint32_t>(os, 1u);
  detail::write_pod<uint8_t>(os, 1u);
  const auto names = store.names();
  detail::write_pod<uint64_t>(os, names.size());
  for (const auto& name : names) {
    const Tensor& t = store.value(name);
    detail::write_pod<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_pod<uint32_t>(os, static_cast<uint32_t>(t.rank()));
    for (std::size_t e : t.shape) detail::write_pod<uint64_t>(os, e);
    for (real_t x : t.v) detail::write_pod<double>(os, static_cast<double>(x));
  }
  if (!os) throw ParseError("write failure on '" + path + "'");
}

inline ParameterStore load_parameters(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open '" + path + "'");
  const auto version = detail::read_pod<uint32_t>(is, path);
  if (version != 1u) throw ParseError(path + ": unsupported checkpoint version");
  const auto endian_tag = detail::read_pod<uint8_t>(is, path);
  if (endian_tag != 1u) throw ParseError(path + ": not a little-endian checkpoint");
  const auto count = detail::read_pod<uint64_t>(is, path);
  ParameterStore store;
  for (uint64_t p = 0; p < count; ++p) {
    const auto name_len = detail::read_pod<uint32_t>(is, path);
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw ParseError(path + ": truncated checkpoint");
    const auto rank = detail::read_pod<uint32_t>(is, path);
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) e = static_cast<std::size_t>(detail::read_pod<uint64_t>(is, path));
    Tensor t(shape);
    for (real_t& x : t.v) x = static_cast<real_t>(detail::read_pod<double>(is, path));
    store.add(name, std::move(t));
  }
  return store;
}

}  // namespace modabric
