#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "modabric/tensor.hpp"

namespace modabric {

enum class Activation { relu, identity };

namespace detail {

// c[n,m] += a[n,k] * b[k,m]; ikj order keeps the inner loop on contiguous rows.
inline void matmul_acc(const real_t* a, const real_t* b, real_t* c, std::size_t n, std::size_t k,
                       std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const real_t* arow = a + i * k;
    real_t* crow = c + i * m;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const real_t av = arow[kk];
      if (av == 0) continue;
      const real_t* brow = b + kk * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[n,m] += a[n,k] * b[m,k]^T
inline void matmul_nt_acc(const real_t* a, const real_t* b, real_t* c, std::size_t n, std::size_t k,
                          std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const real_t* arow = a + i * k;
    real_t* crow = c + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const real_t* brow = b + j * k;
      real_t acc = 0;
      for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      crow[j] += acc;
    }
  }
}

// c[k,m] += a[n,k]^T * b[n,m]
inline void matmul_tn_acc(const real_t* a, const real_t* b, real_t* c, std::size_t n, std::size_t k,
                          std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const real_t* arow = a + i * k;
    const real_t* brow = b + i * m;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const real_t av = arow[kk];
      if (av == 0) continue;
      real_t* crow = c + kk * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace detail

// y = act(x W + b), x:[batch,in] W:[in,out] b:[out].
inline Tensor dense_forward(const Tensor& x, const Tensor& W, const Tensor& b, Activation act) {
  if (x.rank() != 2 || W.rank() != 2 || b.rank() != 1)
    throw DimensionError("dense_forward: x must be rank 2, W rank 2, b rank 1");
  if (x.shape[1] != W.shape[0] || W.shape[1] != b.shape[0])
    throw DimensionError("dense_forward: incompatible shapes x" + shape_str(x) + " W" +
                         shape_str(W) + " b" + shape_str(b));
  const std::size_t batch = x.shape[0], in = x.shape[1], out = W.shape[1];
  Tensor y({batch, out});
  detail::matmul_acc(x.data(), W.data(), y.data(), batch, in, out);
  for (std::size_t i = 0; i < batch; ++i) {
    real_t* row = y.data() + i * out;
    for (std::size_t j = 0; j < out; ++j) {
      row[j] += b.v[j];
      if (act == Activation::relu && row[j] < 0) row[j] = 0;
    }
  }
  ensure_finite(y, "dense_forward output");
  return y;
}

struct DenseGrads {
  Tensor grad_x, grad_w, grad_b;
};

// Analytic gradients of dense_forward. `y` is the forward output (needed for
// the relu mask), `upstream` has y's shape.
inline DenseGrads dense_backward(const Tensor& x, const Tensor& W, const Tensor& b, Activation act,
                                 const Tensor& y, const Tensor& upstream) {
  if (!upstream.same_shape(y))
    throw DimensionError("dense_backward: upstream shape " + shape_str(upstream) +
                         " does not match output " + shape_str(y));
  const std::size_t batch = x.shape[0], in = x.shape[1], out = W.shape[1];
  require_shape(y, {batch, out}, "dense_backward y");

  Tensor g = upstream;
  if (act == Activation::relu) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (y.v[i] <= 0) g.v[i] = 0;
  }

  DenseGrads grads{Tensor({batch, in}), Tensor({in, out}), Tensor({out})};
  detail::matmul_nt_acc(g.data(), W.data(), grads.grad_x.data(), batch, out, in);
  detail::matmul_tn_acc(x.data(), g.data(), grads.grad_w.data(), batch, in, out);
  for (std::size_t i = 0; i < batch; ++i)
    for (std::size_t j = 0; j < out; ++j) grads.grad_b.v[j] += g(i, j);
  ensure_finite(grads.grad_x, "dense_backward grad_x");
  ensure_finite(grads.grad_w, "dense_backward grad_w");
  ensure_finite(grads.grad_b, "dense_backward grad_b");
  (void)b;
  return grads;
}

// Row gather: table:[vocab,dim], result:[len(ids),dim].
inline Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
  if (table.rank() != 2) throw DimensionError("embedding_lookup: table must be rank 2");
  const std::size_t vocab = table.shape[0], dim = table.shape[1];
  Tensor out({ids.size(), dim});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab)
      throw IndexError("embedding_lookup: id " + std::to_string(id) + " outside [0, " +
                       std::to_string(vocab) + ")");
    std::copy_n(table.data() + static_cast<std::size_t>(id) * dim, dim, out.data() + i * dim);
  }
  return out;
}

// Scatter-add of `upstream` rows into grad_table; repeated ids accumulate.
inline void embedding_backward(const std::vector<int>& ids, const Tensor& upstream,
                               Tensor& grad_table) {
  const std::size_t vocab = grad_table.shape[0], dim = grad_table.shape[1];
  require_shape(upstream, {ids.size(), dim}, "embedding_backward upstream");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab)
      throw IndexError("embedding_backward: id " + std::to_string(id) + " outside [0, " +
                       std::to_string(vocab) + ")");
    const real_t* src = upstream.data() + i * dim;
    real_t* dst = grad_table.data() + static_cast<std::size_t>(id) * dim;
    for (std::size_t d = 0; d < dim; ++d) dst[d] += src[d];
  }
}

// Valid (no-padding) sliding-window correlation followed by relu.
// seq:[len,dim], filters:[width,dim,nfilt], bias:[nfilt] -> [len-width+1,nfilt].
inline Tensor conv1d_forward(const Tensor& seq, const Tensor& filters, const Tensor& bias) {
  if (seq.rank() != 2 || filters.rank() != 3 || bias.rank() != 1)
    throw DimensionError("conv1d_forward: seq rank 2, filters rank 3, bias rank 1 required");
  const std::size_t len = seq.shape[0], dim = seq.shape[1];
  const std::size_t width = filters.shape[0], nfilt = filters.shape[2];
  if (filters.shape[1] != dim || bias.shape[0] != nfilt)
    throw DimensionError("conv1d_forward: filters " + shape_str(filters) + " incompatible with seq " +
                         shape_str(seq) + " / bias " + shape_str(bias));
  if (len < width)
    throw DimensionError("conv1d_forward: sequence too short (len " + std::to_string(len) +
                         " < width " + std::to_string(width) + "); caller must pad");
  const std::size_t positions = len - width + 1;
  Tensor out({positions, nfilt});
  for (std::size_t p = 0; p < positions; ++p) {
    real_t* orow = out.data() + p * nfilt;
    std::copy_n(bias.data(), nfilt, orow);
    for (std::size_t w = 0; w < width; ++w) {
      const real_t* srow = seq.data() + (p + w) * dim;
      const real_t* frow = filters.data() + w * dim * nfilt;
      for (std::size_t d = 0; d < dim; ++d) {
        const real_t sv = srow[d];
        if (sv == 0) continue;
        const real_t* fr = frow + d * nfilt;
        for (std::size_t f = 0; f < nfilt; ++f) orow[f] += sv * fr[f];
      }
    }
    for (std::size_t f = 0; f < nfilt; ++f)
      if (orow[f] < 0) orow[f] = 0;
  }
  ensure_finite(out, "conv1d_forward output");
  return out;
}

struct Conv1dGrads {
  Tensor grad_seq, grad_filters, grad_bias;
};

inline Conv1dGrads conv1d_backward(const Tensor& seq, const Tensor& filters, const Tensor& bias,
                                   const Tensor& y, const Tensor& upstream) {
  const std::size_t len = seq.shape[0], dim = seq.shape[1];
  const std::size_t width = filters.shape[0], nfilt = filters.shape[2];
  const std::size_t positions = len - width + 1;
  require_shape(y, {positions, nfilt}, "conv1d_backward y");
  if (!upstream.same_shape(y))
    throw DimensionError("conv1d_backward: upstream shape mismatch");

  Conv1dGrads grads{Tensor({len, dim}), Tensor({width, dim, nfilt}), Tensor({nfilt})};
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t f = 0; f < nfilt; ++f) {
      const real_t g = (y(p, f) > 0) ? upstream(p, f) : 0;
      if (g == 0) continue;
      grads.grad_bias.v[f] += g;
      for (std::size_t w = 0; w < width; ++w) {
        const real_t* srow = seq.data() + (p + w) * dim;
        real_t* gsrow = grads.grad_seq.data() + (p + w) * dim;
        for (std::size_t d = 0; d < dim; ++d) {
          grads.grad_filters(w, d, f) += srow[d] * g;
          gsrow[d] += filters(w, d, f) * g;
        }
      }
    }
  }
  (void)bias;
  return grads;
}

// Per-filter max with argmax recorded for gradient routing; ties break to the
// lowest position index.
struct MaxOverTime {
  Tensor values;                   // [nfilt]
  std::vector<std::size_t> argmax; // per filter
};

inline MaxOverTime max_over_time(const Tensor& features) {
  if (features.rank() != 2) throw DimensionError("max_over_time: rank 2 input required");
  const std::size_t positions = features.shape[0], nfilt = features.shape[1];
  if (positions == 0) throw DimensionError("max_over_time: empty positions");
  MaxOverTime out{Tensor({nfilt}), std::vector<std::size_t>(nfilt, 0)};
  for (std::size_t f = 0; f < nfilt; ++f) out.values.v[f] = features(0, f);
  for (std::size_t p = 1; p < positions; ++p)
    for (std::size_t f = 0; f < nfilt; ++f)
      if (features(p, f) > out.values.v[f]) {
        out.values.v[f] = features(p, f);
        out.argmax[f] = p;
      }
  return out;
}

// Upstream routed only to the recorded argmax positions; zero elsewhere.
inline Tensor max_over_time_backward(const MaxOverTime& pooled, std::size_t positions,
                                     const Tensor& upstream) {
  const std::size_t nfilt = pooled.argmax.size();
  require_shape(upstream, {nfilt}, "max_over_time_backward upstream");
  Tensor grad({positions, nfilt});
  for (std::size_t f = 0; f < nfilt; ++f) grad(pooled.argmax[f], f) = upstream.v[f];
  return grad;
}

struct SoftmaxCE {
  real_t loss = 0;
  Tensor grad_logits;
};

// loss = mean over batch of w[label] * (-log softmax(logits)[label]); softmax
// uses max-subtraction for stability. grad_logits is the analytic gradient of
// that mean.
inline SoftmaxCE softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                                       const Tensor& class_weights) {
  if (logits.rank() != 2) throw DimensionError("softmax_cross_entropy: logits must be rank 2");
  const std::size_t batch = logits.shape[0], classes = logits.shape[1];
  if (labels.size() != batch)
    throw DimensionError("softmax_cross_entropy: labels length does not match batch");
  require_shape(class_weights, {classes}, "softmax_cross_entropy class_weights");
  for (real_t w : class_weights.v)
    if (!(w > 0)) throw ValueError("softmax_cross_entropy: class weights must be positive");

  SoftmaxCE out;
  out.grad_logits = Tensor({batch, classes});
  double total = 0;
  for (std::size_t i = 0; i < batch; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= classes)
      throw IndexError("softmax_cross_entropy: label " + std::to_string(label) + " outside [0, " +
                       std::to_string(classes) + ")");
    const real_t* row = logits.data() + i * classes;
    real_t m = row[0];
    for (std::size_t c = 1; c < classes; ++c) m = std::max(m, row[c]);
    double z = 0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(static_cast<double>(row[c] - m));
    const double logz = std::log(z);
    const double w = class_weights.v[static_cast<std::size_t>(label)];
    total += w * (logz - static_cast<double>(row[label] - m));
    real_t* grow = out.grad_logits.data() + i * classes;
    const double scale = w / static_cast<double>(batch);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(static_cast<double>(row[c] - m)) / z;
      grow[c] = static_cast<real_t>(scale * (p - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)));
    }
  }
  out.loss = static_cast<real_t>(total / static_cast<double>(batch));
  if (!std::isfinite(out.loss)) throw ValueError("non-finite values in softmax_cross_entropy loss");
  ensure_finite(out.grad_logits, "softmax_cross_entropy grad");
  return out;
}

}  // namespace modabric
