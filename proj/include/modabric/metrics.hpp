#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "modabric/error.hpp"

namespace modabric {

// C x C integer counts, row = true label, column = predicted.
struct ConfusionMatrix {
  std::vector<std::string> label_vocab;
  std::vector<int64_t> counts;  // row-major C*C

  std::size_t classes() const { return label_vocab.size(); }
  int64_t at(std::size_t t, std::size_t p) const { return counts[t * classes() + p]; }
  int64_t total() const {
    int64_t n = 0;
    for (int64_t c : counts) n += c;
    return n;
  }

  // Each row divided by its sum; all-zero rows stay zero.
  std::vector<double> row_normalised() const {
    const std::size_t c = classes();
    std::vector<double> out(c * c, 0.0);
    for (std::size_t t = 0; t < c; ++t) {
      int64_t row_sum = 0;
      for (std::size_t p = 0; p < c; ++p) row_sum += at(t, p);
      if (row_sum == 0) continue;
      for (std::size_t p = 0; p < c; ++p)
        out[t * c + p] = static_cast<double>(at(t, p)) / static_cast<double>(row_sum);
    }
    return out;
  }
};

namespace detail {

inline void check_label_lists(const std::vector<int>& truth, const std::vector<int>& pred,
                              std::size_t classes, const char* op) {
  if (truth.empty()) throw ValueError(std::string(op) + ": empty input");
  if (truth.size() != pred.size()) throw DimensionError(std::string(op) + ": length mismatch");
  for (int t : truth)
    if (t < 0 || static_cast<std::size_t>(t) >= classes)
      throw IndexError(std::string(op) + ": unknown true label " + std::to_string(t));
  for (int p : pred)
    if (p < 0 || static_cast<std::size_t>(p) >= classes)
      throw IndexError(std::string(op) + ": unknown predicted label " + std::to_string(p));
}

}  // namespace detail

inline ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                                 std::vector<std::string> label_vocab) {
  detail::check_label_lists(truth, pred, label_vocab.size(), "confusion");
  ConfusionMatrix cm;
  cm.label_vocab = std::move(label_vocab);
  cm.counts.assign(cm.classes() * cm.classes(), 0);
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++cm.counts[static_cast<std::size_t>(truth[i]) * cm.classes() + static_cast<std::size_t>(pred[i])];
  return cm;
}

// Support-weighted mean of per-class F1: sum_c (support_c / N) * F1_c, with
// F1_c = 0 whenever precision_c + recall_c = 0.
inline double weighted_f1(const std::vector<int>& truth, const std::vector<int>& pred,
                          std::size_t classes) {
  detail::check_label_lists(truth, pred, classes, "weighted_f1");
  std::vector<int64_t> tp(classes, 0), fp(classes, 0), fn(classes, 0), support(classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(pred[i]);
    ++support[t];
    if (t == p) {
      ++tp[t];
    } else {
      ++fn[t];
      ++fp[p];
    }
  }
  double score = 0;
  const double n = static_cast<double>(truth.size());
  for (std::size_t c = 0; c < classes; ++c) {
    if (support[c] == 0) continue;
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    const double f1 = denom > 0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    score += (static_cast<double>(support[c]) / n) * f1;
  }
  return score;
}

inline double accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
  if (truth.empty()) throw ValueError("accuracy: empty input");
  if (truth.size() != pred.size()) throw DimensionError("accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] == pred[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

struct RankingMetrics {
  double precision_at_k = 0;
  double recall_at_k = 0;
  int k = 0;
};

// precision = |top-k n relevant| / k, recall = |top-k n relevant| / |relevant|.
// Returns nullopt when the relevant set is empty (recall undefined; the caller
// skips that customer). The ranked list must be duplicate-free.
inline std::optional<RankingMetrics> precision_recall_at_k(
    const std::vector<int>& ranked, const std::unordered_set<int>& relevant, int k) {
  if (k < 1) throw ValueError("precision_recall_at_k: k must be >= 1");
  {
    std::unordered_set<int> seen;
    for (int item : ranked)
      if (!seen.insert(item).second)
        throw ValueError("precision_recall_at_k: duplicate item " + std::to_string(item) +
                         " in ranking");
  }
  if (relevant.empty()) return std::nullopt;
  std::size_t hits = 0;
  const std::size_t cutoff = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < cutoff; ++i)
    if (relevant.count(ranked[i])) ++hits;
  RankingMetrics m;
  m.k = k;
  m.precision_at_k = static_cast<double>(hits) / static_cast<double>(k);
  m.recall_at_k = static_cast<double>(hits) / static_cast<double>(relevant.size());
  return m;
}

}  // namespace modabric
