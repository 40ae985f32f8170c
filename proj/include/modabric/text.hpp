#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "modabric/error.hpp"

namespace modabric {

// Lowercase runs of [a-z0-9]; every other byte is a separator.
inline std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const unsigned char u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// token -> id map with id 0 reserved for padding and id 1 for unknown; ids
// are dense in [0, size).
struct Vocabulary {
  static constexpr int pad_id = 0;
  static constexpr int unk_id = 1;

  std::vector<std::string> id_to_token{"<pad>", "<unk>"};
  std::unordered_map<std::string, int> token_to_id;

  int size() const { return static_cast<int>(id_to_token.size()); }

  int lookup(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? unk_id : it->second;
  }

  int add(const std::string& token) {
    auto [it, inserted] = token_to_id.try_emplace(token, size());
    if (inserted) id_to_token.push_back(token);
    return it->second;
  }
};

// Tokens seen fewer than min_token_count times map to unknown. Ids are
// assigned in first-appearance order, so the result is a pure function of the
// input sequence.
inline Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t min_token_count) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& text : texts)
    for (auto& tok : split_tokens(text)) ++counts[tok];
  Vocabulary vocab;
  for (const auto& text : texts)
    for (auto& tok : split_tokens(text))
      if (counts[tok] >= min_token_count) vocab.add(tok);
  return vocab;
}

// First max_seq_len tokens, right-padded with the pad id; always returns
// exactly max_seq_len ids.
inline std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab,
                                 std::size_t max_seq_len) {
  std::vector<int> ids;
  ids.reserve(max_seq_len);
  for (const auto& tok : split_tokens(text)) {
    if (ids.size() == max_seq_len) break;
    ids.push_back(vocab.lookup(tok));
  }
  ids.resize(max_seq_len, Vocabulary::pad_id);
  return ids;
}

// Dense string -> id index with id 0 reserved for unknown/unseen values
// (types, brands, divisions).
struct StringIndex {
  std::vector<std::string> id_to_name{"<unk>"};
  std::unordered_map<std::string, int> name_to_id;

  int size() const { return static_cast<int>(id_to_name.size()); }

  int add(const std::string& name) {
    auto [it, inserted] = name_to_id.try_emplace(name, size());
    if (inserted) id_to_name.push_back(name);
    return it->second;
  }

  int lookup(const std::string& name) const {
    auto it = name_to_id.find(name);
    return it == name_to_id.end() ? 0 : it->second;
  }
};

}  // namespace modabric
