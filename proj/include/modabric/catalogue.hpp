#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "modabric/io_util.hpp"
#include "modabric/tensor.hpp"
#include "modabric/text.hpp"

namespace modabric {

inline constexpr std::size_t kShotCount = 4;

struct LineReject {
  std::size_t line = 0;
  std::string reason;
};

// One catalogue line as parsed from file; strings only, ids resolved later.
// An attribute absent from the map is ABSENT (null in the file).
struct RawProduct {
  std::string product_id;
  std::string product_type;
  std::string brand;
  std::string division;
  std::string title;
  std::string description;
  std::vector<std::vector<double>> image_shots;  // kShotCount x image_dim
  std::map<std::string, std::string> attributes;
};

struct Catalogue {
  std::vector<RawProduct> products;
  std::vector<LineReject> rejects;
  std::size_t image_dim = 0;
};

namespace detail {

inline std::vector<std::vector<double>> read_image_features_ref(
    const std::filesystem::path& base_dir, const std::string& ref) {
  const auto path = (base_dir / ref).string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open image feature file '" + path + "'");
  const auto shots = read_pod<uint32_t>(is, path);
  const auto dim = read_pod<uint32_t>(is, path);
  if (shots != kShotCount) throw ParseError(path + ": expected 4 shots");
  std::vector<std::vector<double>> out(shots, std::vector<double>(dim));
  for (auto& shot : out)
    for (double& x : shot) x = read_pod<double>(is, path);
  return out;
}

inline RawProduct parse_catalogue_line(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir) {
  RawProduct p;
  p.product_id = j.at("product_id").get<std::string>();
  p.product_type = j.at("product_type").get<std::string>();
  p.brand = j.at("brand").get<std::string>();
  p.division = j.at("division").get<std::string>();
  p.title = j.at("title").get<std::string>();
  p.description = j.at("description").get<std::string>();

  if (j.contains("image_features")) {
    p.image_shots = j.at("image_features").get<std::vector<std::vector<double>>>();
  } else if (j.contains("image_features_ref")) {
    p.image_shots = read_image_features_ref(base_dir, j.at("image_features_ref").get<std::string>());
  } else {
    throw ParseError("missing image_features / image_features_ref");
  }
  if (p.image_shots.size() != kShotCount) throw ParseError("expected exactly 4 image shots");
  for (const auto& shot : p.image_shots) {
    if (shot.size() != p.image_shots[0].size()) throw ParseError("ragged image shot vectors");
    for (double x : shot)
      if (!std::isfinite(x)) throw ParseError("non-finite image feature");
  }

  for (const auto& [name, value] : j.at("attributes").items()) {
    if (value.is_null()) continue;  // null <=> ABSENT
    if (!value.is_string()) throw ParseError("attribute '" + name + "' must be string or null");
    p.attributes[name] = value.get<std::string>();
  }
  return p;
}

}  // namespace detail

// JSON-lines loader, parse-or-reject per line with line numbers; never drops
// a row silently. Shot dimensionality must be uniform across the catalogue.
inline Catalogue load_catalogue(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open catalogue '" + path + "'");
  const auto base_dir = std::filesystem::path(path).parent_path();
  Catalogue cat;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RawProduct p = detail::parse_catalogue_line(j, base_dir);
      const std::size_t dim = p.image_shots[0].size();
      if (cat.products.empty() && cat.image_dim == 0) cat.image_dim = dim;
      if (dim != cat.image_dim)
        throw ParseError("image dim " + std::to_string(dim) + " differs from catalogue dim " +
                         std::to_string(cat.image_dim));
      cat.products.push_back(std::move(p));
    } catch (const std::exception& e) {
      cat.rejects.push_back({line_no, e.what()});
    }
  }
  return cat;
}

// ---------------------------------------------------------------------------
// Encoded view: string fields resolved to dense ids, text tokenised/padded.
// ---------------------------------------------------------------------------

struct ProductRecord {
  std::string product_id;
  int product_type_id = 0;
  int brand_id = 0;
  int division_id = 0;
  std::vector<int> text_tokens;  // exactly max_seq_len ids
  Tensor image_shots;            // [kShotCount, image_dim]
  std::map<std::string, std::string> attributes;  // missing key <=> ABSENT
};

struct CatalogueIndex {
  Vocabulary words;
  StringIndex types, brands, divisions;
  std::size_t image_dim = 0;
  std::size_t max_seq_len = 0;
};

inline CatalogueIndex build_catalogue_index(const Catalogue& cat, std::size_t min_token_count,
                                            std::size_t max_seq_len) {
  CatalogueIndex idx;
  idx.image_dim = cat.image_dim;
  idx.max_seq_len = max_seq_len;
  std::vector<std::string> texts;
  texts.reserve(cat.products.size());
  for (const auto& p : cat.products) {
    texts.push_back(p.title + " " + p.description);
    idx.types.add(p.product_type);
    idx.brands.add(p.brand);
    idx.divisions.add(p.division);
  }
  idx.words = build_vocab(texts, min_token_count);
  return idx;
}

inline ProductRecord encode_product(const RawProduct& p, const CatalogueIndex& idx) {
  ProductRecord r;
  r.product_id = p.product_id;
  r.product_type_id = idx.types.lookup(p.product_type);
  r.brand_id = idx.brands.lookup(p.brand);
  r.division_id = idx.divisions.lookup(p.division);
  r.text_tokens = tokenize(p.title + " " + p.description, idx.words, idx.max_seq_len);
  r.image_shots = Tensor({kShotCount, idx.image_dim});
  for (std::size_t s = 0; s < kShotCount; ++s)
    for (std::size_t d = 0; d < idx.image_dim; ++d)
      r.image_shots(s, d) = static_cast<real_t>(p.image_shots[s][d]);
  r.attributes = p.attributes;
  return r;
}

inline std::vector<ProductRecord> encode_products(const Catalogue& cat,
                                                  const CatalogueIndex& idx) {
  std::vector<ProductRecord> out;
  out.reserve(cat.products.size());
  for (const auto& p : cat.products) out.push_back(encode_product(p, idx));
  return out;
}

// ---------------------------------------------------------------------------
// Task taxonomy. One attribute prediction task: its label vocabulary is
// learned from data at dataset-build time; applicability is declared here.
// ---------------------------------------------------------------------------

struct TaskSpec {
  std::string name;
  std::vector<std::string> label_vocab;  // C >= 2 once built
  bool all_types = true;
  std::set<int> applicable_type_ids;
  std::vector<real_t> class_weights;

  bool applies_to(int type_id) const {
    return all_types || applicable_type_ids.count(type_id) != 0;
  }

  // -1 when the value is not (or no longer) in the vocabulary.
  int label_id(const std::string& value) const {
    for (std::size_t i = 0; i < label_vocab.size(); ++i)
      if (label_vocab[i] == value) return static_cast<int>(i);
    return -1;
  }
};

struct TaxonomyEntry {
  std::string name;
  bool all_types = true;
  std::vector<std::string> applicable_product_types;
  std::optional<std::size_t> min_support;
};

// JSON file: [{"name": ..., "applicable_product_types": [...] | "*",
//              "min_support": n?}, ...]
inline std::vector<TaxonomyEntry> load_taxonomy(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("taxonomy '" + path + "': " + e.what());
  }
  if (!j.is_array()) throw ParseError("taxonomy '" + path + "': top-level array expected");
  std::vector<TaxonomyEntry> out;
  std::set<std::string> seen;
  for (const auto& item : j) {
    TaxonomyEntry e;
    e.name = item.at("name").get<std::string>();
    if (!seen.insert(e.name).second)
      throw ParseError("taxonomy '" + path + "': duplicate task '" + e.name + "'");
    const auto& apt = item.at("applicable_product_types");
    if (apt.is_string() && apt.get<std::string>() == "*") {
      e.all_types = true;
    } else if (apt.is_array()) {
      e.all_types = false;
      e.applicable_product_types = apt.get<std::vector<std::string>>();
    } else {
      throw ParseError("taxonomy '" + path + "': applicable_product_types must be \"*\" or a list");
    }
    if (item.contains("min_support")) e.min_support = item.at("min_support").get<std::size_t>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace modabric
