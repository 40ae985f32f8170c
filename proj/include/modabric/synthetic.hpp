#pragma once

// Desk-scale synthetic catalogue + interaction generator. Attribute labels
// are planted as functions of the generated evidence (text keywords, image
// feature clusters, brand/division assignment), with a configurable source
// per task so input-ablation studies can recover the planted dependence.
// Interactions follow latent customer/product taste with popularity skew and
// a cold-start cohort of products that only becomes available in the test
// window. Output is byte-identical for identical (spec, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "modabric/interactions.hpp"
#include "modabric/io_util.hpp"
#include "modabric/json_util.hpp"
#include "modabric/rng.hpp"

namespace modabric {

enum class SignalSource { text, image, metadata };

inline SignalSource parse_signal_source(const std::string& s) {
  if (s == "text") return SignalSource::text;
  if (s == "image") return SignalSource::image;
  if (s == "metadata") return SignalSource::metadata;
  throw ConfigError("unknown task source '" + s + "' (want text|image|metadata)");
}

struct SynthTask {
  std::string name;
  std::size_t classes = 3;
  SignalSource source = SignalSource::text;
  std::size_t applicable_type_count = 0;  // 0 = all types
};

struct SynthSpec {
  std::size_t n_products = 600;
  std::size_t n_customers = 400;
  std::size_t n_types = 6;
  std::size_t n_brands = 12;
  std::size_t n_divisions = 3;
  std::size_t image_dim = 512;
  std::vector<SynthTask> tasks;
  double signal_strength = 0.9;
  double mask_rate = 0.75;
  std::size_t filler_vocab = 200;
  std::size_t keywords_per_class = 2;
  std::size_t title_tokens = 5;
  std::size_t description_tokens = 20;

  double mean_events_per_customer = 18;
  double popularity_exponent = 0.8;
  double taste_weight = 3.0;
  double purchase_fraction = 0.5;
  double cold_start_fraction = 0.1;
  double test_only_customer_fraction = 0.1;
  std::string train_start = "2016-03-01";
  std::string positive_start = "2017-02-01";
  std::string test_start = "2017-03-01";
  std::string test_end = "2017-04-01";

  void validate() const {
    if (n_products == 0 || n_customers == 0 || n_types == 0 || n_brands == 0 || n_divisions == 0)
      throw ConfigError("synthetic spec: sizes must be positive");
    if (tasks.empty()) throw ConfigError("synthetic spec: at least one task required");
    if (!(mask_rate >= 0 && mask_rate < 1)) throw ConfigError("synthetic spec: mask_rate in [0,1)");
    if (!(signal_strength > 0 && signal_strength <= 1))
      throw ConfigError("synthetic spec: signal_strength in (0,1]");
    std::size_t metadata_tasks = 0;
    for (const auto& t : tasks) {
      if (t.classes < 2) throw ConfigError("synthetic spec: task needs >= 2 classes");
      if (t.source == SignalSource::metadata) {
        ++metadata_tasks;
        const std::size_t carrier = metadata_tasks == 1 ? n_brands : n_divisions;
        if (t.classes > carrier)
          throw ConfigError("synthetic spec: metadata task classes exceed brand/division count");
      }
      if (t.applicable_type_count > n_types)
        throw ConfigError("synthetic spec: applicable_type_count exceeds n_types");
    }
    if (metadata_tasks > 2)
      throw ConfigError("synthetic spec: at most 2 metadata-source tasks supported");
  }
};

inline SynthSpec parse_synth_spec(const nlohmann::json& j) {
  json_check_keys(j,
                  {"n_products", "n_customers", "n_types", "n_brands", "n_divisions", "image_dim",
                   "tasks", "signal_strength", "mask_rate", "filler_vocab", "keywords_per_class",
                   "title_tokens", "description_tokens", "interactions"},
                  "synthetic spec");
  SynthSpec s;
  s.n_products = json_get<std::size_t>(j, "n_products", s.n_products);
  s.n_customers = json_get<std::size_t>(j, "n_customers", s.n_customers);
  s.n_types = json_get<std::size_t>(j, "n_types", s.n_types);
  s.n_brands = json_get<std::size_t>(j, "n_brands", s.n_brands);
  s.n_divisions = json_get<std::size_t>(j, "n_divisions", s.n_divisions);
  s.image_dim = json_get<std::size_t>(j, "image_dim", s.image_dim);
  s.signal_strength = json_get<double>(j, "signal_strength", s.signal_strength);
  s.mask_rate = json_get<double>(j, "mask_rate", s.mask_rate);
  s.filler_vocab = json_get<std::size_t>(j, "filler_vocab", s.filler_vocab);
  s.keywords_per_class = json_get<std::size_t>(j, "keywords_per_class", s.keywords_per_class);
  s.title_tokens = json_get<std::size_t>(j, "title_tokens", s.title_tokens);
  s.description_tokens = json_get<std::size_t>(j, "description_tokens", s.description_tokens);

  if (j.contains("tasks")) {
    for (const auto& tj : j.at("tasks")) {
      json_check_keys(tj, {"name", "classes", "source", "applicable_type_count"},
                      "synthetic spec task");
      SynthTask t;
      t.name = tj.at("name").get<std::string>();
      t.classes = json_get<std::size_t>(tj, "classes", t.classes);
      t.source = parse_signal_source(json_get<std::string>(tj, "source", "text"));
      t.applicable_type_count = json_get<std::size_t>(tj, "applicable_type_count", 0);
      s.tasks.push_back(std::move(t));
    }
  } else {
    s.tasks = {{"attr_a", 3, SignalSource::text, 0}, {"attr_b", 4, SignalSource::text, 0}};
  }

  if (j.contains("interactions")) {
    const auto& ij = j.at("interactions");
    json_check_keys(ij,
                    {"mean_events_per_customer", "popularity_exponent", "taste_weight",
                     "purchase_fraction", "cold_start_fraction", "test_only_customer_fraction",
                     "train_start", "positive_start", "test_start", "test_end"},
                    "synthetic spec interactions");
    s.mean_events_per_customer =
        json_get<double>(ij, "mean_events_per_customer", s.mean_events_per_customer);
    s.popularity_exponent = json_get<double>(ij, "popularity_exponent", s.popularity_exponent);
    s.taste_weight = json_get<double>(ij, "taste_weight", s.taste_weight);
    s.purchase_fraction = json_get<double>(ij, "purchase_fraction", s.purchase_fraction);
    s.cold_start_fraction = json_get<double>(ij, "cold_start_fraction", s.cold_start_fraction);
    s.test_only_customer_fraction =
        json_get<double>(ij, "test_only_customer_fraction", s.test_only_customer_fraction);
    s.train_start = json_get<std::string>(ij, "train_start", s.train_start);
    s.positive_start = json_get<std::string>(ij, "positive_start", s.positive_start);
    s.test_start = json_get<std::string>(ij, "test_start", s.test_start);
    s.test_end = json_get<std::string>(ij, "test_end", s.test_end);
  }
  s.validate();
  return s;
}

inline SynthSpec load_synth_spec(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("synthetic spec '" + path + "': " + e.what());
  }
  return parse_synth_spec(j);
}

struct SynthResult {
  std::string catalogue_path;
  std::string interactions_path;
  std::string taxonomy_path;
  std::size_t n_events = 0;
  std::size_t n_cold_products = 0;
  std::vector<std::string> cold_product_ids;
  std::map<std::string, std::size_t> labelled_counts;  // per task, post-masking
};

namespace synth_detail {

inline std::size_t poisson(double lambda, Rng& rng) {
  const double limit = std::exp(-lambda);
  std::size_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.next_double();
  } while (p > limit);
  return k - 1;
}

// Mildly skewed class distribution so majority baselines are informative but
// not dominant.
inline std::size_t skewed_class(std::size_t classes, Rng& rng) {
  std::vector<double> w(classes);
  double total = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    w[c] = std::pow(static_cast<double>(c + 1), -0.6);
    total += w[c];
  }
  double r = rng.next_double() * total;
  for (std::size_t c = 0; c < classes; ++c) {
    r -= w[c];
    if (r <= 0) return c;
  }
  return classes - 1;
}

}  // namespace synth_detail

inline SynthResult generate_synthetic(const SynthSpec& spec, uint64_t seed,
                                      const std::string& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  Rng root(seed);
  Rng rng_proto = root.split(1);
  Rng rng_cat = root.split(2);
  Rng rng_mask = root.split(3);
  Rng rng_inter = root.split(4);

  const std::size_t n_tasks = spec.tasks.size();

  // Class prototypes. Image-source tasks get Gaussian cluster means; the
  // separation scales with signal_strength.
  std::vector<std::vector<std::vector<double>>> image_means(n_tasks);
  for (std::size_t t = 0; t < n_tasks; ++t) {
    if (spec.tasks[t].source != SignalSource::image) continue;
    image_means[t].assign(spec.tasks[t].classes, std::vector<double>(spec.image_dim));
    const double sep = 1.0 + spec.signal_strength;
    for (auto& mean : image_means[t])
      for (double& x : mean) x = rng_proto.next_gaussian() * sep;
  }

  std::size_t metadata_seen = 0;
  std::vector<int> metadata_carrier(n_tasks, -1);  // 0 = brand, 1 = division
  for (std::size_t t = 0; t < n_tasks; ++t)
    if (spec.tasks[t].source == SignalSource::metadata) metadata_carrier[t] = metadata_seen++ == 0 ? 0 : 1;

  // Cold cohort: a seeded selection of products available only in the test
  // window.
  const std::size_t n_cold =
      std::min(spec.n_products - 1,
               static_cast<std::size_t>(std::llround(spec.cold_start_fraction *
                                                     static_cast<double>(spec.n_products))));
  std::vector<std::size_t> order(spec.n_products);
  for (std::size_t i = 0; i < spec.n_products; ++i) order[i] = i;
  rng_cat.shuffle(order);
  std::vector<bool> is_cold(spec.n_products, false);
  for (std::size_t i = 0; i < n_cold; ++i) is_cold[order[i]] = true;
  std::vector<std::string> cold_ids;
  for (std::size_t p = 0; p < spec.n_products; ++p)
    if (is_cold[p]) cold_ids.push_back("p" + std::to_string(p));

  // Popularity rank over a second seeded shuffle.
  std::vector<std::size_t> pop_rank(spec.n_products);
  {
    std::vector<std::size_t> shuffled(order);
    rng_cat.shuffle(shuffled);
    for (std::size_t r = 0; r < shuffled.size(); ++r) pop_rank[shuffled[r]] = r;
  }

  struct Product {
    std::size_t type = 0, brand = 0, division = 0;
    std::vector<std::size_t> klass;  // per task
    std::vector<bool> applicable;    // per task
  };
  std::vector<Product> products(spec.n_products);

  SynthResult result;
  result.n_cold_products = n_cold;
  result.cold_product_ids = cold_ids;
  for (const auto& t : spec.tasks) result.labelled_counts[t.name] = 0;

  std::string catalogue_text;
  catalogue_text.reserve(spec.n_products * 512);

  for (std::size_t p = 0; p < spec.n_products; ++p) {
    Product& prod = products[p];
    prod.type = rng_cat.next_index(spec.n_types);
    prod.division = rng_cat.next_index(spec.n_divisions);
    prod.brand = rng_cat.next_index(spec.n_brands);
    prod.klass.resize(n_tasks);
    prod.applicable.resize(n_tasks);

    for (std::size_t t = 0; t < n_tasks; ++t) {
      const auto& task = spec.tasks[t];
      prod.applicable[t] =
          task.applicable_type_count == 0 || prod.type < task.applicable_type_count;
      prod.klass[t] = synth_detail::skewed_class(task.classes, rng_cat);
      if (!prod.applicable[t]) continue;
      if (metadata_carrier[t] == 0 && rng_cat.next_double() < spec.signal_strength)
        prod.brand = prod.klass[t] + task.classes * rng_cat.next_index(spec.n_brands / task.classes);
      if (metadata_carrier[t] == 1 && rng_cat.next_double() < spec.signal_strength)
        prod.division =
            prod.klass[t] + task.classes * rng_cat.next_index(spec.n_divisions / task.classes);
    }

    // Text: class keywords for applicable text-source tasks plus filler.
    std::vector<std::string> desc_tokens;
    for (std::size_t t = 0; t < n_tasks; ++t) {
      if (spec.tasks[t].source != SignalSource::text || !prod.applicable[t]) continue;
      for (std::size_t kw = 0; kw < spec.keywords_per_class; ++kw)
        if (rng_cat.next_double() < spec.signal_strength)
          desc_tokens.push_back("t" + std::to_string(t) + "c" + std::to_string(prod.klass[t]) +
                                "kw" + std::to_string(kw));
    }
    while (desc_tokens.size() < spec.description_tokens)
      desc_tokens.push_back("fill" + std::to_string(rng_cat.next_index(spec.filler_vocab)));
    rng_cat.shuffle(desc_tokens);

    std::string title;
    for (std::size_t i = 0; i < spec.title_tokens; ++i) {
      if (i) title += ' ';
      title += "fill" + std::to_string(rng_cat.next_index(spec.filler_vocab));
    }
    std::string description;
    for (std::size_t i = 0; i < desc_tokens.size(); ++i) {
      if (i) description += ' ';
      description += desc_tokens[i];
    }

    // Image shots: sum of applicable image-task cluster means + unit noise.
    std::vector<std::vector<double>> shots(kShotCount, std::vector<double>(spec.image_dim, 0.0));
    for (auto& shot : shots) {
      for (std::size_t t = 0; t < n_tasks; ++t) {
        if (spec.tasks[t].source != SignalSource::image || !prod.applicable[t]) continue;
        const auto& mean = image_means[t][prod.klass[t]];
        for (std::size_t d = 0; d < spec.image_dim; ++d) shot[d] += mean[d];
      }
      for (std::size_t d = 0; d < spec.image_dim; ++d) shot[d] += rng_cat.next_gaussian();
    }

    nlohmann::json attrs = nlohmann::json::object();
    for (std::size_t t = 0; t < n_tasks; ++t) {
      if (!prod.applicable[t]) continue;
      if (rng_mask.next_double() < spec.mask_rate) {
        attrs[spec.tasks[t].name] = nullptr;
      } else {
        attrs[spec.tasks[t].name] = "v" + std::to_string(prod.klass[t]);
        ++result.labelled_counts[spec.tasks[t].name];
      }
    }

    nlohmann::json line;
    line["product_id"] = "p" + std::to_string(p);
    line["product_type"] = "type" + std::to_string(prod.type);
    line["brand"] = "brand" + std::to_string(prod.brand);
    line["division"] = "div" + std::to_string(prod.division);
    line["title"] = title;
    line["description"] = description;
    line["image_features"] = shots;
    line["attributes"] = attrs;
    catalogue_text += line.dump();
    catalogue_text += '\n';
  }

  // ---------------------------------------------------------------- events
  const int64_t t_train = parse_iso8601_utc(spec.train_start);
  const int64_t t_positive = parse_iso8601_utc(spec.positive_start);
  const int64_t t_test = parse_iso8601_utc(spec.test_start);
  const int64_t t_end = parse_iso8601_utc(spec.test_end);
  if (!(t_train < t_positive && t_positive < t_test && t_test < t_end))
    throw ConfigError("synthetic spec: windows must be ordered train < positive < test < end");

  struct RawEvent {
    std::size_t customer, product;
    int64_t ts;
    int kind;
  };
  std::vector<RawEvent> events;

  std::vector<double> pop_weight(spec.n_products);
  for (std::size_t p = 0; p < spec.n_products; ++p)
    pop_weight[p] = std::pow(static_cast<double>(pop_rank[p] + 1), -spec.popularity_exponent);

  std::vector<double> cum(spec.n_products);
  for (std::size_t c = 0; c < spec.n_customers; ++c) {
    // Favourite class per task defines the customer's taste.
    std::vector<std::size_t> favourite(n_tasks);
    for (std::size_t t = 0; t < n_tasks; ++t)
      favourite[t] = rng_inter.next_index(spec.tasks[t].classes);

    const bool test_only = rng_inter.next_double() < spec.test_only_customer_fraction;
    const int64_t active_start = test_only ? t_test : t_train;
    const std::size_t n_ev =
        std::max<std::size_t>(1, synth_detail::poisson(spec.mean_events_per_customer, rng_inter));

    for (std::size_t e = 0; e < n_ev; ++e) {
      const int64_t ts =
          active_start +
          static_cast<int64_t>(rng_inter.next_double() * static_cast<double>(t_end - active_start));
      const bool cold_visible = ts >= t_test;
      double total = 0;
      for (std::size_t p = 0; p < spec.n_products; ++p) {
        double w = 0;
        if (!is_cold[p] || cold_visible) {
          double match = 0;
          for (std::size_t t = 0; t < n_tasks; ++t)
            if (products[p].klass[t] == favourite[t]) match += 1.0;
          match /= static_cast<double>(n_tasks);
          w = pop_weight[p] * std::exp(spec.taste_weight * match);
        }
        total += w;
        cum[p] = total;
      }
      const double r = rng_inter.next_double() * total;
      const std::size_t pick =
          static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
      const double kr = rng_inter.next_double();
      const int kind = kr < spec.purchase_fraction ? 2 : (kr < (1.0 + spec.purchase_fraction) / 2 ? 0 : 1);
      events.push_back({c, std::min(pick, spec.n_products - 1), ts, kind});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const RawEvent& a, const RawEvent& b) { return a.ts < b.ts; });

  std::string interactions_text = "customer_id,product_id,timestamp,kind\n";
  static const char* kind_names[3] = {"save", "bag", "purchase"};
  for (const auto& e : events) {
    interactions_text += "c" + std::to_string(e.customer) + ",p" + std::to_string(e.product) + "," +
                         format_iso8601_utc(e.ts) + "," + kind_names[e.kind] + "\n";
  }
  result.n_events = events.size();

  // --------------------------------------------------------------- taxonomy
  nlohmann::json taxonomy = nlohmann::json::array();
  for (std::size_t t = 0; t < n_tasks; ++t) {
    nlohmann::json entry;
    entry["name"] = spec.tasks[t].name;
    if (spec.tasks[t].applicable_type_count == 0) {
      entry["applicable_product_types"] = "*";
    } else {
      auto list = nlohmann::json::array();
      for (std::size_t ty = 0; ty < spec.tasks[t].applicable_type_count; ++ty)
        list.push_back("type" + std::to_string(ty));
      entry["applicable_product_types"] = list;
    }
    taxonomy.push_back(entry);
  }

  result.catalogue_path = (fs::path(out_dir) / "catalogue.jsonl").string();
  result.interactions_path = (fs::path(out_dir) / "interactions.csv").string();
  result.taxonomy_path = (fs::path(out_dir) / "taxonomy.json").string();
  write_file(result.catalogue_path, catalogue_text);
  write_file(result.interactions_path, interactions_text);
  write_file(result.taxonomy_path, taxonomy.dump(2) + "\n");
  return result;
}

}  // namespace modabric
