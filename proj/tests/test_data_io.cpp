#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "modabric/catalogue.hpp"
#include "modabric/interactions.hpp"
#include "modabric/io_util.hpp"
#include "modabric/synthetic.hpp"
#include "modabric/text.hpp"

using namespace modabric;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Tokens, SplitRule) {
  EXPECT_EQ(split_tokens("Tea-Dress"), (std::vector<std::string>{"tea", "dress"}));
  EXPECT_EQ(split_tokens("  ASOS Mini, tea dress!"),
            (std::vector<std::string>{"asos", "mini", "tea", "dress"}));
  EXPECT_TRUE(split_tokens("").empty());
}

TEST(Vocab, MinCountAndUnknown) {
  Vocabulary v = build_vocab({"tea dress tea", "dress shirt"}, 2);
  // "tea" (2) and "dress" (2) survive; "shirt" (1) maps to unknown.
  EXPECT_EQ(v.size(), 4);  // pad + unk + 2 survivors
  EXPECT_EQ(v.lookup("tea"), 2);
  EXPECT_EQ(v.lookup("dress"), 3);
  EXPECT_EQ(v.lookup("shirt"), Vocabulary::unk_id);
  EXPECT_EQ(v.lookup("never-seen"), Vocabulary::unk_id);
}

TEST(Vocab, SizeEqualsDistinctSurvivorsPlusTwo) {
  Rng rng(5);
  std::vector<std::string> texts;
  std::map<std::string, int> counts;
  for (int i = 0; i < 50; ++i) {
    std::string text;
    for (int t = 0; t < 8; ++t) {
      std::string tok = "w" + std::to_string(rng.next_index(30));
      ++counts[tok];
      text += tok + " ";
    }
    texts.push_back(text);
  }
  const std::size_t min_count = 3;
  std::size_t survivors = 0;
  for (auto& [_, c] : counts)
    if (static_cast<std::size_t>(c) >= min_count) ++survivors;
  Vocabulary v = build_vocab(texts, min_count);
  EXPECT_EQ(static_cast<std::size_t>(v.size()), survivors + 2);
}

TEST(Tokenize, PaddingAndTruncation) {
  Vocabulary v = build_vocab({"a b c d e f"}, 1);
  auto empty = tokenize("", v, 5);
  EXPECT_EQ(empty, (std::vector<int>{0, 0, 0, 0, 0}));

  auto truncated = tokenize("a b c d e f", v, 3);
  EXPECT_EQ(truncated.size(), 3u);
  EXPECT_EQ(truncated, (std::vector<int>{v.lookup("a"), v.lookup("b"), v.lookup("c")}));

  auto padded = tokenize("a b", v, 4);
  EXPECT_EQ(padded, (std::vector<int>{v.lookup("a"), v.lookup("b"), 0, 0}));
}

TEST(Iso8601, ParseFormatRoundTrip) {
  const std::string s = "2017-02-28T23:59:59Z";
  EXPECT_EQ(format_iso8601_utc(parse_iso8601_utc(s)), s);
  EXPECT_EQ(parse_iso8601_utc("1970-01-01"), 0);
  EXPECT_EQ(parse_iso8601_utc("1970-01-02T00:00:00Z"), 86400);
  EXPECT_THROW(parse_iso8601_utc("2017-13-01"), ParseError);
  EXPECT_THROW(parse_iso8601_utc("2017-02-30"), ParseError);
  EXPECT_THROW(parse_iso8601_utc("not a date"), ParseError);
}

TEST(CatalogueLoader, ParseOrRejectPerLine) {
  auto dir = temp_dir("modabric_cat_test");
  const std::string good =
      R"({"product_id":"p1","product_type":"dress","brand":"b","division":"d","title":"Tea Dress",)"
      R"("description":"floral print","image_features":[[1,2],[3,4],[5,6],[7,8]],)"
      R"("attributes":{"pattern":"floral","segment":null}})";
  const std::string bad_json = "{not json";
  const std::string bad_shots =
      R"({"product_id":"p2","product_type":"dress","brand":"b","division":"d","title":"x",)"
      R"("description":"y","image_features":[[1,2],[3,4],[5,6]],"attributes":{}})";
  write_file((dir / "catalogue.jsonl").string(), good + "\n" + bad_json + "\n" + bad_shots + "\n");

  Catalogue cat = load_catalogue((dir / "catalogue.jsonl").string());
  ASSERT_EQ(cat.products.size(), 1u);
  ASSERT_EQ(cat.rejects.size(), 2u);
  EXPECT_EQ(cat.rejects[0].line, 2u);
  EXPECT_EQ(cat.rejects[1].line, 3u);
  EXPECT_EQ(cat.image_dim, 2u);

  const RawProduct& p = cat.products[0];
  EXPECT_EQ(p.attributes.count("pattern"), 1u);
  // null attribute value means ABSENT: key dropped.
  EXPECT_EQ(p.attributes.count("segment"), 0u);
  fs::remove_all(dir);
}

TEST(CatalogueLoader, ImageFeaturesByReference) {
  auto dir = temp_dir("modabric_cat_ref_test");
  {
    std::ofstream os(dir / "shots.bin", std::ios::binary);
    uint32_t shots = 4, dim = 3;
    os.write(reinterpret_cast<char*>(&shots), 4);
    os.write(reinterpret_cast<char*>(&dim), 4);
    for (int i = 0; i < 12; ++i) {
      double x = i * 0.5;
      os.write(reinterpret_cast<char*>(&x), 8);
    }
  }
  const std::string line =
      R"({"product_id":"p1","product_type":"t","brand":"b","division":"d","title":"x",)"
      R"("description":"y","image_features_ref":"shots.bin","attributes":{}})";
  write_file((dir / "catalogue.jsonl").string(), line + "\n");
  Catalogue cat = load_catalogue((dir / "catalogue.jsonl").string());
  ASSERT_EQ(cat.products.size(), 1u);
  EXPECT_EQ(cat.image_dim, 3u);
  EXPECT_DOUBLE_EQ(cat.products[0].image_shots[3][2], 5.5);
  fs::remove_all(dir);
}

TEST(CatalogueEncode, IdsTokensAndShots) {
  auto dir = temp_dir("modabric_cat_enc_test");
  const std::string l1 =
      R"({"product_id":"p1","product_type":"dress","brand":"acme","division":"women","title":"Tea Dress",)"
      R"("description":"floral tea","image_features":[[1],[2],[3],[4]],"attributes":{"pattern":"floral"}})";
  const std::string l2 =
      R"({"product_id":"p2","product_type":"skirt","brand":"acme","division":"women","title":"Plain Skirt",)"
      R"("description":"plain skirt","image_features":[[5],[6],[7],[8]],"attributes":{}})";
  write_file((dir / "catalogue.jsonl").string(), l1 + "\n" + l2 + "\n");
  Catalogue cat = load_catalogue((dir / "catalogue.jsonl").string());
  CatalogueIndex idx = build_catalogue_index(cat, 1, 6);
  auto records = encode_products(cat, idx);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_NE(records[0].product_type_id, records[1].product_type_id);
  EXPECT_EQ(records[0].brand_id, records[1].brand_id);
  EXPECT_EQ(records[0].text_tokens.size(), 6u);
  EXPECT_EQ(records[0].image_shots.shape, (std::vector<std::size_t>{4, 1}));
  // "tea" appears twice in p1's text, ids round-trip through the vocab.
  EXPECT_EQ(records[0].text_tokens[0], idx.words.lookup("tea"));
  EXPECT_EQ(records[0].attributes.count("pattern"), 1u);
  EXPECT_EQ(records[1].attributes.count("pattern"), 0u);
  fs::remove_all(dir);
}

TEST(Taxonomy, LoadsWildcardAndLists) {
  auto dir = temp_dir("modabric_tax_test");
  write_file((dir / "taxonomy.json").string(),
             R"([{"name":"pattern","applicable_product_types":"*"},)"
             R"({"name":"neckline","applicable_product_types":["dress","top"],"min_support":7}])");
  auto tax = load_taxonomy((dir / "taxonomy.json").string());
  ASSERT_EQ(tax.size(), 2u);
  EXPECT_TRUE(tax[0].all_types);
  EXPECT_FALSE(tax[1].all_types);
  EXPECT_EQ(tax[1].applicable_product_types, (std::vector<std::string>{"dress", "top"}));
  ASSERT_TRUE(tax[1].min_support.has_value());
  EXPECT_EQ(*tax[1].min_support, 7u);

  write_file((dir / "dup.json").string(),
             R"([{"name":"a","applicable_product_types":"*"},{"name":"a","applicable_product_types":"*"}])");
  EXPECT_THROW(load_taxonomy((dir / "dup.json").string()), ParseError);
  fs::remove_all(dir);
}

TEST(InteractionLoader, HeaderAndRejects) {
  auto dir = temp_dir("modabric_inter_test");
  write_file((dir / "x.csv").string(),
             "customer_id,product_id,timestamp,kind\n"
             "c1,p1,2016-05-01T10:00:00Z,purchase\n"
             "c1,p2,2016-05-02T10:00:00Z,save\n"
             "c2,p1,not-a-time,bag\n"
             "c2,p1,2016-05-03T10:00:00Z,steal\n"
             "c2,,2016-05-03T10:00:00Z,bag\n");
  auto log = load_interactions((dir / "x.csv").string());
  EXPECT_EQ(log.events.size(), 2u);
  ASSERT_EQ(log.rejects.size(), 3u);
  EXPECT_EQ(log.rejects[0].line, 4u);

  write_file((dir / "bad_header.csv").string(), "a,b,c,d\n");
  EXPECT_THROW(load_interactions((dir / "bad_header.csv").string()), ParseError);
  fs::remove_all(dir);
}

TEST(TemporalSplit, BoundaryGoesToLaterWindow) {
  std::vector<Event> events;
  auto add = [&](const std::string& ts) {
    Event e;
    e.customer_id = "c";
    e.product_id = "p";
    e.ts = parse_iso8601_utc(ts);
    e.input_order = events.size();
    events.push_back(e);
  };
  add("2016-01-01T00:00:00Z");  // train start
  add("2016-02-01T00:00:00Z");  // exactly at positive start -> positive
  add("2016-02-10T00:00:00Z");
  add("2016-03-01T00:00:00Z");  // exactly at test start -> test
  TimeWindow train{parse_iso8601_utc("2016-01-01"), parse_iso8601_utc("2016-02-01")};
  TimeWindow positive{parse_iso8601_utc("2016-02-01"), parse_iso8601_utc("2016-03-01")};
  TimeWindow test{parse_iso8601_utc("2016-03-01"), parse_iso8601_utc("2016-04-01")};
  auto split = temporal_split(events, train, positive, test);
  EXPECT_EQ(split.train_events.size(), 1u);
  EXPECT_EQ(split.positive_events.size(), 2u);
  EXPECT_EQ(split.test_events.size(), 1u);
  EXPECT_EQ(split.out_of_window, 0u);
}

TEST(TemporalSplit, MatchesTimestampFilterOracleOnRandomLogs) {
  Rng rng(31);
  const int64_t t0 = 1000, t1 = 2000, t2 = 3000, t3 = 4000;
  std::vector<Event> events;
  for (int i = 0; i < 500; ++i) {
    Event e;
    e.customer_id = "c" + std::to_string(rng.next_index(10));
    e.product_id = "p" + std::to_string(rng.next_index(20));
    e.ts = static_cast<int64_t>(rng.next_index(5000));
    e.input_order = events.size();
    events.push_back(e);
  }
  auto split = temporal_split(events, {t0, t1}, {t1, t2}, {t2, t3});
  std::size_t train = 0, positive = 0, test = 0, out = 0;
  for (const auto& e : events) {
    if (e.ts >= t0 && e.ts < t1) ++train;
    else if (e.ts >= t1 && e.ts < t2) ++positive;
    else if (e.ts >= t2 && e.ts < t3) ++test;
    else ++out;
  }
  EXPECT_EQ(split.train_events.size(), train);
  EXPECT_EQ(split.positive_events.size(), positive);
  EXPECT_EQ(split.test_events.size(), test);
  EXPECT_EQ(split.out_of_window, out);
  EXPECT_EQ(split.train_events.size() + split.positive_events.size() + split.test_events.size() +
                split.out_of_window,
            events.size());
  // Partitions are chronologically ordered with stable ties.
  for (std::size_t i = 1; i < split.train_events.size(); ++i)
    EXPECT_LE(split.train_events[i - 1].ts, split.train_events[i].ts);
  // Availability covers min/max of each product's appearances.
  for (const auto& e : events) {
    const auto& av = split.availability.at(e.product_id);
    EXPECT_LE(av.first_seen, e.ts);
    EXPECT_GE(av.last_seen, e.ts);
  }
}

TEST(TemporalSplit, ErrorsNameTheWindow) {
  std::vector<Event> events;
  Event e;
  e.customer_id = "c";
  e.product_id = "p";
  e.ts = 1500;
  events.push_back(e);
  try {
    temporal_split(events, {1000, 2000}, {2000, 3000}, {3000, 4000});
    FAIL() << "expected Error";
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("positive"), std::string::npos);
  }
  EXPECT_THROW(temporal_split(events, {1000, 2000}, {2500, 3000}, {3000, 4000}), ValueError);
}

TEST(Synthetic, SameSeedByteIdentical) {
  auto dir1 = temp_dir("modabric_synth_a");
  auto dir2 = temp_dir("modabric_synth_b");
  SynthSpec spec;
  spec.n_products = 60;
  spec.n_customers = 30;
  spec.image_dim = 4;
  spec.tasks = {{"alpha", 3, SignalSource::text, 0}, {"beta", 2, SignalSource::image, 0}};
  auto r1 = generate_synthetic(spec, 99, dir1.string());
  auto r2 = generate_synthetic(spec, 99, dir2.string());
  EXPECT_EQ(read_file(r1.catalogue_path), read_file(r2.catalogue_path));
  EXPECT_EQ(read_file(r1.interactions_path), read_file(r2.interactions_path));
  EXPECT_EQ(read_file(r1.taxonomy_path), read_file(r2.taxonomy_path));

  auto r3 = generate_synthetic(spec, 100, dir2.string());
  EXPECT_NE(read_file(r1.catalogue_path), read_file(r3.catalogue_path));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST(Synthetic, MaskingRateCloseToTarget) {
  auto dir = temp_dir("modabric_synth_mask");
  SynthSpec spec;
  spec.n_products = 4000;
  spec.n_customers = 5;
  spec.image_dim = 2;
  spec.mask_rate = 0.75;
  spec.tasks = {{"alpha", 3, SignalSource::text, 0}};
  auto r = generate_synthetic(spec, 7, dir.string());
  const double labelled_rate =
      static_cast<double>(r.labelled_counts.at("alpha")) / static_cast<double>(spec.n_products);
  EXPECT_NEAR(labelled_rate, 0.25, 0.02);
  fs::remove_all(dir);
}

TEST(Synthetic, OutputPassesLoadersAndColdCohortHasNoTrainEvents) {
  auto dir = temp_dir("modabric_synth_load");
  SynthSpec spec;
  spec.n_products = 120;
  spec.n_customers = 80;
  spec.image_dim = 3;
  spec.cold_start_fraction = 0.15;
  spec.tasks = {{"alpha", 3, SignalSource::text, 0}, {"gamma", 3, SignalSource::metadata, 0}};
  auto r = generate_synthetic(spec, 3, dir.string());

  Catalogue cat = load_catalogue(r.catalogue_path);
  EXPECT_EQ(cat.rejects.size(), 0u);
  EXPECT_EQ(cat.products.size(), 120u);

  auto log = load_interactions(r.interactions_path);
  EXPECT_EQ(log.rejects.size(), 0u);
  EXPECT_GT(log.events.size(), 0u);

  auto tax = load_taxonomy(r.taxonomy_path);
  EXPECT_EQ(tax.size(), 2u);

  // Cold-cohort products never appear in events before the test window.
  const int64_t t_test = parse_iso8601_utc(spec.test_start);
  std::set<std::string> cold(r.cold_product_ids.begin(), r.cold_product_ids.end());
  ASSERT_EQ(cold.size(), r.n_cold_products);
  EXPECT_GT(r.n_cold_products, 0u);
  for (const auto& e : log.events)
    if (cold.count(e.product_id)) EXPECT_GE(e.ts, t_test) << e.product_id;
  fs::remove_all(dir);
}
