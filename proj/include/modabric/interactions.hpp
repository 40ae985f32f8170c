#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "modabric/catalogue.hpp"
#include "modabric/io_util.hpp"

namespace modabric {

enum class EventKind { save, bag, purchase };

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::save: return "save";
    case EventKind::bag: return "bag";
    default: return "purchase";
  }
}

inline EventKind parse_event_kind(const std::string& s) {
  if (s == "save") return EventKind::save;
  if (s == "bag") return EventKind::bag;
  if (s == "purchase") return EventKind::purchase;
  throw ParseError("unknown interaction kind '" + s + "'");
}

struct Event {
  std::string customer_id;
  std::string product_id;
  int64_t ts = 0;
  EventKind kind = EventKind::purchase;
  std::size_t input_order = 0;  // tie-breaker for equal timestamps
};

struct InteractionLog {
  std::vector<Event> events;
  std::vector<LineReject> rejects;
};

// CSV with header customer_id,product_id,timestamp,kind; timestamps ISO-8601
// UTC; kind in {save,bag,purchase}. Bad rows are reported, never dropped
// silently.
inline InteractionLog load_interactions(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open interactions '" + path + "'");
  InteractionLog log;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw ParseError(path + ": empty file");
  ++line_no;
  if (line != "customer_id,product_id,timestamp,kind")
    throw ParseError(path + ": unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto fields = split_csv_line(line);
      if (fields.size() != 4) throw ParseError("expected 4 fields");
      if (fields[0].empty() || fields[1].empty()) throw ParseError("empty id field");
      Event e;
      e.customer_id = fields[0];
      e.product_id = fields[1];
      e.ts = parse_iso8601_utc(fields[2]);
      e.kind = parse_event_kind(fields[3]);
      e.input_order = log.events.size();
      log.events.push_back(std::move(e));
    } catch (const std::exception& ex) {
      log.rejects.push_back({line_no, ex.what()});
    }
  }
  return log;
}

// Half-open [start, end): an event exactly on a boundary belongs to the later
// window.
struct TimeWindow {
  int64_t start = 0;
  int64_t end = 0;
  bool contains(int64_t ts) const { return ts >= start && ts < end; }
};

struct ProductAvailability {
  int64_t first_seen = 0;
  int64_t last_seen = 0;
};

struct InteractionSet {
  TimeWindow train_window;     // events before the positive month
  TimeWindow positive_window;  // last month of the training period
  TimeWindow test_window;
  std::vector<Event> train_events;
  std::vector<Event> positive_events;
  std::vector<Event> test_events;
  std::map<std::string, ProductAvailability> availability;  // over all events
  std::size_t out_of_window = 0;

  // The "training window" in the recommender sense spans train + positive.
  TimeWindow full_train_window() const { return {train_window.start, positive_window.end}; }
};

inline InteractionSet temporal_split(const std::vector<Event>& events, TimeWindow train,
                                     TimeWindow positive, TimeWindow test) {
  if (!(train.start < train.end && positive.start < positive.end && test.start < test.end))
    throw ValueError("temporal_split: windows must be non-empty intervals");
  if (train.end != positive.start || positive.end != test.start)
    throw ValueError("temporal_split: windows must be contiguous and non-overlapping");

  InteractionSet out;
  out.train_window = train;
  out.positive_window = positive;
  out.test_window = test;
  for (const auto& e : events) {
    auto [it, inserted] = out.availability.try_emplace(e.product_id,
                                                       ProductAvailability{e.ts, e.ts});
    if (!inserted) {
      it->second.first_seen = std::min(it->second.first_seen, e.ts);
      it->second.last_seen = std::max(it->second.last_seen, e.ts);
    }
    if (train.contains(e.ts)) {
      out.train_events.push_back(e);
    } else if (positive.contains(e.ts)) {
      out.positive_events.push_back(e);
    } else if (test.contains(e.ts)) {
      out.test_events.push_back(e);
    } else {
      ++out.out_of_window;
    }
  }
  auto by_time = [](const Event& a, const Event& b) {
    return a.ts != b.ts ? a.ts < b.ts : a.input_order < b.input_order;
  };
  std::sort(out.train_events.begin(), out.train_events.end(), by_time);
  std::sort(out.positive_events.begin(), out.positive_events.end(), by_time);
  std::sort(out.test_events.begin(), out.test_events.end(), by_time);

  if (out.train_events.empty()) throw Error("temporal_split: train window is empty");
  if (out.positive_events.empty()) throw Error("temporal_split: positive window is empty");
  if (out.test_events.empty()) throw Error("temporal_split: test window is empty");
  return out;
}

}  // namespace modabric
