#pragma once

#include "incompat/catalog.hpp"
#include "incompat/measure.hpp"
#include "oracle.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace testing {

using incompat::Configuration;
using incompat::Event;
using incompat::MeasurementSystem;
using incompat::Rational;

inline Rational R(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }
inline Rational R(oracle::Frac f) { return Rational(f.n, f.d); }

inline std::size_t item_named(const MeasurementSystem& sys, const std::string& name) {
  for (std::size_t i = 0; i < sys.items().size(); ++i) {
    if (sys.items()[i].name == name) return i;
  }
  throw std::invalid_argument("no item " + name);
}

inline Configuration config_of(const MeasurementSystem& sys,
                               const std::vector<std::pair<std::string, std::uint64_t>>& counts) {
  std::vector<Configuration::Entry> entries;
  for (const auto& [name, n] : counts) entries.emplace_back(item_named(sys, name), n);
  std::sort(entries.begin(), entries.end());
  return Configuration(entries);
}

inline Event ev(const std::string& text) { return Event::parse(text); }

inline std::vector<Event> evs(const std::string& text) { return incompat::parse_events(text); }

// Bridges between oracle states and library configurations.

inline Configuration from_pool(const MeasurementSystem& urn, const oracle::Pool& pool) {
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  for (int b = 0; b < 9; ++b) {
    if (pool[b] > 0) counts.emplace_back(oracle::kColors[b / 3] + "-" + oracle::kPatterns[b % 3], pool[b]);
  }
  return config_of(urn, counts);
}

inline Configuration from_deck(const MeasurementSystem& deck, unsigned mask) {
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  for (int c = 0; c < 4; ++c) {
    if (mask >> c & 1u) counts.emplace_back(oracle::kFaces[c / 2] + "-" + oracle::kSuits[c % 2], 1);
  }
  return config_of(deck, counts);
}

inline Event urn_event(oracle::Ev e) {
  return Event{oracle::kUrnVars[e.var], oracle::urn_value_name(e.var, e.value)};
}

inline Event deck_event(oracle::Ev e) {
  return Event{oracle::kDeckVars[e.var], e.var == 0 ? oracle::kFaces[e.value] : oracle::kSuits[e.value]};
}

inline std::vector<oracle::Ev> urn_events() {
  std::vector<oracle::Ev> out;
  for (int var = 0; var < 3; ++var) {
    for (int v = 0; v < oracle::urn_num_values(var); ++v) out.push_back({var, v});
  }
  return out;
}

inline std::vector<oracle::Ev> deck_events() {
  std::vector<oracle::Ev> out;
  for (int var = 0; var < 2; ++var) {
    for (int v = 0; v < 2; ++v) out.push_back({var, v});
  }
  return out;
}

inline incompat::DeckRule library_rule(oracle::Rule rule) {
  switch (rule) {
    case oracle::Rule::SpadesReplace: return incompat::DeckRule::SpadesReplace;
    case oracle::Rule::AlwaysReplace: return incompat::DeckRule::AlwaysReplace;
    case oracle::Rule::AlwaysDiscard: return incompat::DeckRule::AlwaysDiscard;
  }
  return incompat::DeckRule::SpadesReplace;
}

}  // namespace testing
