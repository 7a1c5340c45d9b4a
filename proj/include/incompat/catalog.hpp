#pragma once

// Example systems, a random table-driven family, and the JSON system format.

#include "incompat/measure.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace incompat {

enum class DeckRule {
  SpadesReplace,  // replace if Suit is Spades, discard otherwise
  AlwaysReplace,
  AlwaysDiscard,
};

/// King and Queen of Hearts and of Spades; variables Face and Suit.
MeasurementSystem build_card_deck(DeckRule rule);
inline MeasurementSystem build_card_example() { return build_card_deck(DeckRule::SpadesReplace); }

/// Nine balls with Color (Yellow, Green, Blue) and Pattern (Plain, Dotted,
/// Striped) under urn dynamics, full urn initially. Counts by color/pattern:
///
///            Plain Dotted Striped
///   Yellow     2     1      0
///   Green      1     1      1
///   Blue       0     2      1
///
/// Every color class mixes at least two patterns and vice versa, so no
/// reachable state is sharp in both. With `include_colorblind` a coarse
/// variable ColorBlind = {Yellow, Grue = Green or Blue} is registered too.
MeasurementSystem build_urn_example(bool include_colorblind = true);

/// "urn", "card", "deck-replace" or "deck-discard".
MeasurementSystem build_builtin(std::string_view name);
const std::vector<std::string>& builtin_names();

/// Parses and validates a system document. Throws SpecError (with a JSON
/// pointer) on schema violations and ValidationError on invariant violations.
MeasurementSystem load_system(std::string_view text);
MeasurementSystem system_from_json(const nlohmann::json& doc);

/// Canonical JSON document for a system.
nlohmann::json system_to_json(const MeasurementSystem& system);
std::string save_system(const MeasurementSystem& system);

/// A configuration as a list of item objects with counts.
nlohmann::json config_to_json(const MeasurementSystem& system, const Configuration& config);
Configuration config_from_json(const MeasurementSystem& system, const nlohmann::json& doc,
                               const std::string& path = "");

nlohmann::json rational_to_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& doc, const std::string& path = "");

/// Table system with states s0..s{n-1}; each variable `name` gets values
/// name0..name{k-1}. Outcome rows are random distributions with denominators
/// at most 12 and updates are uniform random states. Every state is an
/// initial configuration.
MeasurementSystem random_table_system(std::size_t num_configs,
                                      const std::vector<std::pair<std::string, std::size_t>>& variables,
                                      std::uint64_t seed);

}  // namespace incompat
