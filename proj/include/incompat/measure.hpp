#pragma once

// Exact-probability engine for finite classical measurement systems.
//
// A system holds a finite population of items. Each item carries one value of
// every base variable. The active pool (urn contents, remaining deck, or the
// current row of a table-driven system) is a Configuration: a multiset of
// items. Measuring a variable draws one item uniformly from the pool, reports
// its value, and updates the pool according to the system's dynamics.

#include "incompat/errors.hpp"
#include "incompat/rational.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace incompat {

enum class DynamicsKind { Urn, Deck, Table };

std::string_view to_string(DynamicsKind kind);

struct Variable {
  std::string name;
  std::vector<std::string> values;
  /// Name of the base variable this one coarse-grains; empty for base variables.
  std::string coarse_of;
  /// For coarse variables, blocks[i] lists the base value indices pooled into values[i].
  std::vector<std::vector<std::size_t>> blocks;

  bool is_coarse() const { return !coarse_of.empty(); }
  std::optional<std::size_t> index_of(std::string_view value) const;

  friend bool operator==(const Variable&, const Variable&) = default;
};

/// One kind of item in the population.
///
/// For urn and deck systems `labels[v]` is the value index the item carries for
/// variable `v` (coarse variables included; the system fills those in). Table
/// systems use items as opaque named states and leave `labels` empty.
struct Item {
  std::string name;
  std::vector<std::size_t> labels;

  friend bool operator==(const Item&, const Item&) = default;
};

/// Multiset of item indices, kept sorted by item index with positive counts so
/// that equal multisets compare equal.
class Configuration {
 public:
  using Entry = std::pair<std::size_t, std::uint64_t>;

  Configuration() = default;
  explicit Configuration(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }
  std::uint64_t total() const;
  std::uint64_t count(std::size_t item) const;
  bool empty() const { return entries_.empty(); }
  bool is_submultiset_of(const Configuration& other) const;
  Configuration without_one(std::size_t item) const;

  friend auto operator<=>(const Configuration&, const Configuration&) = default;

 private:
  std::vector<Entry> entries_;
};

struct Event {
  std::string variable;
  std::string value;

  /// Parses "Variable:Value".
  static Event parse(std::string_view text);
  std::string str() const { return variable + ":" + value; }

  friend auto operator<=>(const Event&, const Event&) = default;
};

/// Parses a comma-separated event list such as "Face:King,Suit:Spades".
std::vector<Event> parse_events(std::string_view text);

/// Deck rule: the drawn item is put back iff its `variable` label is one of
/// `replace_on`; otherwise it is discarded.
struct ReplacementRule {
  std::string variable;
  std::vector<std::string> replace_on;

  friend bool operator==(const ReplacementRule&, const ReplacementRule&) = default;
};

/// Outcome and update tables of a table-driven system, indexed
/// [state][variable][value].
struct TableLaw {
  std::vector<std::vector<std::vector<Rational>>> outcome;
  std::vector<std::vector<std::vector<std::size_t>>> update;

  friend bool operator==(const TableLaw&, const TableLaw&) = default;
};

struct ResolvedEvent {
  std::size_t variable;
  std::size_t value;
};

class MeasurementSystem {
 public:
  /// Validates every structural invariant and throws ValidationError on the
  /// first violation. Items of urn/deck systems are given with base labels
  /// only; coarse labels are derived here.
  MeasurementSystem(DynamicsKind dynamics, std::vector<Variable> variables, std::vector<Item> items,
                    Configuration population, std::vector<Configuration> initial,
                    std::optional<ReplacementRule> rule = std::nullopt,
                    std::optional<TableLaw> table = std::nullopt);

  DynamicsKind dynamics() const { return dynamics_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Item>& items() const { return items_; }
  const Configuration& population() const { return population_; }
  const std::vector<Configuration>& initial() const { return initial_; }
  const std::optional<ReplacementRule>& rule() const { return rule_; }
  const std::optional<TableLaw>& table() const { return table_; }

  std::size_t variable_index(std::string_view name) const;
  const Variable& variable(std::string_view name) const { return variables_[variable_index(name)]; }
  ResolvedEvent resolve(const Event& event) const;
  Event event_of(ResolvedEvent e) const;

  /// Value index item `item` carries for variable `variable` (urn/deck only).
  std::size_t label(std::size_t item, std::size_t variable) const { return items_[item].labels[variable]; }
  bool replaces(std::size_t item) const;

  /// Every event of every variable, variables in declaration order.
  std::vector<Event> all_events() const;

  std::string describe(const Configuration& config) const;

  friend bool operator==(const MeasurementSystem&, const MeasurementSystem&) = default;

 private:
  void validate_variables() const;
  void validate_items();
  void validate_table() const;

  DynamicsKind dynamics_;
  std::vector<Variable> variables_;
  std::vector<Item> items_;
  Configuration population_;
  std::vector<Configuration> initial_;
  std::optional<ReplacementRule> rule_;
  std::optional<TableLaw> table_;
  std::vector<bool> replaces_;
};

/// Exact probability distribution over configurations (a preparation state).
class PState {
 public:
  /// Throws ValidationError unless every weight is positive and they sum to 1.
  explicit PState(std::map<Configuration, Rational> weights);

  static PState point(Configuration config);
  /// lambda*a + (1-lambda)*b, lambda in (0, 1).
  static PState mixture(const Rational& lambda, const PState& a, const PState& b);

  const std::map<Configuration, Rational>& weights() const { return weights_; }
  bool is_point() const { return weights_.size() == 1; }

  friend bool operator==(const PState&, const PState&) = default;

 private:
  std::map<Configuration, Rational> weights_;
};

/// Uniform mixture over the system's initial configurations.
PState initial_state(const MeasurementSystem& system);

/// One way a measurement can come out with the requested value: the
/// probability of that branch and the pool it leaves behind.
struct Branch {
  Rational weight;
  Configuration next;
};

/// All branches of measuring `event.variable` on `config` that report
/// `event.value`, merged by resulting configuration. Their weights sum to the
/// event's probability. Throws EmptyPool on an empty configuration.
std::vector<Branch> manifest(const MeasurementSystem& system, const Configuration& config, ResolvedEvent event);

std::map<std::string, Rational> outcome_distribution(const MeasurementSystem& system, const Configuration& config,
                                                     std::string_view variable);

/// Pool left behind after `event`. Deck systems need to know which item was
/// drawn when items reporting the same value are treated differently by the
/// replacement rule; pass it as `drawn` (otherwise AmbiguousDraw).
Configuration update_config(const MeasurementSystem& system, const Configuration& config, const Event& event,
                            std::optional<std::size_t> drawn = std::nullopt);

struct FilterResult {
  Rational prob;
  /// Absent when `prob` is zero.
  std::optional<PState> conditioned;
};

FilterResult filter_event(const MeasurementSystem& system, const PState& sigma, const Event& event);

/// Probability of `events[0]` and then `events[1]` and then ...
Rational sequence_prob(const MeasurementSystem& system, const PState& sigma, std::span<const Event> events);

/// Throws ZeroCondition when the conditions have probability zero.
Rational conditional_prob(const MeasurementSystem& system, const PState& sigma, const Event& target,
                          std::span<const Event> conditions);

/// Which configurations count as preparations.
enum class PreparationDomain {
  /// Initial configurations closed under manifestations.
  Reachable,
  /// Every non-empty sub-multiset of the population (every state for tables).
  AllSubmultisets,
};

/// Sorted set of non-empty configurations in the chosen domain.
std::vector<Configuration> reachable_configs(const MeasurementSystem& system,
                                             PreparationDomain domain = PreparationDomain::Reachable);

}  // namespace incompat
