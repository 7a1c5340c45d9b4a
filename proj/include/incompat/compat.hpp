#pragma once

// Compatibility criteria for classical measurement systems.
//
// Three probability expressions characterize compatible values p, q:
//
//   NonDisturbance      Prob(p | p & q) = 1                      for all sigma
//   IgnoredMeasurement  sum_s Pr(Q=s & p) = Pr(p)                for all sigma
//   OrderExchange       Pr(p & q) = Pr(q & p)                    for all sigma
//
// "For all sigma" is decided over point states on the preparation domain
// (reachable configurations by default). Every expression is affine in sigma
// once the conditional's denominator is cleared, so agreement on point states
// carries over to every mixture. Preparations on which a sequence would
// measure an empty pool are skipped.

#include "incompat/measure.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace incompat {

enum class CriterionKind { NonDisturbance, IgnoredMeasurement, OrderExchange };

std::string_view to_string(CriterionKind kind);
std::optional<CriterionKind> criterion_from_string(std::string_view name);

struct Witness {
  Configuration config;
  Rational left;
  Rational right;

  friend bool operator==(const Witness&, const Witness&) = default;
};

struct CriterionReport {
  CriterionKind kind = CriterionKind::OrderExchange;
  Event p;
  /// Second event, or the name of the ignored variable for IgnoredMeasurement.
  std::variant<Event, std::string> q;
  bool holds = true;
  /// No preparation qualified; `holds` is then vacuously true.
  bool vacuous = false;
  /// Present iff the criterion fails: the first failing preparation.
  std::optional<Witness> witness;

  friend bool operator==(const CriterionReport&, const CriterionReport&) = default;
};

struct AnalysisOptions {
  PreparationDomain domain = PreparationDomain::Reachable;
};

struct Sides {
  Rational left;
  Rational right;
};

/// Pr(p & q) and Pr(q & p).
Sides order_exchange_sides(const MeasurementSystem& system, const PState& sigma, const Event& p, const Event& q);
/// Prob(p | p & q) and 1; nullopt when Pr(p & q) = 0.
std::optional<Sides> nondisturbance_sides(const MeasurementSystem& system, const PState& sigma, const Event& p,
                                          const Event& q);
/// sum_s Pr(Q=s & p) and Pr(p).
Sides ignored_sides(const MeasurementSystem& system, const PState& sigma, const Event& p, std::string_view ignored);

CriterionReport check_order_exchange(const MeasurementSystem& system, const Event& p, const Event& q,
                                     const AnalysisOptions& options = {});
CriterionReport check_nondisturbance(const MeasurementSystem& system, const Event& p, const Event& q,
                                     const AnalysisOptions& options = {});
CriterionReport check_ignored(const MeasurementSystem& system, const Event& p, std::string_view ignored,
                              const AnalysisOptions& options = {});

/// Re-evaluates a report's witness and confirms the recorded sides.
bool witness_valid(const MeasurementSystem& system, const CriterionReport& report);

struct CompatibilityMatrix {
  std::string rows;
  std::string cols;
  /// cells[a][b] is the OrderExchange report for (rows=a, cols=b).
  std::vector<std::vector<CriterionReport>> cells;
  bool all_hold = true;
};

CompatibilityMatrix compatibility_matrix(const MeasurementSystem& system, std::string_view a, std::string_view b,
                                         const AnalysisOptions& options = {});

struct RepeatabilityEntry {
  std::string given;
  std::string target;
  bool holds = true;
  bool vacuous = false;
  /// left = Prob(target | given), right = delta(target, given).
  std::optional<Witness> witness;
};

/// Prob(q_j | q_k) = delta_jk for every pair, in given-major order.
std::vector<RepeatabilityEntry> repeatability_check(const MeasurementSystem& system, std::string_view variable,
                                                    const AnalysisOptions& options = {});

struct InterferenceRecord {
  PState preparation;
  Event coarse;
  std::vector<Event> fine;
  std::optional<Event> follow;
  Rational coarse_path;
  Rational fine_sum;
  Rational deficit;
};

/// Pr(coarse & follow) - sum_i Pr(fine_i & follow). Without `follow` the two
/// paths are single measurements. Throws BlockMismatch unless `fine` lists
/// exactly the base events pooled by `coarse`.
InterferenceRecord interference_deficit(const MeasurementSystem& system, const PState& sigma, const Event& coarse,
                                        const std::vector<Event>& fine, const std::optional<Event>& follow);

struct SharpnessEntry {
  Configuration config;
  /// Per variable (system order): the value obtained with certainty, if any.
  std::vector<std::optional<std::string>> sharp;
  bool sharp_in_all_base = false;
};

std::vector<SharpnessEntry> sharpness_audit(const MeasurementSystem& system, const AnalysisOptions& options = {});

/// True when filtering twice on `event` equals filtering once (probability and
/// state) from every preparation where the event can occur.
bool filter_repeatable(const MeasurementSystem& system, const Event& event, const AnalysisOptions& options = {});

struct Verdicts {
  bool nondisturbance = false;
  bool ignored = false;
  bool order_exchange = false;

  friend bool operator==(const Verdicts&, const Verdicts&) = default;
};

std::string pattern_string(const Verdicts& v);

struct PairAudit {
  Event p;
  Event q;
  Verdicts verdicts;
  /// OrderExchange(p, q_k) for every value q_k of q's variable.
  bool order_exchange_all_k = false;
  bool p_filter_repeatable = false;
};

struct RelationAudit {
  std::vector<PairAudit> pairs;
  /// Implication failures; any entry means the engine is unsound.
  std::vector<std::string> violations;
  std::size_t implications_checked = 0;

  bool sound() const { return violations.empty(); }
};

/// Evaluates all three criteria on every pair of events from distinct
/// variables, then checks OrderExchange => NonDisturbance (when the p-filter
/// is repeatable) and OrderExchange for all q_k => IgnoredMeasurement.
RelationAudit relation_audit(const MeasurementSystem& system, const AnalysisOptions& options = {});

Verdicts verdict_pattern(const MeasurementSystem& system, const Event& p, const Event& q,
                         const AnalysisOptions& options = {});

/// Same verdicts recomputed by brute-force path enumeration, without the
/// p-state machinery. Used to re-verify search findings.
Verdicts verdict_pattern_direct(const MeasurementSystem& system, const Event& p, const Event& q);

struct TableGenerator {
  std::size_t num_configs = 3;
  std::vector<std::pair<std::string, std::size_t>> variables{{"X", 2}, {"Y", 2}};
};

enum class SeparationPattern {
  NonDisturbanceOnly,  // (1) and not (2)
  IgnoredOnly,         // (2) and not (1)
  BothWithoutExchange  // (1) and (2) and not (3)
};

std::string_view to_string(SeparationPattern pattern);

struct PatternHit {
  Event p;
  Event q;
  Verdicts verdicts;
  SeparationPattern pattern;
};

struct Finding {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  MeasurementSystem system;
  std::vector<PatternHit> hits;
};

/// Random table systems scanned for value pairs separating the criteria.
/// Every hit is re-verified with verdict_pattern_direct. Deterministic for a
/// fixed seed; trials must be at least 1.
std::vector<Finding> search_counterexamples(const TableGenerator& generator, std::uint64_t trials,
                                            std::uint64_t seed);

}  // namespace incompat
