#include "incompat/compat.hpp"

#include "incompat/catalog.hpp"
#include "incompat/seeding.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <stdexcept>

namespace incompat {

std::string_view to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::NonDisturbance: return "NonDisturbance";
    case CriterionKind::IgnoredMeasurement: return "IgnoredMeasurement";
    case CriterionKind::OrderExchange: return "OrderExchange";
  }
  return "?";
}

std::optional<CriterionKind> criterion_from_string(std::string_view name) {
  for (auto k : {CriterionKind::NonDisturbance, CriterionKind::IgnoredMeasurement, CriterionKind::OrderExchange}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(SeparationPattern pattern) {
  switch (pattern) {
    case SeparationPattern::NonDisturbanceOnly: return "(1) and not (2)";
    case SeparationPattern::IgnoredOnly: return "(2) and not (1)";
    case SeparationPattern::BothWithoutExchange: return "(1) and (2) and not (3)";
  }
  return "?";
}

std::string pattern_string(const Verdicts& v) {
  auto mark = [](bool b, const char* n) { return std::string(b ? "" : "not ") + n; };
  return mark(v.nondisturbance, "(1)") + ", " + mark(v.ignored, "(2)") + ", " + mark(v.order_exchange, "(3)");
}

// ---------------------------------------------------------------------------
// Criterion sides

Sides order_exchange_sides(const MeasurementSystem& system, const PState& sigma, const Event& p, const Event& q) {
  const std::array<Event, 2> pq{p, q};
  const std::array<Event, 2> qp{q, p};
  return {sequence_prob(system, sigma, pq), sequence_prob(system, sigma, qp)};
}

std::optional<Sides> nondisturbance_sides(const MeasurementSystem& system, const PState& sigma, const Event& p,
                                          const Event& q) {
  const std::array<Event, 2> pq{p, q};
  const Rational joint = sequence_prob(system, sigma, pq);
  if (joint.is_zero()) return std::nullopt;
  const std::array<Event, 3> pqp{p, q, p};
  return Sides{sequence_prob(system, sigma, pqp) / joint, Rational(1)};
}

Sides ignored_sides(const MeasurementSystem& system, const PState& sigma, const Event& p, std::string_view ignored) {
  const auto& var = system.variable(ignored);
  Rational sum;
  for (const auto& value : var.values) {
    const std::array<Event, 2> sp{Event{var.name, value}, p};
    sum += sequence_prob(system, sigma, sp);
  }
  return {sum, sequence_prob(system, sigma, std::span(&p, 1))};
}

// ---------------------------------------------------------------------------
// Criterion checks

namespace {

// Runs `sides` on each point state of the domain, in canonical order. `sides`
// returns nullopt for preparations that do not qualify.
template <typename SidesFn>
void scan(const MeasurementSystem& system, const AnalysisOptions& options, CriterionReport& report, SidesFn sides) {
  std::size_t qualified = 0;
  for (const auto& config : reachable_configs(system, options.domain)) {
    std::optional<Sides> s;
    try {
      s = sides(PState::point(config));
    } catch (const EmptyPool&) {
      continue;
    }
    if (!s) continue;
    ++qualified;
    if (s->left != s->right) {
      report.holds = false;
      report.witness = Witness{config, s->left, s->right};
      return;
    }
  }
  report.vacuous = qualified == 0;
}

}  // namespace

CriterionReport check_order_exchange(const MeasurementSystem& system, const Event& p, const Event& q,
                                     const AnalysisOptions& options) {
  system.resolve(p);
  system.resolve(q);
  CriterionReport report{CriterionKind::OrderExchange, p, q};
  scan(system, options, report,
       [&](const PState& s) -> std::optional<Sides> { return order_exchange_sides(system, s, p, q); });
  return report;
}

CriterionReport check_nondisturbance(const MeasurementSystem& system, const Event& p, const Event& q,
                                     const AnalysisOptions& options) {
  system.resolve(p);
  system.resolve(q);
  CriterionReport report{CriterionKind::NonDisturbance, p, q};
  scan(system, options, report, [&](const PState& s) { return nondisturbance_sides(system, s, p, q); });
  return report;
}

CriterionReport check_ignored(const MeasurementSystem& system, const Event& p, std::string_view ignored,
                              const AnalysisOptions& options) {
  system.resolve(p);
  CriterionReport report{CriterionKind::IgnoredMeasurement, p, system.variable(ignored).name};
  scan(system, options, report,
       [&](const PState& s) -> std::optional<Sides> { return ignored_sides(system, s, p, ignored); });
  return report;
}

bool witness_valid(const MeasurementSystem& system, const CriterionReport& report) {
  if (report.holds != !report.witness.has_value()) return false;
  if (!report.witness) return true;
  const auto& w = *report.witness;
  if (w.left == w.right) return false;
  const PState sigma = PState::point(w.config);
  std::optional<Sides> s;
  switch (report.kind) {
    case CriterionKind::OrderExchange:
      s = order_exchange_sides(system, sigma, report.p, std::get<Event>(report.q));
      break;
    case CriterionKind::NonDisturbance:
      s = nondisturbance_sides(system, sigma, report.p, std::get<Event>(report.q));
      break;
    case CriterionKind::IgnoredMeasurement:
      s = ignored_sides(system, sigma, report.p, std::get<std::string>(report.q));
      break;
  }
  return s && s->left == w.left && s->right == w.right;
}

CompatibilityMatrix compatibility_matrix(const MeasurementSystem& system, std::string_view a, std::string_view b,
                                         const AnalysisOptions& options) {
  const auto& va = system.variable(a);
  const auto& vb = system.variable(b);
  CompatibilityMatrix m{va.name, vb.name, {}, true};
  for (const auto& x : va.values) {
    auto& row = m.cells.emplace_back();
    for (const auto& y : vb.values) {
      row.push_back(check_order_exchange(system, Event{va.name, x}, Event{vb.name, y}, options));
      m.all_hold = m.all_hold && row.back().holds;
    }
  }
  return m;
}

std::vector<RepeatabilityEntry> repeatability_check(const MeasurementSystem& system, std::string_view variable,
                                                    const AnalysisOptions& options) {
  const auto& var = system.variable(variable);
  const auto domain = reachable_configs(system, options.domain);
  std::vector<RepeatabilityEntry> out;
  for (const auto& given : var.values) {
    for (const auto& target : var.values) {
      RepeatabilityEntry entry{given, target};
      const Event g{var.name, given};
      const Rational expected(given == target ? 1 : 0);
      std::size_t qualified = 0;
      for (const auto& config : domain) {
        const PState sigma = PState::point(config);
        Rational value;
        try {
          if (sequence_prob(system, sigma, std::span(&g, 1)).is_zero()) continue;
          value = conditional_prob(system, sigma, Event{var.name, target}, std::span(&g, 1));
        } catch (const EmptyPool&) {
          continue;
        }
        ++qualified;
        if (value != expected) {
          entry.holds = false;
          entry.witness = Witness{config, value, expected};
          break;
        }
      }
      entry.vacuous = qualified == 0;
      out.push_back(std::move(entry));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interference and sharpness

InterferenceRecord interference_deficit(const MeasurementSystem& system, const PState& sigma, const Event& coarse,
                                        const std::vector<Event>& fine, const std::optional<Event>& follow) {
  const ResolvedEvent c = system.resolve(coarse);
  const auto& cvar = system.variables()[c.variable];
  if (!cvar.is_coarse()) throw BlockMismatch("'" + cvar.name + "' is not a coarse variable");
  std::set<std::string> expected;
  const auto& base = system.variable(cvar.coarse_of);
  for (std::size_t b : cvar.blocks[c.value]) expected.insert(base.values[b]);
  std::set<std::string> given;
  for (const auto& f : fine) {
    if (f.variable != base.name) throw BlockMismatch("fine event " + f.str() + " is not an event of '" + base.name + "'");
    system.resolve(f);
    given.insert(f.value);
  }
  if (given != expected || given.size() != fine.size()) {
    throw BlockMismatch("fine events do not match the block of " + coarse.str());
  }

  auto path = [&](const Event& first) {
    std::vector<Event> seq{first};
    if (follow) seq.push_back(*follow);
    return sequence_prob(system, sigma, seq);
  };
  InterferenceRecord rec{sigma, coarse, fine, follow, path(coarse), Rational(0), Rational(0)};
  for (const auto& f : fine) rec.fine_sum += path(f);
  rec.deficit = rec.coarse_path - rec.fine_sum;
  return rec;
}

std::vector<SharpnessEntry> sharpness_audit(const MeasurementSystem& system, const AnalysisOptions& options) {
  std::vector<SharpnessEntry> out;
  for (const auto& config : reachable_configs(system, options.domain)) {
    SharpnessEntry entry{config, {}, true};
    for (const auto& var : system.variables()) {
      std::optional<std::string> sharp;
      for (const auto& [value, prob] : outcome_distribution(system, config, var.name)) {
        if (prob == Rational(1)) sharp = value;
      }
      if (!var.is_coarse() && !sharp) entry.sharp_in_all_base = false;
      entry.sharp.push_back(std::move(sharp));
    }
    out.push_back(std::move(entry));
  }
  return out;
}

bool filter_repeatable(const MeasurementSystem& system, const Event& event, const AnalysisOptions& options) {
  for (const auto& config : reachable_configs(system, options.domain)) {
    try {
      const auto once = filter_event(system, PState::point(config), event);
      if (!once.conditioned) continue;
      const auto twice = filter_event(system, *once.conditioned, event);
      if (twice.prob != Rational(1) || twice.conditioned != once.conditioned) return false;
    } catch (const EmptyPool&) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Relation audit

Verdicts verdict_pattern(const MeasurementSystem& system, const Event& p, const Event& q,
                         const AnalysisOptions& options) {
  return Verdicts{check_nondisturbance(system, p, q, options).holds,
                  check_ignored(system, p, q.variable, options).holds,
                  check_order_exchange(system, p, q, options).holds};
}

RelationAudit relation_audit(const MeasurementSystem& system, const AnalysisOptions& options) {
  RelationAudit audit;
  const auto events = system.all_events();
  std::map<std::pair<Event, Event>, bool> exchange;
  auto oe = [&](const Event& p, const Event& q) {
    auto [it, fresh] = exchange.try_emplace({p, q}, false);
    if (fresh) it->second = check_order_exchange(system, p, q, options).holds;
    return it->second;
  };
  std::map<Event, bool> repeatable;
  for (const auto& e : events) repeatable[e] = filter_repeatable(system, e, options);

  for (const auto& p : events) {
    for (const auto& q : events) {
      if (p.variable == q.variable) continue;
      PairAudit pa{p, q};
      pa.verdicts.nondisturbance = check_nondisturbance(system, p, q, options).holds;
      pa.verdicts.ignored = check_ignored(system, p, q.variable, options).holds;
      pa.verdicts.order_exchange = oe(p, q);
      pa.order_exchange_all_k = true;
      for (const auto& value : system.variable(q.variable).values) {
        pa.order_exchange_all_k = pa.order_exchange_all_k && oe(p, Event{q.variable, value});
      }
      pa.p_filter_repeatable = repeatable[p];

      if (pa.verdicts.order_exchange && pa.p_filter_repeatable) {
        ++audit.implications_checked;
        if (!pa.verdicts.nondisturbance) {
          audit.violations.push_back("OrderExchange(" + p.str() + ", " + q.str() + ") without NonDisturbance");
        }
      }
      if (pa.order_exchange_all_k) {
        ++audit.implications_checked;
        if (!pa.verdicts.ignored) {
          audit.violations.push_back("OrderExchange(" + p.str() + ", all of " + q.variable +
                                     ") without IgnoredMeasurement");
        }
      }
      audit.pairs.push_back(std::move(pa));
    }
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Direct enumeration

namespace {

// Probability of an event sequence from one configuration, enumerating every
// individual draw.
Rational direct_sequence(const MeasurementSystem& system, const Configuration& config,
                         std::span<const ResolvedEvent> events) {
  if (events.empty()) return Rational(1);
  if (config.empty()) throw EmptyPool("measurement on an empty pool");
  const ResolvedEvent e = events.front();
  const auto rest = events.subspan(1);

  if (system.dynamics() == DynamicsKind::Table) {
    const std::size_t s = config.entries().front().first;
    const auto& law = *system.table();
    const Rational& p = law.outcome[s][e.variable][e.value];
    if (p.is_zero()) return Rational(0);
    return p * direct_sequence(system, Configuration({{law.update[s][e.variable][e.value], 1}}), rest);
  }

  const auto total = static_cast<std::int64_t>(config.total());
  Rational sum;
  for (const auto& [item, count] : config.entries()) {
    if (system.items()[item].labels[e.variable] != e.value) continue;
    Configuration next;
    if (system.dynamics() == DynamicsKind::Urn) {
      std::vector<Configuration::Entry> pool;
      for (const auto& [other, n] : system.population().entries()) {
        if (system.items()[other].labels[e.variable] == e.value) pool.emplace_back(other, n);
      }
      next = Configuration(std::move(pool));
    } else {
      next = system.replaces(item) ? config : config.without_one(item);
    }
    sum += Rational(static_cast<std::int64_t>(count), total) * direct_sequence(system, next, rest);
  }
  return sum;
}

}  // namespace

Verdicts verdict_pattern_direct(const MeasurementSystem& system, const Event& p, const Event& q) {
  const ResolvedEvent rp = system.resolve(p);
  const ResolvedEvent rq = system.resolve(q);
  auto seq = [&](const Configuration& c, std::initializer_list<ResolvedEvent> es) {
    return direct_sequence(system, c, std::span(es.begin(), es.size()));
  };
  Verdicts v{true, true, true};
  for (const auto& config : reachable_configs(system)) {
    try {
      const Rational pq = seq(config, {rp, rq});
      if (!pq.is_zero() && seq(config, {rp, rq, rp}) != pq) v.nondisturbance = false;
    } catch (const EmptyPool&) {
    }
    try {
      if (seq(config, {rp, rq}) != seq(config, {rq, rp})) v.order_exchange = false;
    } catch (const EmptyPool&) {
    }
    try {
      Rational sum;
      for (std::size_t s = 0; s < system.variables()[rq.variable].values.size(); ++s) {
        sum += seq(config, {ResolvedEvent{rq.variable, s}, rp});
      }
      if (sum != seq(config, {rp})) v.ignored = false;
    } catch (const EmptyPool&) {
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Counterexample search

std::vector<Finding> search_counterexamples(const TableGenerator& generator, std::uint64_t trials,
                                            std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("search needs at least one trial");
  std::vector<Finding> findings;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t sub = derive_seed(seed, t);
    MeasurementSystem system = random_table_system(generator.num_configs, generator.variables, sub);
    std::vector<PatternHit> hits;
    for (const auto& p : system.all_events()) {
      for (const auto& q : system.all_events()) {
        if (p.variable == q.variable) continue;
        const Verdicts v = verdict_pattern(system, p, q);
        std::optional<SeparationPattern> pattern;
        if (v.nondisturbance && !v.ignored) pattern = SeparationPattern::NonDisturbanceOnly;
        if (v.ignored && !v.nondisturbance) pattern = SeparationPattern::IgnoredOnly;
        if (v.nondisturbance && v.ignored && !v.order_exchange) pattern = SeparationPattern::BothWithoutExchange;
        if (!pattern) continue;
        if (verdict_pattern_direct(system, p, q) != v) {
          throw std::logic_error("search finding failed re-verification for " + p.str() + ", " + q.str());
        }
        hits.push_back(PatternHit{p, q, v, *pattern});
      }
    }
    if (!hits.empty()) findings.push_back(Finding{t, sub, std::move(system), std::move(hits)});
  }
  return findings;
}

}  // namespace incompat
