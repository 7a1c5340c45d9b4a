#include "incompat/measure.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace incompat {

std::string_view to_string(DynamicsKind kind) {
  switch (kind) {
    case DynamicsKind::Urn: return "urn";
    case DynamicsKind::Deck: return "deck";
    case DynamicsKind::Table: return "table";
  }
  return "?";
}

std::optional<std::size_t> Variable::index_of(std::string_view value) const {
  const auto it = std::find(values.begin(), values.end(), value);
  if (it == values.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

// ---------------------------------------------------------------------------
// Configuration

Configuration::Configuration(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [item, count] : entries) {
    if (count == 0) continue;
    if (!entries_.empty() && entries_.back().first == item) {
      entries_.back().second += count;
    } else {
      entries_.emplace_back(item, count);
    }
  }
}

std::uint64_t Configuration::total() const {
  std::uint64_t n = 0;
  for (const auto& e : entries_) n += e.second;
  return n;
}

std::uint64_t Configuration::count(std::size_t item) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{item, 0});
  return (it != entries_.end() && it->first == item) ? it->second : 0;
}

bool Configuration::is_submultiset_of(const Configuration& other) const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.second <= other.count(e.first); });
}

Configuration Configuration::without_one(std::size_t item) const {
  Configuration out;
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (e.first != item) {
      out.entries_.push_back(e);
    } else if (e.second > 1) {
      out.entries_.emplace_back(e.first, e.second - 1);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Events

Event Event::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument("event must look like Variable:Value, got '" + std::string(text) + "'");
  }
  return Event{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
}

std::vector<Event> parse_events(std::string_view text) {
  std::vector<Event> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(Event::parse(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MeasurementSystem

MeasurementSystem::MeasurementSystem(DynamicsKind dynamics, std::vector<Variable> variables,
                                     std::vector<Item> items, Configuration population,
                                     std::vector<Configuration> initial, std::optional<ReplacementRule> rule,
                                     std::optional<TableLaw> table)
    : dynamics_(dynamics),
      variables_(std::move(variables)),
      items_(std::move(items)),
      population_(std::move(population)),
      initial_(std::move(initial)),
      rule_(std::move(rule)),
      table_(std::move(table)) {
  validate_variables();
  validate_items();

  if (population_.empty()) throw ValidationError("population is empty");
  for (const auto& [item, count] : population_.entries()) {
    if (item >= items_.size()) throw ValidationError("population refers to unknown item");
  }
  if (initial_.empty()) throw ValidationError("no initial configuration");
  for (const auto& c : initial_) {
    if (c.empty()) throw ValidationError("initial configuration is empty");
    if (!c.is_submultiset_of(population_)) {
      throw ValidationError("initial configuration " + describe(c) + " is not part of the population");
    }
  }
  std::sort(initial_.begin(), initial_.end());
  initial_.erase(std::unique(initial_.begin(), initial_.end()), initial_.end());

  if (dynamics_ == DynamicsKind::Deck) {
    if (!rule_) throw ValidationError("deck dynamics needs a replacement rule");
    const std::size_t v = variable_index(rule_->variable);
    if (variables_[v].is_coarse()) throw ValidationError("replacement rule must consult a base variable");
    std::sort(rule_->replace_on.begin(), rule_->replace_on.end());
    rule_->replace_on.erase(std::unique(rule_->replace_on.begin(), rule_->replace_on.end()), rule_->replace_on.end());
    std::vector<bool> on(variables_[v].values.size(), false);
    for (const auto& value : rule_->replace_on) {
      const auto idx = variables_[v].index_of(value);
      if (!idx) throw ValidationError("replacement rule names unknown value '" + value + "'");
      on[*idx] = true;
    }
    replaces_.resize(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) replaces_[i] = on[items_[i].labels[v]];
  } else if (rule_) {
    throw ValidationError("replacement rule given for non-deck dynamics");
  }

  if (dynamics_ == DynamicsKind::Table) {
    validate_table();
  } else if (table_) {
    throw ValidationError("outcome/update tables given for non-table dynamics");
  }
}

void MeasurementSystem::validate_variables() const {
  if (variables_.empty()) throw ValidationError("system has no variables");
  std::set<std::string> names;
  for (const auto& var : variables_) {
    if (var.name.empty()) throw ValidationError("variable with empty name");
    if (!names.insert(var.name).second) throw ValidationError("duplicate variable '" + var.name + "'");
    if (var.values.size() < 2) throw ValidationError("variable '" + var.name + "' needs at least two values");
    std::set<std::string> seen;
    for (const auto& v : var.values) {
      if (v.empty()) throw ValidationError("variable '" + var.name + "' has an empty value label");
      if (!seen.insert(v).second) throw ValidationError("variable '" + var.name + "' repeats value '" + v + "'");
    }
    if (!var.is_coarse()) {
      if (!var.blocks.empty()) throw ValidationError("base variable '" + var.name + "' has blocks");
      continue;
    }
    const auto base = std::find_if(variables_.begin(), variables_.end(),
                                   [&](const Variable& b) { return b.name == var.coarse_of; });
    if (base == variables_.end() || base->is_coarse()) {
      throw ValidationError("coarse variable '" + var.name + "' must refine a base variable");
    }
    if (var.blocks.size() != var.values.size()) {
      throw ValidationError("coarse variable '" + var.name + "' needs one block per value");
    }
    std::vector<int> hits(base->values.size(), 0);
    for (const auto& block : var.blocks) {
      if (block.empty()) throw ValidationError("coarse variable '" + var.name + "' has an empty block");
      for (std::size_t b : block) {
        if (b >= hits.size()) throw ValidationError("coarse variable '" + var.name + "' block out of range");
        ++hits[b];
      }
    }
    if (std::any_of(hits.begin(), hits.end(), [](int h) { return h != 1; })) {
      throw ValidationError("blocks of '" + var.name + "' do not partition the values of '" + base->name + "'");
    }
  }
}

void MeasurementSystem::validate_items() {
  if (items_.empty()) throw ValidationError("system has no items");
  if (dynamics_ == DynamicsKind::Table) {
    std::set<std::string> names;
    for (const auto& item : items_) {
      if (item.name.empty()) throw ValidationError("table state with empty name");
      if (!item.labels.empty()) throw ValidationError("table states carry no labels");
      if (!names.insert(item.name).second) throw ValidationError("duplicate state '" + item.name + "'");
    }
    return;
  }

  std::vector<std::size_t> base_vars;
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (!variables_[v].is_coarse()) base_vars.push_back(v);
  }
  std::set<std::vector<std::size_t>> seen;
  for (auto& item : items_) {
    std::vector<std::size_t> full(variables_.size(), 0);
    if (item.labels.size() == base_vars.size()) {
      for (std::size_t k = 0; k < base_vars.size(); ++k) full[base_vars[k]] = item.labels[k];
    } else if (item.labels.size() == variables_.size()) {
      full = item.labels;
    } else {
      throw ValidationError("item needs exactly one label per base variable");
    }
    for (std::size_t v : base_vars) {
      if (full[v] >= variables_[v].values.size()) throw ValidationError("item label out of range");
    }
    for (std::size_t v = 0; v < variables_.size(); ++v) {
      const auto& var = variables_[v];
      if (!var.is_coarse()) continue;
      const std::size_t base = variable_index(var.coarse_of);
      for (std::size_t c = 0; c < var.blocks.size(); ++c) {
        if (std::find(var.blocks[c].begin(), var.blocks[c].end(), full[base]) != var.blocks[c].end()) {
          if (item.labels.size() == variables_.size() && item.labels[v] != c) {
            throw ValidationError("item coarse label disagrees with its base label");
          }
          full[v] = c;
        }
      }
    }
    item.labels = std::move(full);
    if (!seen.insert(item.labels).second) throw ValidationError("duplicate item kind");
    if (item.name.empty()) {
      for (std::size_t v : base_vars) {
        if (!item.name.empty()) item.name += '-';
        item.name += variables_[v].values[item.labels[v]];
      }
    }
  }
}

void MeasurementSystem::validate_table() const {
  if (!table_) throw ValidationError("table dynamics needs outcome and update tables");
  for (const auto& var : variables_) {
    if (var.is_coarse()) throw ValidationError("coarse variables are not supported by table dynamics");
  }
  for (const auto& [item, count] : population_.entries()) {
    if (count != 1) throw ValidationError("table population lists each state once");
  }
  if (population_.entries().size() != items_.size()) throw ValidationError("table population must list every state");
  for (const auto& c : initial_) {
    if (c.total() != 1) throw ValidationError("table configurations are single states");
  }
  const auto& t = *table_;
  if (t.outcome.size() != items_.size() || t.update.size() != items_.size()) {
    throw ValidationError("tables need one row per state");
  }
  for (std::size_t s = 0; s < items_.size(); ++s) {
    if (t.outcome[s].size() != variables_.size() || t.update[s].size() != variables_.size()) {
      throw ValidationError("tables need one entry per variable for state '" + items_[s].name + "'");
    }
    for (std::size_t v = 0; v < variables_.size(); ++v) {
      const auto& row = t.outcome[s][v];
      const auto& upd = t.update[s][v];
      if (row.size() != variables_[v].values.size() || upd.size() != row.size()) {
        throw ValidationError("table row size mismatch at state '" + items_[s].name + "', variable '" +
                              variables_[v].name + "'");
      }
      Rational sum;
      for (const auto& p : row) {
        if (p < Rational(0) || p > Rational(1)) throw ValidationError("outcome probability outside [0, 1]");
        sum += p;
      }
      if (sum != Rational(1)) {
        throw ValidationError("outcome row of state '" + items_[s].name + "', variable '" + variables_[v].name +
                              "' sums to " + sum.str());
      }
      for (std::size_t target : upd) {
        if (target >= items_.size()) throw ValidationError("update table refers to unknown state");
      }
    }
  }
}

std::size_t MeasurementSystem::variable_index(std::string_view name) const {
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (variables_[v].name == name) return v;
  }
  throw UnknownVariable("unknown variable '" + std::string(name) + "'");
}

ResolvedEvent MeasurementSystem::resolve(const Event& event) const {
  const std::size_t v = variable_index(event.variable);
  const auto value = variables_[v].index_of(event.value);
  if (!value) throw UnknownValue("variable '" + event.variable + "' has no value '" + event.value + "'");
  return {v, *value};
}

Event MeasurementSystem::event_of(ResolvedEvent e) const {
  return Event{variables_[e.variable].name, variables_[e.variable].values[e.value]};
}

bool MeasurementSystem::replaces(std::size_t item) const {
  return dynamics_ == DynamicsKind::Deck && replaces_[item];
}

std::vector<Event> MeasurementSystem::all_events() const {
  std::vector<Event> out;
  for (const auto& var : variables_) {
    for (const auto& value : var.values) out.push_back(Event{var.name, value});
  }
  return out;
}

std::string MeasurementSystem::describe(const Configuration& config) const {
  std::string out = "{";
  bool first = true;
  for (const auto& [item, count] : config.entries()) {
    if (!first) out += ", ";
    first = false;
    out += item < items_.size() ? items_[item].name : "#" + std::to_string(item);
    if (count > 1) out += " x" + std::to_string(count);
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// PState

PState::PState(std::map<Configuration, Rational> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("p-state has no support");
  Rational sum;
  for (const auto& [config, w] : weights_) {
    if (w <= Rational(0)) throw ValidationError("p-state weight must be positive");
    sum += w;
  }
  if (sum != Rational(1)) throw ValidationError("p-state weights sum to " + sum.str());
}

PState PState::point(Configuration config) {
  return PState(std::map<Configuration, Rational>{{std::move(config), Rational(1)}});
}

PState PState::mixture(const Rational& lambda, const PState& a, const PState& b) {
  if (lambda <= Rational(0) || lambda >= Rational(1)) throw std::invalid_argument("mixture weight must be in (0, 1)");
  std::map<Configuration, Rational> w;
  for (const auto& [c, p] : a.weights_) w[c] += lambda * p;
  for (const auto& [c, p] : b.weights_) w[c] += (Rational(1) - lambda) * p;
  return PState(std::move(w));
}

PState initial_state(const MeasurementSystem& system) {
  std::map<Configuration, Rational> w;
  const auto n = static_cast<std::int64_t>(system.initial().size());
  for (const auto& c : system.initial()) w[c] = Rational(1, n);
  return PState(std::move(w));
}

// ---------------------------------------------------------------------------
// Measurement

namespace {

using Measure = std::map<Configuration, Rational>;

Configuration urn_class(const MeasurementSystem& system, ResolvedEvent event) {
  std::vector<Configuration::Entry> entries;
  for (const auto& [item, count] : system.population().entries()) {
    if (system.label(item, event.variable) == event.value) entries.emplace_back(item, count);
  }
  return Configuration(std::move(entries));
}

Configuration table_state(std::size_t state) { return Configuration({{state, 1}}); }

std::size_t table_state_of(const Configuration& config) {
  if (config.total() != 1) throw ValidationError("table configuration must hold exactly one state");
  return config.entries().front().first;
}

// Sub-probability measure after measuring `event` on every configuration of `in`.
Measure push_forward(const MeasurementSystem& system, const Measure& in, ResolvedEvent event) {
  Measure out;
  for (const auto& [config, w] : in) {
    for (auto& b : manifest(system, config, event)) out[std::move(b.next)] += w * b.weight;
  }
  return out;
}

Rational mass(const Measure& m) {
  Rational sum;
  for (const auto& [c, w] : m) sum += w;
  return sum;
}

}  // namespace

std::vector<Branch> manifest(const MeasurementSystem& system, const Configuration& config, ResolvedEvent event) {
  if (config.empty()) throw EmptyPool("measurement on an empty pool");

  switch (system.dynamics()) {
    case DynamicsKind::Urn: {
      std::uint64_t hits = 0;
      for (const auto& [item, count] : config.entries()) {
        if (system.label(item, event.variable) == event.value) hits += count;
      }
      if (hits == 0) return {};
      return {Branch{Rational(static_cast<std::int64_t>(hits), static_cast<std::int64_t>(config.total())),
                     urn_class(system, event)}};
    }
    case DynamicsKind::Deck: {
      const auto total = static_cast<std::int64_t>(config.total());
      std::map<Configuration, Rational> merged;
      for (const auto& [item, count] : config.entries()) {
        if (system.label(item, event.variable) != event.value) continue;
        Configuration next = system.replaces(item) ? config : config.without_one(item);
        merged[std::move(next)] += Rational(static_cast<std::int64_t>(count), total);
      }
      std::vector<Branch> out;
      out.reserve(merged.size());
      for (auto& [next, w] : merged) out.push_back(Branch{w, next});
      return out;
    }
    case DynamicsKind::Table: {
      const std::size_t s = table_state_of(config);
      const auto& law = *system.table();
      const Rational& p = law.outcome[s][event.variable][event.value];
      if (p.is_zero()) return {};
      return {Branch{p, table_state(law.update[s][event.variable][event.value])}};
    }
  }
  return {};
}

std::map<std::string, Rational> outcome_distribution(const MeasurementSystem& system, const Configuration& config,
                                                     std::string_view variable) {
  const std::size_t v = system.variable_index(variable);
  if (config.empty()) throw EmptyPool("measurement on an empty pool");
  const auto& var = system.variables()[v];
  std::map<std::string, Rational> out;
  if (system.dynamics() == DynamicsKind::Table) {
    const auto& row = system.table()->outcome[table_state_of(config)][v];
    for (std::size_t k = 0; k < var.values.size(); ++k) out[var.values[k]] = row[k];
    return out;
  }
  std::vector<std::uint64_t> hits(var.values.size(), 0);
  for (const auto& [item, count] : config.entries()) hits[system.label(item, v)] += count;
  const auto total = static_cast<std::int64_t>(config.total());
  for (std::size_t k = 0; k < var.values.size(); ++k) {
    out[var.values[k]] = Rational(static_cast<std::int64_t>(hits[k]), total);
  }
  return out;
}

Configuration update_config(const MeasurementSystem& system, const Configuration& config, const Event& event,
                            std::optional<std::size_t> drawn) {
  const ResolvedEvent e = system.resolve(event);
  switch (system.dynamics()) {
    case DynamicsKind::Urn:
      return urn_class(system, e);
    case DynamicsKind::Table: {
      const std::size_t s = table_state_of(config);
      return table_state(system.table()->update[s][e.variable][e.value]);
    }
    case DynamicsKind::Deck: break;
  }

  if (drawn) {
    if (config.count(*drawn) == 0) throw std::invalid_argument("drawn item is not in the configuration");
    if (system.label(*drawn, e.variable) != e.value) {
      throw std::invalid_argument("drawn item does not carry " + event.str());
    }
    return system.replaces(*drawn) ? config : config.without_one(*drawn);
  }
  std::optional<Configuration> result;
  for (const auto& [item, count] : config.entries()) {
    if (system.label(item, e.variable) != e.value) continue;
    Configuration next = system.replaces(item) ? config : config.without_one(item);
    if (result && *result != next) {
      throw AmbiguousDraw("several items report " + event.str() + " with different effects; name the drawn item");
    }
    result = std::move(next);
  }
  if (!result) throw std::invalid_argument("no item in the configuration carries " + event.str());
  return *result;
}

FilterResult filter_event(const MeasurementSystem& system, const PState& sigma, const Event& event) {
  Measure out = push_forward(system, sigma.weights(), system.resolve(event));
  const Rational prob = mass(out);
  if (prob.is_zero()) return {prob, std::nullopt};
  for (auto& [c, w] : out) w /= prob;
  std::erase_if(out, [](const auto& kv) { return kv.second.is_zero(); });
  return {prob, PState(std::move(out))};
}

Rational sequence_prob(const MeasurementSystem& system, const PState& sigma, std::span<const Event> events) {
  if (events.empty()) throw std::invalid_argument("sequence_prob needs at least one event");
  std::vector<ResolvedEvent> resolved;
  resolved.reserve(events.size());
  for (const auto& e : events) resolved.push_back(system.resolve(e));

  Measure m = sigma.weights();
  for (const auto& e : resolved) {
    m = push_forward(system, m, e);
    if (m.empty()) return Rational(0);
  }
  return mass(m);
}

Rational conditional_prob(const MeasurementSystem& system, const PState& sigma, const Event& target,
                          std::span<const Event> conditions) {
  if (conditions.empty()) return sequence_prob(system, sigma, std::span(&target, 1));
  const Rational denom = sequence_prob(system, sigma, conditions);
  if (denom.is_zero()) throw ZeroCondition("conditions have probability zero");
  std::vector<Event> joint(conditions.begin(), conditions.end());
  joint.push_back(target);
  return sequence_prob(system, sigma, joint) / denom;
}

std::vector<Configuration> reachable_configs(const MeasurementSystem& system, PreparationDomain domain) {
  if (domain == PreparationDomain::AllSubmultisets) {
    std::vector<Configuration> out;
    if (system.dynamics() == DynamicsKind::Table) {
      for (std::size_t s = 0; s < system.items().size(); ++s) out.push_back(table_state(s));
      return out;
    }
    const auto pop = system.population().entries();
    std::vector<Configuration::Entry> current;
    // Odometer over per-item counts 0..population count.
    std::vector<std::uint64_t> counts(pop.size(), 0);
    while (true) {
      std::size_t k = 0;
      while (k < pop.size() && counts[k] == pop[k].second) counts[k++] = 0;
      if (k == pop.size()) break;
      ++counts[k];
      current.clear();
      for (std::size_t i = 0; i < pop.size(); ++i) current.emplace_back(pop[i].first, counts[i]);
      out.emplace_back(current);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::set<Configuration> seen(system.initial().begin(), system.initial().end());
  std::deque<Configuration> frontier(system.initial().begin(), system.initial().end());
  const auto events = system.all_events();
  std::vector<ResolvedEvent> resolved;
  for (const auto& e : events) resolved.push_back(system.resolve(e));
  while (!frontier.empty()) {
    const Configuration config = std::move(frontier.front());
    frontier.pop_front();
    for (const auto& e : resolved) {
      for (auto& b : manifest(system, config, e)) {
        if (b.next.empty()) continue;
        if (seen.insert(b.next).second) frontier.push_back(std::move(b.next));
      }
    }
  }
  return {seen.begin(), seen.end()};
}

}  // namespace incompat
