#include "incompat/catalog.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace incompat {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Builtin systems

MeasurementSystem build_card_deck(DeckRule rule) {
  std::vector<Variable> vars{{"Face", {"King", "Queen"}}, {"Suit", {"Hearts", "Spades"}}};
  std::vector<Item> items;
  std::vector<Configuration::Entry> deck;
  for (std::size_t face = 0; face < 2; ++face) {
    for (std::size_t suit = 0; suit < 2; ++suit) {
      items.push_back(Item{vars[0].values[face] + "-" + vars[1].values[suit], {face, suit}});
      deck.emplace_back(items.size() - 1, 1);
    }
  }
  ReplacementRule r{"Suit", {}};
  if (rule == DeckRule::SpadesReplace) r.replace_on = {"Spades"};
  if (rule == DeckRule::AlwaysReplace) r.replace_on = {"Hearts", "Spades"};
  Configuration full(deck);
  return MeasurementSystem(DynamicsKind::Deck, std::move(vars), std::move(items), full, {full}, std::move(r));
}

MeasurementSystem build_urn_example(bool include_colorblind) {
  std::vector<Variable> vars{{"Color", {"Yellow", "Green", "Blue"}}, {"Pattern", {"Plain", "Dotted", "Striped"}}};
  if (include_colorblind) vars.push_back(Variable{"ColorBlind", {"Yellow", "Grue"}, "Color", {{0}, {1, 2}}});
  constexpr std::uint64_t counts[3][3] = {{2, 1, 0}, {1, 1, 1}, {0, 2, 1}};
  std::vector<Item> items;
  std::vector<Configuration::Entry> pop;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < 3; ++p) {
      if (counts[c][p] == 0) continue;
      items.push_back(Item{"", {c, p}});
      pop.emplace_back(items.size() - 1, counts[c][p]);
    }
  }
  Configuration full(pop);
  return MeasurementSystem(DynamicsKind::Urn, std::move(vars), std::move(items), full, {full});
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"urn", "card", "deck-replace", "deck-discard"};
  return names;
}

MeasurementSystem build_builtin(std::string_view name) {
  if (name == "urn") return build_urn_example(true);
  if (name == "card") return build_card_deck(DeckRule::SpadesReplace);
  if (name == "deck-replace") return build_card_deck(DeckRule::AlwaysReplace);
  if (name == "deck-discard") return build_card_deck(DeckRule::AlwaysDiscard);
  throw std::invalid_argument("unknown builtin system '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Schema helpers

namespace {

std::string child(const std::string& path, std::string_view key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') escaped += "~0";
    else if (c == '/') escaped += "~1";
    else escaped += c;
  }
  return path + "/" + escaped;
}

std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SpecError(path.empty() ? "/" : path, "expected an object");
  return j;
}

const json& require_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SpecError(path.empty() ? "/" : path, "expected an array");
  return j;
}

std::string require_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SpecError(path, "expected a string");
  auto s = j.get<std::string>();
  if (s.empty()) throw SpecError(path, "expected a non-empty string");
  return s;
}

const json& field(const json& obj, std::string_view key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SpecError(child(path, key), "missing required field");
  return *it;
}

void only_fields(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SpecError(child(path, key), "unknown field");
    }
  }
}

std::string integer_string(const json& j, const std::string& path) {
  const std::string s = require_string(j, path);
  const std::size_t start = (s[0] == '-') ? 1 : 0;
  if (start == s.size() || !std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                                        [](char c) { return c >= '0' && c <= '9'; })) {
    throw SpecError(path, "expected a decimal integer string");
  }
  return s;
}

std::vector<std::size_t> base_variable_indices(const MeasurementSystem& system) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < system.variables().size(); ++v) {
    if (!system.variables()[v].is_coarse()) out.push_back(v);
  }
  return out;
}

struct ParsedVariables {
  std::vector<Variable> vars;
  std::vector<std::size_t> base;
};

ParsedVariables parse_variables(const json& doc) {
  const std::string path = "/variables";
  const json& arr = require_array(field(doc, "variables", ""), path);
  if (arr.empty()) throw SpecError(path, "at least one variable is required");
  ParsedVariables out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string vp = child(path, i);
    const json& v = require_object(arr[i], vp);
    only_fields(v, {"name", "values", "coarse_of", "blocks"}, vp);
    Variable var;
    var.name = require_string(field(v, "name", vp), child(vp, "name"));
    const json& values = require_array(field(v, "values", vp), child(vp, "values"));
    for (std::size_t k = 0; k < values.size(); ++k) {
      var.values.push_back(require_string(values[k], child(child(vp, "values"), k)));
    }
    if (var.values.size() < 2) throw SpecError(child(vp, "values"), "a variable needs at least two values");
    if (std::set<std::string>(var.values.begin(), var.values.end()).size() != var.values.size()) {
      throw SpecError(child(vp, "values"), "values must be distinct");
    }
    const bool has_coarse = v.contains("coarse_of");
    if (has_coarse != v.contains("blocks")) {
      throw SpecError(vp, "'coarse_of' and 'blocks' must appear together");
    }
    if (has_coarse) var.coarse_of = require_string(v["coarse_of"], child(vp, "coarse_of"));
    out.vars.push_back(std::move(var));
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    auto& var = out.vars[i];
    if (!var.is_coarse()) {
      out.base.push_back(i);
      continue;
    }
    const std::string vp = child(path, i);
    const auto base = std::find_if(out.vars.begin(), out.vars.end(),
                                   [&](const Variable& b) { return b.name == var.coarse_of; });
    if (base == out.vars.end() || base->is_coarse()) {
      throw SpecError(child(vp, "coarse_of"), "must name a base variable");
    }
    const std::string bp = child(vp, "blocks");
    const json& blocks = require_object(arr[i]["blocks"], bp);
    std::vector<int> hits(base->values.size(), 0);
    var.blocks.assign(var.values.size(), {});
    for (const auto& [coarse, members] : blocks.items()) {
      const auto ci = var.index_of(coarse);
      if (!ci) throw SpecError(child(bp, coarse), "not a value of '" + var.name + "'");
      require_array(members, child(bp, coarse));
      for (std::size_t m = 0; m < members.size(); ++m) {
        const std::string mp = child(child(bp, coarse), m);
        const auto bi = base->index_of(require_string(members[m], mp));
        if (!bi) throw SpecError(mp, "not a value of '" + base->name + "'");
        var.blocks[*ci].push_back(*bi);
        ++hits[*bi];
      }
    }
    for (std::size_t c = 0; c < var.blocks.size(); ++c) {
      if (var.blocks[c].empty()) throw SpecError(bp, "value '" + var.values[c] + "' has no block");
      std::sort(var.blocks[c].begin(), var.blocks[c].end());
    }
    for (std::size_t b = 0; b < hits.size(); ++b) {
      if (hits[b] == 0) throw SpecError(bp, "blocks omit base value '" + base->values[b] + "'");
      if (hits[b] > 1) throw SpecError(bp, "base value '" + base->values[b] + "' appears in several blocks");
    }
  }
  return out;
}

// Label vector (base variables only) of an item object; reads "count" too.
std::pair<std::vector<std::size_t>, std::uint64_t> parse_labelled_item(const ParsedVariables& pv, const json& j,
                                                                      const std::string& path) {
  require_object(j, path);
  std::vector<std::size_t> labels;
  for (std::size_t v : pv.base) {
    const auto& var = pv.vars[v];
    const std::string fp = child(path, var.name);
    const auto idx = var.index_of(require_string(field(j, var.name, path), fp));
    if (!idx) throw SpecError(fp, "not a value of '" + var.name + "'");
    labels.push_back(*idx);
  }
  std::uint64_t count = 1;
  for (const auto& [key, value] : j.items()) {
    if (key == "count") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 1) {
        throw SpecError(child(path, "count"), "count must be a positive integer");
      }
      count = value.get<std::uint64_t>();
    } else if (std::none_of(pv.base.begin(), pv.base.end(), [&](std::size_t v) { return pv.vars[v].name == key; })) {
      throw SpecError(child(path, key), "unknown field");
    }
  }
  return {labels, count};
}

}  // namespace

json rational_to_json(const Rational& r) {
  return json{{"num", r.numerator().str()}, {"den", r.denominator().str()}};
}

Rational rational_from_json(const json& doc, const std::string& path) {
  require_object(doc, path);
  only_fields(doc, {"num", "den"}, path);
  const std::string num = integer_string(field(doc, "num", path), child(path, "num"));
  const std::string den = integer_string(field(doc, "den", path), child(path, "den"));
  if (den == "0" || den[0] == '-') throw SpecError(child(path, "den"), "denominator must be positive");
  return Rational::parse(num + "/" + den);
}

json config_to_json(const MeasurementSystem& system, const Configuration& config) {
  json out = json::array();
  const auto base = base_variable_indices(system);
  for (const auto& [item, count] : config.entries()) {
    json obj = json::object();
    if (system.dynamics() == DynamicsKind::Table) {
      obj["state"] = system.items()[item].name;
    } else {
      for (std::size_t v : base) {
        obj[system.variables()[v].name] = system.variables()[v].values[system.label(item, v)];
      }
      obj["count"] = count;
    }
    out.push_back(std::move(obj));
  }
  return out;
}

Configuration config_from_json(const MeasurementSystem& system, const json& doc, const std::string& path) {
  require_array(doc, path);
  std::vector<Configuration::Entry> entries;
  const auto base = base_variable_indices(system);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string ip = child(path, i);
    const json& obj = require_object(doc[i], ip);
    if (system.dynamics() == DynamicsKind::Table) {
      only_fields(obj, {"state", "count"}, ip);
      const std::string name = require_string(field(obj, "state", ip), child(ip, "state"));
      const auto& items = system.items();
      const auto it = std::find_if(items.begin(), items.end(), [&](const Item& s) { return s.name == name; });
      if (it == items.end()) throw SpecError(child(ip, "state"), "unknown state '" + name + "'");
      if (obj.contains("count") && obj["count"] != 1) throw SpecError(child(ip, "count"), "table states count 1");
      entries.emplace_back(static_cast<std::size_t>(it - items.begin()), 1);
      continue;
    }
    ParsedVariables pv{system.variables(), base};
    auto [labels, count] = parse_labelled_item(pv, obj, ip);
    std::optional<std::size_t> match;
    for (std::size_t k = 0; k < system.items().size(); ++k) {
      bool same = true;
      for (std::size_t b = 0; b < base.size(); ++b) same = same && system.label(k, base[b]) == labels[b];
      if (same) match = k;
    }
    if (!match) throw SpecError(ip, "item is not part of the population");
    entries.emplace_back(*match, count);
  }
  return Configuration(std::move(entries));
}

// ---------------------------------------------------------------------------
// Load

MeasurementSystem system_from_json(const json& doc) {
  require_object(doc, "");
  only_fields(doc, {"dynamics", "variables", "population", "initial", "replacement_rule", "outcome_table",
                    "update_table"},
              "");
  const std::string dyn = require_string(field(doc, "dynamics", ""), "/dynamics");
  DynamicsKind kind;
  if (dyn == "urn") kind = DynamicsKind::Urn;
  else if (dyn == "deck") kind = DynamicsKind::Deck;
  else if (dyn == "table") kind = DynamicsKind::Table;
  else throw SpecError("/dynamics", "must be one of urn, deck, table");

  ParsedVariables pv = parse_variables(doc);

  if (kind != DynamicsKind::Deck && doc.contains("replacement_rule")) {
    throw SpecError("/replacement_rule", "only allowed for deck dynamics");
  }
  if (kind != DynamicsKind::Table) {
    for (const char* key : {"outcome_table", "update_table"}) {
      if (doc.contains(key)) throw SpecError(std::string("/") + key, "only allowed for table dynamics");
    }
  }

  std::vector<Item> items;
  std::vector<Configuration::Entry> pop;
  const json& population = require_array(field(doc, "population", ""), "/population");
  if (population.empty()) throw SpecError("/population", "population is empty");
  for (std::size_t i = 0; i < population.size(); ++i) {
    const std::string ip = child("/population", i);
    if (kind == DynamicsKind::Table) {
      const json& obj = require_object(population[i], ip);
      only_fields(obj, {"state"}, ip);
      const std::string name = require_string(field(obj, "state", ip), child(ip, "state"));
      if (std::any_of(items.begin(), items.end(), [&](const Item& s) { return s.name == name; })) {
        throw SpecError(child(ip, "state"), "duplicate state '" + name + "'");
      }
      items.push_back(Item{name, {}});
      pop.emplace_back(items.size() - 1, 1);
      continue;
    }
    auto [labels, count] = parse_labelled_item(pv, population[i], ip);
    if (std::any_of(items.begin(), items.end(), [&](const Item& it) { return it.labels == labels; })) {
      throw SpecError(ip, "duplicate item kind; use count instead");
    }
    items.push_back(Item{"", labels});
    pop.emplace_back(items.size() - 1, count);
  }
  const Configuration population_config(pop);

  std::optional<ReplacementRule> rule;
  if (kind == DynamicsKind::Deck) {
    const json& r = require_object(field(doc, "replacement_rule", ""), "/replacement_rule");
    only_fields(r, {"variable", "replace_on"}, "/replacement_rule");
    rule = ReplacementRule{require_string(field(r, "variable", "/replacement_rule"), "/replacement_rule/variable"), {}};
    const json& on = require_array(field(r, "replace_on", "/replacement_rule"), "/replacement_rule/replace_on");
    for (std::size_t k = 0; k < on.size(); ++k) {
      rule->replace_on.push_back(require_string(on[k], child("/replacement_rule/replace_on", k)));
    }
  }

  std::optional<TableLaw> table;
  if (kind == DynamicsKind::Table) {
    const json& outcome = require_object(field(doc, "outcome_table", ""), "/outcome_table");
    const json& update = require_object(field(doc, "update_table", ""), "/update_table");
    TableLaw law;
    auto state_index = [&](const std::string& name, const std::string& path) {
      const auto it = std::find_if(items.begin(), items.end(), [&](const Item& s) { return s.name == name; });
      if (it == items.end()) throw SpecError(path, "unknown state '" + name + "'");
      return static_cast<std::size_t>(it - items.begin());
    };
    for (const auto* t : {&outcome, &update}) {
      const std::string tp = t == &outcome ? "/outcome_table" : "/update_table";
      for (const auto& [state, row] : t->items()) {
        state_index(state, child(tp, state));
        require_object(row, child(tp, state));
        for (const auto& [var, cells] : row.items()) {
          if (std::none_of(pv.vars.begin(), pv.vars.end(), [&](const Variable& v) { return v.name == var; })) {
            throw SpecError(child(child(tp, state), var), "unknown variable");
          }
        }
      }
    }
    for (const auto& item : items) {
      const std::string op = child("/outcome_table", item.name);
      const std::string up = child("/update_table", item.name);
      const json& orow = require_object(field(outcome, item.name, "/outcome_table"), op);
      const json& urow = require_object(field(update, item.name, "/update_table"), up);
      auto& out_state = law.outcome.emplace_back();
      auto& upd_state = law.update.emplace_back();
      for (const auto& var : pv.vars) {
        const std::string ovp = child(op, var.name);
        const std::string uvp = child(up, var.name);
        const json& ocells = require_object(field(orow, var.name, op), ovp);
        const json& ucells = require_object(field(urow, var.name, up), uvp);
        for (const auto* cells : {&ocells, &ucells}) {
          for (const auto& [value, cell] : cells->items()) {
            if (!var.index_of(value)) {
              throw SpecError(child(cells == &ocells ? ovp : uvp, value), "not a value of '" + var.name + "'");
            }
          }
        }
        auto& probs = out_state.emplace_back();
        auto& targets = upd_state.emplace_back();
        for (const auto& value : var.values) {
          probs.push_back(rational_from_json(field(ocells, value, ovp), child(ovp, value)));
          targets.push_back(state_index(require_string(field(ucells, value, uvp), child(uvp, value)),
                                        child(uvp, value)));
        }
      }
    }
    table = std::move(law);
  }

  std::vector<Configuration> initial;
  const json& init = field(doc, "initial", "");
  if (init.is_string()) {
    if (init.get<std::string>() != "full") throw SpecError("/initial", "expected \"full\" or a list of configurations");
    if (kind == DynamicsKind::Table) {
      for (std::size_t s = 0; s < items.size(); ++s) initial.push_back(Configuration({{s, 1}}));
    } else {
      initial.push_back(population_config);
    }
  }

  // Explicit initial lists are parsed against the finished system, so build it
  // first with a placeholder start.
  std::vector<Configuration> start = initial;
  if (start.empty()) start.push_back(kind == DynamicsKind::Table ? Configuration({{0, 1}}) : population_config);
  MeasurementSystem system(kind, std::move(pv.vars), std::move(items), population_config, std::move(start),
                           std::move(rule), std::move(table));
  if (!init.is_string()) {
    require_array(init, "/initial");
    if (init.empty()) throw SpecError("/initial", "at least one initial configuration is required");
    for (std::size_t k = 0; k < init.size(); ++k) {
      initial.push_back(config_from_json(system, init[k], child("/initial", k)));
    }
    return MeasurementSystem(system.dynamics(), system.variables(), system.items(), system.population(), initial,
                             system.rule(), system.table());
  }
  return system;
}

MeasurementSystem load_system(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError("/", std::string("malformed JSON: ") + e.what());
  }
  return system_from_json(doc);
}

// ---------------------------------------------------------------------------
// Save

json system_to_json(const MeasurementSystem& system) {
  json doc = json::object();
  doc["dynamics"] = std::string(to_string(system.dynamics()));
  json vars = json::array();
  for (const auto& var : system.variables()) {
    json v{{"name", var.name}, {"values", var.values}};
    if (var.is_coarse()) {
      v["coarse_of"] = var.coarse_of;
      const auto& base = system.variable(var.coarse_of);
      json blocks = json::object();
      for (std::size_t c = 0; c < var.values.size(); ++c) {
        json members = json::array();
        for (std::size_t b : var.blocks[c]) members.push_back(base.values[b]);
        blocks[var.values[c]] = std::move(members);
      }
      v["blocks"] = std::move(blocks);
    }
    vars.push_back(std::move(v));
  }
  doc["variables"] = std::move(vars);

  json pop = config_to_json(system, system.population());
  if (system.dynamics() == DynamicsKind::Table) {
    for (auto& s : pop) s.erase("count");
  }
  doc["population"] = std::move(pop);

  bool full = false;
  if (system.dynamics() == DynamicsKind::Table) {
    full = system.initial().size() == system.items().size();
  } else {
    full = system.initial().size() == 1 && system.initial().front() == system.population();
  }
  if (full) {
    doc["initial"] = "full";
  } else {
    json init = json::array();
    for (const auto& c : system.initial()) init.push_back(config_to_json(system, c));
    doc["initial"] = std::move(init);
  }

  if (system.rule()) {
    doc["replacement_rule"] = json{{"variable", system.rule()->variable}, {"replace_on", system.rule()->replace_on}};
  }
  if (system.table()) {
    json outcome = json::object();
    json update = json::object();
    const auto& law = *system.table();
    for (std::size_t s = 0; s < system.items().size(); ++s) {
      const std::string& state = system.items()[s].name;
      for (std::size_t v = 0; v < system.variables().size(); ++v) {
        const auto& var = system.variables()[v];
        for (std::size_t k = 0; k < var.values.size(); ++k) {
          outcome[state][var.name][var.values[k]] = rational_to_json(law.outcome[s][v][k]);
          update[state][var.name][var.values[k]] = system.items()[law.update[s][v][k]].name;
        }
      }
    }
    doc["outcome_table"] = std::move(outcome);
    doc["update_table"] = std::move(update);
  }
  return doc;
}

std::string save_system(const MeasurementSystem& system) { return system_to_json(system).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Random table systems

MeasurementSystem random_table_system(std::size_t num_configs,
                                      const std::vector<std::pair<std::string, std::size_t>>& variables,
                                      std::uint64_t seed) {
  if (num_configs < 1) throw std::invalid_argument("random_table_system needs at least one configuration");
  if (variables.empty()) throw std::invalid_argument("random_table_system needs at least one variable");
  std::mt19937_64 rng(seed);
  std::vector<Variable> vars;
  for (const auto& [name, n] : variables) {
    if (n < 2) throw std::invalid_argument("variable '" + name + "' needs at least two values");
    Variable v{name, {}};
    for (std::size_t k = 0; k < n; ++k) v.values.push_back(name + std::to_string(k));
    vars.push_back(std::move(v));
  }
  std::vector<Item> items;
  std::vector<Configuration::Entry> pop;
  std::vector<Configuration> initial;
  for (std::size_t s = 0; s < num_configs; ++s) {
    items.push_back(Item{"s" + std::to_string(s), {}});
    pop.emplace_back(s, 1);
    initial.push_back(Configuration({{s, 1}}));
  }

  TableLaw law;
  std::uniform_int_distribution<std::int64_t> denominator(1, 12);
  std::uniform_int_distribution<std::size_t> target(0, num_configs - 1);
  for (std::size_t s = 0; s < num_configs; ++s) {
    auto& orow = law.outcome.emplace_back();
    auto& urow = law.update.emplace_back();
    for (const auto& var : vars) {
      // Random composition of den into one part per value.
      const std::int64_t den = denominator(rng);
      std::uniform_int_distribution<std::int64_t> cut(0, den);
      std::vector<std::int64_t> cuts{0, den};
      for (std::size_t k = 1; k < var.values.size(); ++k) cuts.push_back(cut(rng));
      std::sort(cuts.begin(), cuts.end());
      auto& probs = orow.emplace_back();
      auto& targets = urow.emplace_back();
      for (std::size_t k = 0; k < var.values.size(); ++k) {
        probs.emplace_back(cuts[k + 1] - cuts[k], den);
        targets.push_back(target(rng));
      }
    }
  }
  return MeasurementSystem(DynamicsKind::Table, std::move(vars), std::move(items), Configuration(pop),
                           std::move(initial), std::nullopt, std::move(law));
}

}  // namespace incompat
