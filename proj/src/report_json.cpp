#include "incompat/report_json.hpp"

namespace incompat {

using nlohmann::json;

json event_to_json(const Event& e) { return json{{"variable", e.variable}, {"value", e.value}}; }

Event event_from_json(const json& j) { return Event{j.at("variable").get<std::string>(), j.at("value").get<std::string>()}; }

json pstate_to_json(const MeasurementSystem& system, const PState& sigma) {
  json out = json::array();
  for (const auto& [config, w] : sigma.weights()) {
    out.push_back(json{{"config", config_to_json(system, config)}, {"weight", rational_to_json(w)}});
  }
  return out;
}

json report_to_json(const MeasurementSystem& system, const CriterionReport& report) {
  json pair{{"p", event_to_json(report.p)}};
  if (const auto* q = std::get_if<Event>(&report.q)) {
    pair["q"] = event_to_json(*q);
  } else {
    pair["ignored"] = std::get<std::string>(report.q);
  }
  json out{{"kind", std::string(to_string(report.kind))},
           {"pair", std::move(pair)},
           {"verdict", report.holds ? "holds" : "fails"},
           {"vacuous", report.vacuous},
           {"witness", nullptr}};
  if (report.witness) {
    out["witness"] = json{{"config", config_to_json(system, report.witness->config)},
                          {"left", rational_to_json(report.witness->left)},
                          {"right", rational_to_json(report.witness->right)}};
  }
  return out;
}

CriterionReport report_from_json(const MeasurementSystem& system, const json& j) {
  CriterionReport r;
  const auto kind = criterion_from_string(j.at("kind").get<std::string>());
  if (!kind) throw SpecError("/kind", "unknown criterion");
  r.kind = *kind;
  const json& pair = j.at("pair");
  r.p = event_from_json(pair.at("p"));
  if (pair.contains("q")) {
    r.q = event_from_json(pair.at("q"));
  } else {
    r.q = pair.at("ignored").get<std::string>();
  }
  const std::string verdict = j.at("verdict").get<std::string>();
  if (verdict != "holds" && verdict != "fails") throw SpecError("/verdict", "must be holds or fails");
  r.holds = verdict == "holds";
  r.vacuous = j.at("vacuous").get<bool>();
  if (!j.at("witness").is_null()) {
    const json& w = j.at("witness");
    r.witness = Witness{config_from_json(system, w.at("config"), "/witness/config"),
                        rational_from_json(w.at("left"), "/witness/left"),
                        rational_from_json(w.at("right"), "/witness/right")};
  }
  return r;
}

json matrix_to_json(const MeasurementSystem& system, const CompatibilityMatrix& m) {
  json cells = json::array();
  for (const auto& row : m.cells) {
    json r = json::array();
    for (const auto& cell : row) r.push_back(report_to_json(system, cell));
    cells.push_back(std::move(r));
  }
  return json{{"rows", m.rows}, {"cols", m.cols}, {"all_hold", m.all_hold}, {"cells", std::move(cells)}};
}

json repeatability_to_json(const MeasurementSystem& system, const std::vector<RepeatabilityEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    json w = nullptr;
    if (e.witness) {
      w = json{{"config", config_to_json(system, e.witness->config)},
               {"left", rational_to_json(e.witness->left)},
               {"right", rational_to_json(e.witness->right)}};
    }
    out.push_back(json{{"given", e.given},
                       {"target", e.target},
                       {"verdict", e.holds ? "holds" : "fails"},
                       {"vacuous", e.vacuous},
                       {"witness", std::move(w)}});
  }
  return out;
}

json interference_to_json(const MeasurementSystem& system, const InterferenceRecord& rec) {
  json fine = json::array();
  for (const auto& f : rec.fine) fine.push_back(event_to_json(f));
  return json{{"preparation", pstate_to_json(system, rec.preparation)},
              {"coarse", event_to_json(rec.coarse)},
              {"fine", std::move(fine)},
              {"follow", rec.follow ? event_to_json(*rec.follow) : json(nullptr)},
              {"coarse_path", rational_to_json(rec.coarse_path)},
              {"fine_sum", rational_to_json(rec.fine_sum)},
              {"deficit", rational_to_json(rec.deficit)}};
}

json sharpness_to_json(const MeasurementSystem& system, const std::vector<SharpnessEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    json sharp = json::object();
    for (std::size_t v = 0; v < system.variables().size(); ++v) {
      sharp[system.variables()[v].name] = e.sharp[v] ? json(*e.sharp[v]) : json(nullptr);
    }
    out.push_back(json{{"config", config_to_json(system, e.config)},
                       {"sharp", std::move(sharp)},
                       {"sharp_in_all_base", e.sharp_in_all_base}});
  }
  return out;
}

json audit_to_json(const RelationAudit& audit) {
  json pairs = json::array();
  for (const auto& p : audit.pairs) {
    pairs.push_back(json{{"p", event_to_json(p.p)},
                         {"q", event_to_json(p.q)},
                         {"nondisturbance", p.verdicts.nondisturbance},
                         {"ignored", p.verdicts.ignored},
                         {"order_exchange", p.verdicts.order_exchange},
                         {"order_exchange_all_k", p.order_exchange_all_k},
                         {"p_filter_repeatable", p.p_filter_repeatable}});
  }
  return json{{"pairs", std::move(pairs)},
              {"implications_checked", audit.implications_checked},
              {"violations", audit.violations},
              {"sound", audit.sound()}};
}

json findings_to_json(const std::vector<Finding>& findings) {
  json out = json::array();
  for (const auto& f : findings) {
    json hits = json::array();
    for (const auto& h : f.hits) {
      hits.push_back(json{{"p", event_to_json(h.p)},
                          {"q", event_to_json(h.q)},
                          {"pattern", std::string(to_string(h.pattern))},
                          {"nondisturbance", h.verdicts.nondisturbance},
                          {"ignored", h.verdicts.ignored},
                          {"order_exchange", h.verdicts.order_exchange}});
    }
    out.push_back(json{{"trial", f.trial}, {"seed", f.seed}, {"system", system_to_json(f.system)}, {"hits", hits}});
  }
  return out;
}

json monte_carlo_to_json(const MonteCarloResult& r) {
  return json{{"trials", r.trials},     {"hits", r.hits},   {"estimate", r.estimate},
              {"exact", rational_to_json(r.exact)}, {"bound", r.bound}, {"within_bound", r.within_bound}};
}

namespace {

json defects_to_json(const CriterionDefects& d) {
  return json{{"order_exchange", d.order_exchange}, {"ignored", d.ignored}, {"nondisturbance", d.nondisturbance}};
}

CriterionDefects defects_from_json(const json& j) {
  return CriterionDefects{j.at("order_exchange").get<double>(), j.at("ignored").get<double>(),
                          j.at("nondisturbance").get<double>()};
}

json matrix_entries(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(json::array({m(i, k).real(), m(i, k).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_entries(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n) throw SpecError("/witness/rho", "matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k) {
      const json& z = row.at(static_cast<std::size_t>(k));
      m(i, k) = {z.at(0).get<double>(), z.at(1).get<double>()};
    }
  }
  return m;
}

json confusion_to_json(const Confusion& c) {
  return json{{"both", c.both},
              {"commute_only", c.commute_only},
              {"criterion_only", c.criterion_only},
              {"neither", c.neither}};
}

Confusion confusion_from_json(const json& j) {
  return Confusion{j.at("both").get<std::size_t>(), j.at("commute_only").get<std::size_t>(),
                   j.at("criterion_only").get<std::size_t>(), j.at("neither").get<std::size_t>()};
}

constexpr CriterionKind kKinds[] = {CriterionKind::NonDisturbance, CriterionKind::IgnoredMeasurement,
                                    CriterionKind::OrderExchange};

}  // namespace

json trial_to_json(const TrialReport& t) {
  json identity = defects_to_json(t.identity_defects);
  identity["nondisturbance_single_pair"] = json{{"defect", t.single_pair_defect}, {"form", "derived-form"}};
  json out{{"trial", t.trial},
           {"seed", t.seed},
           {"dim", t.dim},
           {"mode", std::string(to_string(t.mode))},
           {"ranks", json::array({t.ranks.first, t.ranks.second})},
           {"commutator_defect", t.commutator_defect},
           {"identity_defects", std::move(identity)},
           {"sampled_violations", defects_to_json(t.sampled)},
           {"witness", nullptr}};
  if (t.witness) {
    out["witness"] = json{{"source", t.witness->source},
                          {"index", t.witness->index},
                          {"pq", t.witness->pq},
                          {"qp", t.witness->qp},
                          {"violation", t.witness->violation()},
                          {"rho", matrix_entries(t.witness->rho)}};
  }
  return out;
}

TrialReport trial_from_json(const json& j) {
  TrialReport t;
  t.trial = j.at("trial").get<std::size_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.dim = j.at("dim").get<int>();
  const std::string mode = j.at("mode").get<std::string>();
  if (mode != "commuting" && mode != "generic") throw SpecError("/mode", "must be commuting or generic");
  t.mode = mode == "commuting" ? PairMode::Commuting : PairMode::Generic;
  t.ranks = {j.at("ranks").at(0).get<int>(), j.at("ranks").at(1).get<int>()};
  t.commutator_defect = j.at("commutator_defect").get<double>();
  t.identity_defects = defects_from_json(j.at("identity_defects"));
  t.single_pair_defect = j.at("identity_defects").at("nondisturbance_single_pair").at("defect").get<double>();
  t.sampled = defects_from_json(j.at("sampled_violations"));
  if (!j.at("witness").is_null()) {
    const json& w = j.at("witness");
    t.witness = OrderExchangeWitness{w.at("source").get<std::string>(), w.at("index").get<std::size_t>(),
                                     w.at("pq").get<double>(), w.at("qp").get<double>(),
                                     matrix_from_entries(w.at("rho"))};
  }
  return t;
}

json equivalence_to_json(const EquivalenceReport& r) {
  json trials = json::array();
  for (const auto& t : r.trials) trials.push_back(trial_to_json(t));
  json identity = json::object();
  json sampled = json::object();
  for (auto k : kKinds) {
    identity[std::string(to_string(k))] = confusion_to_json(r.identity[static_cast<std::size_t>(k)]);
    sampled[std::string(to_string(k))] = confusion_to_json(r.sampled[static_cast<std::size_t>(k)]);
  }
  return json{{"tolerance", r.tolerance},
              {"trials", std::move(trials)},
              {"confusion",
               {{"identity", std::move(identity)},
                {"sampled", std::move(sampled)},
                {"nondisturbance_single_pair", confusion_to_json(r.single_pair)}}},
              {"generic_without_witness", r.generic_without_witness},
              {"perfect", r.perfect()}};
}

EquivalenceReport equivalence_from_json(const json& j) {
  EquivalenceReport r;
  r.tolerance = j.at("tolerance").get<double>();
  for (const auto& t : j.at("trials")) r.trials.push_back(trial_from_json(t));
  const json& c = j.at("confusion");
  for (auto k : kKinds) {
    r.identity[static_cast<std::size_t>(k)] = confusion_from_json(c.at("identity").at(std::string(to_string(k))));
    r.sampled[static_cast<std::size_t>(k)] = confusion_from_json(c.at("sampled").at(std::string(to_string(k))));
  }
  r.single_pair = confusion_from_json(c.at("nondisturbance_single_pair"));
  r.generic_without_witness = j.at("generic_without_witness").get<std::size_t>();
  return r;
}

}  // namespace incompat
