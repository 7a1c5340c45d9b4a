#include "incompat/cli.hpp"

#include "incompat/catalog.hpp"
#include "incompat/compat.hpp"
#include "incompat/quantum.hpp"
#include "incompat/report_json.hpp"
#include "incompat/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace incompat {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string real(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

/// Right-aligned ASCII table.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : rows_{std::move(header)} {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& os) const {
    std::vector<std::size_t> width;
    for (const auto& row : rows_) {
      width.resize(std::max(width.size(), row.size()), 0);
      for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      for (std::size_t c = 0; c < rows_[r].size(); ++c) {
        os << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << rows_[r][c];
      }
      os << '\n';
      if (r == 0) {
        for (std::size_t c = 0; c < width.size(); ++c) os << (c ? "  " : "") << std::string(width[c], '-');
        os << '\n';
      }
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

struct SystemSource {
  std::string builtin;
  std::string path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--builtin", builtin, "Builtin system")->check(CLI::IsMember(builtin_names()));
    cmd->add_option("--system", path, "System JSON file")->check(CLI::ExistingFile);
  }

  std::string label() const { return builtin.empty() ? path : builtin; }

  MeasurementSystem load() const {
    if (builtin.empty() == path.empty()) throw UsageError("exactly one of --builtin or --system is required");
    if (!builtin.empty()) return build_builtin(builtin);
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_system(buf.str());
  }
};

std::vector<Event> events_arg(const std::string& text) {
  try {
    return parse_events(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void validate_events(const MeasurementSystem& system, const std::vector<Event>& events) {
  for (const auto& e : events) system.resolve(e);
}

/// Initial state filtered on the preparation events.
PState prepared_state(const MeasurementSystem& system, const std::vector<Event>& prep) {
  PState sigma = initial_state(system);
  for (const auto& e : prep) {
    auto r = filter_event(system, sigma, e);
    if (!r.conditioned) throw ZeroCondition("preparation " + e.str() + " has probability zero");
    sigma = std::move(*r.conditioned);
  }
  return sigma;
}

std::string join(const std::vector<Event>& events, const char* sep) {
  std::string out;
  for (const auto& e : events) out += (out.empty() ? "" : sep) + e.str();
  return out;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  SystemSource source;
  std::vector<std::string> pairs;
  bool json = false;
  bool assert_compatible = false;
};

void print_report_row(TextTable& t, const MeasurementSystem& system, const CriterionReport& r) {
  std::string verdict = r.holds ? (r.vacuous ? "holds (vacuous)" : "holds") : "fails";
  if (r.witness) {
    t.add({std::string(to_string(r.kind)), verdict, system.describe(r.witness->config), r.witness->left.str(),
           r.witness->right.str()});
  } else {
    t.add({std::string(to_string(r.kind)), verdict, "-", "-", "-"});
  }
}

int analyze(const AnalyzeArgs& a, std::ostream& out) {
  const MeasurementSystem system = a.source.load();
  std::vector<std::pair<Event, Event>> pairs;
  for (const auto& text : a.pairs) {
    const auto events = events_arg(text);
    if (events.size() != 2) throw UsageError("--pairs takes two events, e.g. Face:King,Suit:Spades");
    validate_events(system, events);
    pairs.emplace_back(events[0], events[1]);
  }
  const auto reachable = reachable_configs(system);
  bool incompatible = false;

  json doc{{"system", a.source.label()},
           {"dynamics", std::string(to_string(system.dynamics()))},
           {"reachable_configs", reachable.size()}};
  std::ostringstream text;
  text << "system: " << a.source.label() << " (" << to_string(system.dynamics()) << " dynamics, "
       << reachable.size() << " reachable configurations)\n";

  if (!pairs.empty()) {
    json jp = json::array();
    for (const auto& [p, q] : pairs) {
      const auto oe = check_order_exchange(system, p, q);
      const auto nd = check_nondisturbance(system, p, q);
      const auto ig = check_ignored(system, p, q.variable);
      incompatible = incompatible || !oe.holds;
      jp.push_back(json{{"p", event_to_json(p)},
                        {"q", event_to_json(q)},
                        {"reports", json::array({report_to_json(system, oe), report_to_json(system, nd),
                                                 report_to_json(system, ig)})}});
      text << "\npair " << p.str() << ", " << q.str() << "\n";
      TextTable t({"criterion", "verdict", "witness preparation", "left", "right"});
      print_report_row(t, system, oe);
      print_report_row(t, system, nd);
      print_report_row(t, system, ig);
      t.print(text);
    }
    doc["pairs"] = std::move(jp);
  } else {
    json jm = json::array();
    const auto& vars = system.variables();
    for (std::size_t i = 0; i < vars.size(); ++i) {
      for (std::size_t j = i + 1; j < vars.size(); ++j) {
        const auto m = compatibility_matrix(system, vars[i].name, vars[j].name);
        incompatible = incompatible || !m.all_hold;
        jm.push_back(matrix_to_json(system, m));
        text << "\norder exchange " << vars[i].name << " x " << vars[j].name
             << (m.all_hold ? " (compatible)" : " (incompatible)") << "\n";
        std::vector<std::string> header{vars[i].name};
        header.insert(header.end(), vars[j].values.begin(), vars[j].values.end());
        TextTable t(header);
        for (std::size_t r = 0; r < m.cells.size(); ++r) {
          std::vector<std::string> row{vars[i].values[r]};
          for (const auto& cell : m.cells[r]) row.push_back(cell.holds ? "holds" : "fails");
          t.add(std::move(row));
        }
        t.print(text);
      }
    }
    doc["matrices"] = std::move(jm);
  }

  json jr = json::object();
  for (const auto& var : system.variables()) {
    const auto entries = repeatability_check(system, var.name);
    jr[var.name] = repeatability_to_json(system, entries);
    const bool all = std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.holds; });
    text << "\nrepeatability " << var.name << (all ? " (delta)" : " (not repeatable)") << "\n";
    std::vector<std::string> header{"given"};
    header.insert(header.end(), var.values.begin(), var.values.end());
    TextTable t(header);
    for (std::size_t g = 0; g < var.values.size(); ++g) {
      std::vector<std::string> row{var.values[g]};
      for (std::size_t k = 0; k < var.values.size(); ++k) {
        const auto& e = entries[g * var.values.size() + k];
        if (e.vacuous) row.push_back("-");
        else if (e.holds) row.push_back(g == k ? "1" : "0");
        else row.push_back("fails " + e.witness->left.str());
      }
      t.add(std::move(row));
    }
    t.print(text);
  }
  doc["repeatability"] = std::move(jr);

  const auto sharp = sharpness_audit(system);
  doc["sharpness"] = sharpness_to_json(system, sharp);
  const bool any_sharp_all =
      std::any_of(sharp.begin(), sharp.end(), [](const auto& e) { return e.sharp_in_all_base; });
  text << "\nsharpness (" << (any_sharp_all ? "some state sharp in every base variable" : "no state sharp in every base variable")
       << ")\n";
  std::vector<std::string> header{"configuration"};
  for (const auto& var : system.variables()) header.push_back(var.name);
  header.push_back("all base");
  TextTable t(header);
  for (const auto& e : sharp) {
    std::vector<std::string> row{system.describe(e.config)};
    for (const auto& s : e.sharp) row.push_back(s ? *s : "-");
    row.push_back(e.sharp_in_all_base ? "yes" : "no");
    t.add(std::move(row));
  }
  t.print(text);

  doc["incompatible"] = incompatible;
  if (a.json) {
    out << doc.dump(2) << '\n';
  } else {
    out << text.str();
  }
  return (a.assert_compatible && incompatible) ? kExitIncompatible : kExitOk;
}

// ---------------------------------------------------------------------------
// prob, interfere, simulate

struct ProbArgs {
  SystemSource source;
  std::string prep;
  std::string seq;
  bool json = false;
};

int prob(const ProbArgs& a, std::ostream& out) {
  const MeasurementSystem system = a.source.load();
  const auto prep = events_arg(a.prep);
  const auto seq = events_arg(a.seq);
  if (seq.empty()) throw UsageError("--seq needs at least one event");
  validate_events(system, prep);
  validate_events(system, seq);
  const Rational p = sequence_prob(system, prepared_state(system, prep), seq);
  if (a.json) {
    json jprep = json::array(), jseq = json::array();
    for (const auto& e : prep) jprep.push_back(event_to_json(e));
    for (const auto& e : seq) jseq.push_back(event_to_json(e));
    out << json{{"prep", jprep}, {"seq", jseq}, {"probability", rational_to_json(p)}}.dump(2) << '\n';
  } else {
    out << p.str() << '\n';
  }
  return kExitOk;
}

struct InterfereArgs {
  SystemSource source;
  std::string prep;
  std::string coarse;
  std::string fine;
  std::string follow;
  bool json = false;
};

int interfere(const InterfereArgs& a, std::ostream& out) {
  const MeasurementSystem system = a.source.load();
  const auto prep = events_arg(a.prep);
  const Event coarse = events_arg(a.coarse).at(0);
  const auto fine = events_arg(a.fine);
  std::optional<Event> follow;
  if (!a.follow.empty()) follow = events_arg(a.follow).at(0);
  validate_events(system, prep);
  const auto rec = interference_deficit(system, prepared_state(system, prep), coarse, fine, follow);
  if (a.json) {
    out << interference_to_json(system, rec).dump(2) << '\n';
    return kExitOk;
  }
  const std::string tail = follow ? " & " + follow->str() : "";
  std::string fine_terms;
  for (const auto& f : fine) fine_terms += (fine_terms.empty() ? "" : " + ") + ("Pr(" + f.str() + tail + ")");
  TextTable t({"quantity", "expression", "value"});
  t.add({"coarse path", "Pr(" + coarse.str() + tail + ")", rec.coarse_path.str()});
  t.add({"fine sum", fine_terms, rec.fine_sum.str()});
  t.add({"deficit", "difference", rec.deficit.str()});
  out << "preparation: " << (prep.empty() ? std::string("initial state") : join(prep, " & ")) << '\n';
  t.print(out);
  return kExitOk;
}

struct SimulateArgs {
  SystemSource source;
  std::string prep;
  std::string seq;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  bool json = false;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  const MeasurementSystem system = a.source.load();
  const auto prep = events_arg(a.prep);
  const auto seq = events_arg(a.seq);
  if (seq.empty()) throw UsageError("--seq needs at least one event");
  if (a.trials < 1) throw UsageError("--trials must be at least 1");
  validate_events(system, prep);
  validate_events(system, seq);
  const auto r = monte_carlo_estimate(system, prep, seq, a.trials, a.seed);
  if (a.json) {
    out << monte_carlo_to_json(r).dump(2) << '\n';
    return kExitOk;
  }
  TextTable t({"quantity", "value"});
  t.add({"trials", std::to_string(r.trials)});
  t.add({"hits", std::to_string(r.hits)});
  t.add({"estimate", real(r.estimate)});
  t.add({"exact", r.exact.str()});
  t.add({"exact (decimal)", real(r.exact.to_double())});
  t.add({"4-sigma bound", real(r.bound)});
  t.add({"within bound", r.within_bound ? "yes" : "no"});
  t.print(out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// quantum

struct QuantumArgs {
  std::vector<int> dims{2, 3, 4, 5, 6};
  std::size_t trials = 200;
  std::size_t rho_samples = 100;
  std::uint64_t seed = 0;
  std::optional<double> tolerance;
  bool json = false;
};

double default_tolerance() {
  const char* env = std::getenv("INCOMPAT_TOLERANCE");
  if (!env || !*env) return kIdentityTolerance;
  try {
    std::size_t used = 0;
    const double tol = std::stod(env, &used);
    if (used != std::string(env).size() || !(tol > 0)) throw std::invalid_argument("bad");
    return tol;
  } catch (const std::exception&) {
    throw UsageError(std::string("INCOMPAT_TOLERANCE must be a positive number, got '") + env + "'");
  }
}

int quantum(const QuantumArgs& a, std::ostream& out) {
  const double tol = a.tolerance ? *a.tolerance : default_tolerance();
  if (!(tol > 0)) throw UsageError("--tolerance must be positive");
  if (a.trials < 1) throw UsageError("--trials must be at least 1");
  const auto report = equivalence_experiment(a.dims, a.trials, a.rho_samples, a.seed, tol);
  if (a.json) {
    out << equivalence_to_json(report).dump(2) << '\n';
    return kExitOk;
  }
  out << "trials: " << report.trials.size() << ", tolerance: " << real(tol) << "\n\n";
  TextTable t({"criterion", "form", "both", "commute only", "criterion only", "neither"});
  auto row = [&](std::string name, std::string form, const Confusion& c) {
    t.add({std::move(name), std::move(form), std::to_string(c.both), std::to_string(c.commute_only),
           std::to_string(c.criterion_only), std::to_string(c.neither)});
  };
  for (auto k : {CriterionKind::NonDisturbance, CriterionKind::IgnoredMeasurement, CriterionKind::OrderExchange}) {
    row(std::string(to_string(k)), "identity", report.identity[static_cast<std::size_t>(k)]);
    row(std::string(to_string(k)), "sampled", report.sampled[static_cast<std::size_t>(k)]);
  }
  row("NonDisturbance", "single pair (derived-form)", report.single_pair);
  t.print(out);
  double weakest = std::numeric_limits<double>::infinity();
  for (const auto& tr : report.trials) {
    if (tr.witness) weakest = std::min(weakest, tr.witness->violation());
  }
  out << "\nweakest order-exchange witness over generic pairs: "
      << (std::isinf(weakest) ? std::string("-") : real(weakest)) << '\n';
  out << "generic pairs without witness: " << report.generic_without_witness << '\n';
  out << "perfect equivalence: " << (report.perfect() ? "yes" : "no") << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// search

struct SearchArgs {
  std::size_t configs = 3;
  std::string vars = "X:2,Y:2";
  std::uint64_t trials = 100;
  std::uint64_t seed = 0;
  bool json = false;
};

int search(const SearchArgs& a, std::ostream& out) {
  TableGenerator gen{a.configs, {}};
  for (const auto& e : events_arg(a.vars)) {
    std::size_t n = 0;
    try {
      n = static_cast<std::size_t>(std::stoul(e.value));
    } catch (const std::exception&) {
      throw UsageError("--vars entries look like Name:count, got '" + e.str() + "'");
    }
    if (n < 2) throw UsageError("variable '" + e.variable + "' needs at least two values");
    gen.variables.emplace_back(e.variable, n);
  }
  if (a.configs < 1) throw UsageError("--configs must be at least 1");
  if (a.trials < 1) throw UsageError("--trials must be at least 1");
  const auto findings = search_counterexamples(gen, a.trials, a.seed);
  if (a.json) {
    out << json{{"trials", a.trials}, {"seed", a.seed}, {"findings", findings_to_json(findings)}}.dump(2) << '\n';
    return kExitOk;
  }
  out << "searched " << a.trials << " random table systems; " << findings.size()
      << " separate the criteria (all re-verified by direct enumeration)\n";
  if (findings.empty()) return kExitOk;
  TextTable t({"trial", "p", "q", "pattern"});
  for (const auto& f : findings) {
    for (const auto& h : f.hits) {
      t.add({std::to_string(f.trial), h.p.str(), h.q.str(), std::string(to_string(h.pattern))});
    }
  }
  out << '\n';
  t.print(out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact compatibility analysis of classical measurement systems", "incompat"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Compatibility matrices, repeatability and sharpness");
  analyze_args.source.attach(analyze_cmd);
  analyze_cmd->add_option("--pairs", analyze_args.pairs, "Event pair to analyze in detail, e.g. Face:King,Suit:Spades");
  analyze_cmd->add_flag("--json", analyze_args.json, "Emit JSON");
  analyze_cmd->add_flag("--assert-compatible", analyze_args.assert_compatible,
                        "Exit 1 when an order-exchange check fails");

  ProbArgs prob_args;
  auto* prob_cmd = app.add_subcommand("prob", "Exact probability of an event sequence after a preparation");
  prob_args.source.attach(prob_cmd);
  prob_cmd->add_option("--prep", prob_args.prep, "Preparation events, comma separated");
  prob_cmd->add_option("--seq", prob_args.seq, "Event sequence, comma separated")->required();
  prob_cmd->add_flag("--json", prob_args.json, "Emit JSON");

  InterfereArgs interfere_args;
  auto* interfere_cmd = app.add_subcommand("interfere", "Interference deficit of a coarse value against its block");
  interfere_args.source.attach(interfere_cmd);
  interfere_cmd->add_option("--prep", interfere_args.prep, "Preparation events, comma separated");
  interfere_cmd->add_option("--coarse", interfere_args.coarse, "Coarse event, e.g. ColorBlind:Grue")->required();
  interfere_cmd->add_option("--fine", interfere_args.fine, "Base events of the block")->required();
  interfere_cmd->add_option("--follow", interfere_args.follow, "Follow-up event (omit for a single measurement)");
  interfere_cmd->add_flag("--json", interfere_args.json, "Emit JSON");

  QuantumArgs quantum_args;
  auto* quantum_cmd = app.add_subcommand("quantum", "Projector commutativity equivalence experiment");
  quantum_cmd->add_option("--dims", quantum_args.dims, "Dimensions to cycle through")->delimiter(',')
      ->check(CLI::Range(2, 64));
  quantum_cmd->add_option("--trials", quantum_args.trials, "Number of projector pairs");
  quantum_cmd->add_option("--rho-samples", quantum_args.rho_samples, "Random pure states per pair");
  quantum_cmd->add_option("--seed", quantum_args.seed, "Master seed")->required();
  quantum_cmd->add_option("--tolerance", quantum_args.tolerance, "Identity tolerance (default 1e-9 or INCOMPAT_TOLERANCE)");
  quantum_cmd->add_flag("--json", quantum_args.json, "Emit JSON");

  SimulateArgs simulate_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of a sequence probability");
  simulate_args.source.attach(simulate_cmd);
  simulate_cmd->add_option("--prep", simulate_args.prep, "Preparation events, comma separated");
  simulate_cmd->add_option("--seq", simulate_args.seq, "Event sequence, comma separated")->required();
  simulate_cmd->add_option("--trials", simulate_args.trials, "Number of runs");
  simulate_cmd->add_option("--seed", simulate_args.seed, "Master seed")->required();
  simulate_cmd->add_flag("--json", simulate_args.json, "Emit JSON");

  SearchArgs search_args;
  auto* search_cmd = app.add_subcommand("search", "Random search for systems separating the criteria");
  search_cmd->add_option("--configs", search_args.configs, "States per random table system");
  search_cmd->add_option("--vars", search_args.vars, "Variables as Name:count, comma separated");
  search_cmd->add_option("--trials", search_args.trials, "Number of random systems");
  search_cmd->add_option("--seed", search_args.seed, "Master seed")->required();
  search_cmd->add_flag("--json", search_args.json, "Emit JSON");

  std::vector<const char*> argv{"incompat"};
  for (const auto& a : args) argv.push_back(a.c_str());

  auto usage = [&]() -> std::string {
    for (auto* cmd : app.get_subcommands()) return cmd->help();
    return app.help();
  };

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return kExitUsage;
  }

  try {
    if (analyze_cmd->parsed()) return analyze(analyze_args, out);
    if (prob_cmd->parsed()) return prob(prob_args, out);
    if (interfere_cmd->parsed()) return interfere(interfere_args, out);
    if (quantum_cmd->parsed()) return quantum(quantum_args, out);
    if (simulate_cmd->parsed()) return simulate(simulate_args, out);
    if (search_cmd->parsed()) return search(search_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  err << usage();
  return kExitUsage;
}

}  // namespace incompat
