#include "incompat/catalog.hpp"
#include "incompat/compat.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace incompat;
using namespace testing;

namespace {

const MeasurementSystem& urn() {
  static const MeasurementSystem s = build_urn_example();
  return s;
}

const MeasurementSystem& card() {
  static const MeasurementSystem s = build_card_example();
  return s;
}

Configuration all_plain() { return from_pool(urn(), oracle::urn_refill(1, 0)); }
Configuration all_green() { return from_pool(urn(), oracle::urn_refill(0, 1)); }

std::vector<MeasurementSystem> catalog_and_tables() {
  std::vector<MeasurementSystem> out;
  for (const auto& name : builtin_names()) out.push_back(build_builtin(name));
  out.push_back(build_urn_example(false));
  for (std::uint64_t seed = 0; seed < 4; ++seed) out.push_back(random_table_system(3, {{"X", 2}, {"Y", 2}}, seed));
  return out;
}

std::vector<std::pair<Event, Event>> value_pairs(const MeasurementSystem& s) {
  std::vector<std::pair<Event, Event>> out;
  for (const auto& p : s.all_events()) {
    for (const auto& q : s.all_events()) out.emplace_back(p, q);
  }
  return out;
}

/// Random mixture over `configs` with integer weights 1..20.
PState random_mixture(const std::vector<Configuration>& configs, std::mt19937_64& rng) {
  std::vector<std::int64_t> w(configs.size());
  std::int64_t total = 0;
  for (auto& x : w) total += (x = static_cast<std::int64_t>(rng() % 20 + 1));
  std::map<Configuration, Rational> weights;
  for (std::size_t i = 0; i < configs.size(); ++i) weights[configs[i]] = R(w[i], total);
  return PState(weights);
}

/// Verdict over 50 seeded mixtures of the configurations where `sides`
/// evaluates. `sides` returns nullopt when the state does not qualify.
bool mixture_verdict(const MeasurementSystem& s, std::mt19937_64& rng,
                     const std::function<std::optional<Sides>(const PState&)>& sides) {
  std::vector<Configuration> usable;
  for (const auto& c : reachable_configs(s)) {
    try {
      sides(PState::point(c));
      usable.push_back(c);
    } catch (const EmptyPool&) {
    }
  }
  if (usable.empty()) return true;
  for (int i = 0; i < 50; ++i) {
    const auto r = sides(random_mixture(usable, rng));
    if (r && r->left != r->right) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("compat") {

TEST_CASE("order exchange fails for the card example") {
  const auto r = check_order_exchange(card(), ev("Face:King"), ev("Suit:Spades"));
  CHECK_FALSE(r.holds);
  REQUIRE(r.witness);
  const oracle::Ev ks[] = {{0, 0}, {1, 1}}, sk[] = {{1, 1}, {0, 0}};
  CHECK(r.witness->config == card().population());
  CHECK(r.witness->left == R(*oracle::deck_seq(oracle::Rule::SpadesReplace, oracle::kFullDeck, ks)));
  CHECK(r.witness->right == R(*oracle::deck_seq(oracle::Rule::SpadesReplace, oracle::kFullDeck, sk)));
  CHECK(r.witness->left == R(7, 24));
  CHECK(r.witness->right == R(1, 4));
  CHECK(witness_valid(card(), r));
}

TEST_CASE("order exchange fails for Green and Dotted") {
  const Event g = ev("Color:Green"), d = ev("Pattern:Dotted");
  const auto r = check_order_exchange(urn(), g, d);
  CHECK_FALSE(r.holds);
  REQUIRE(r.witness);
  CHECK(r.witness->left != r.witness->right);
  CHECK(witness_valid(urn(), r));

  const auto plain = order_exchange_sides(urn(), PState::point(all_plain()), g, d);
  CHECK(plain.left == R(1, 9));
  CHECK(plain.right == R(0));
}

TEST_CASE("order exchange of an event with itself") {
  for (const auto& s : catalog_and_tables()) {
    for (const auto& e : s.all_events()) CHECK(check_order_exchange(s, e, e).holds);
  }
}

TEST_CASE("nondisturbance fails for Green and Dotted") {
  const Event g = ev("Color:Green"), d = ev("Pattern:Dotted");
  const auto r = check_nondisturbance(urn(), g, d);
  CHECK_FALSE(r.holds);
  REQUIRE(r.witness);
  CHECK(witness_valid(urn(), r));
  const auto full = nondisturbance_sides(urn(), PState::point(urn().population()), g, d);
  REQUIRE(full);
  CHECK(full->left == R(1, 4));
  CHECK(full->right == R(1));
}

TEST_CASE("nondisturbance when q is carried by p's whole class") {
  CHECK(check_nondisturbance(urn(), ev("Color:Yellow"), ev("ColorBlind:Yellow")).holds);
  CHECK(check_nondisturbance(urn(), ev("ColorBlind:Grue"), ev("Color:Green")).holds);
}

TEST_CASE("nondisturbance with replacement") {
  // The deck never changes, so nothing is repeatable: Prob(King | King & Spades)
  // is the plain draw probability 1/2.
  const auto s = build_card_deck(DeckRule::AlwaysReplace);
  const oracle::Ev ks[] = {{0, 0}, {1, 1}}, ksk[] = {{0, 0}, {1, 1}, {0, 0}};
  const auto expected = *oracle::deck_seq(oracle::Rule::AlwaysReplace, oracle::kFullDeck, ksk) /
                        *oracle::deck_seq(oracle::Rule::AlwaysReplace, oracle::kFullDeck, ks);
  const auto r = check_nondisturbance(s, ev("Face:King"), ev("Suit:Spades"));
  CHECK_FALSE(r.holds);
  REQUIRE(r.witness);
  CHECK(r.witness->left == R(expected));
  CHECK(r.witness->left == R(1, 2));
  CHECK(check_order_exchange(s, ev("Face:King"), ev("Suit:Spades")).holds);
  CHECK(check_ignored(s, ev("Face:King"), "Suit").holds);
}

TEST_CASE("vacuous nondisturbance") {
  // Pattern:Striped never follows Color:Yellow because no Yellow ball is striped.
  const auto r = check_nondisturbance(urn(), ev("Color:Yellow"), ev("Pattern:Striped"));
  CHECK(r.holds);
  CHECK(r.vacuous);
  CHECK_FALSE(r.witness);
}

TEST_CASE("ignored measurement fails for Green and Pattern") {
  const Event g = ev("Color:Green");
  const auto r = check_ignored(urn(), g, "Pattern");
  CHECK_FALSE(r.holds);
  REQUIRE(r.witness);
  CHECK(witness_valid(urn(), r));

  const auto green = oracle::urn_refill(0, 1);
  oracle::Frac sum(0);
  for (int s = 0; s < 3; ++s) {
    const oracle::Ev path[] = {{1, s}, {0, 1}};
    sum = sum + *oracle::urn_seq(green, path);
  }
  CHECK(R(sum) == R(13, 36));
  const auto sides = ignored_sides(urn(), PState::point(all_green()), g, "Pattern");
  CHECK(sides.left == R(sum));
  CHECK(sides.right == R(1));
}

TEST_CASE("ignoring a variable before measuring it") {
  for (const auto& var : urn().variables()) {
    for (const auto& value : var.values) CHECK(check_ignored(urn(), Event{var.name, value}, var.name).holds);
  }
}

TEST_CASE("ignored measurement in a single-variable system") {
  const Configuration pool({{0, 2}, {1, 1}});
  const MeasurementSystem s(DynamicsKind::Urn, {Variable{"A", {"x", "y"}}}, {Item{"", {0}}, Item{"", {1}}}, pool,
                            {pool});
  CHECK(check_ignored(s, ev("A:x"), "A").holds);
  CHECK(check_ignored(s, ev("A:y"), "A").holds);
}

TEST_CASE("criteria agree with the oracle on every urn pair") {
  const auto states = oracle::urn_reachable();
  const oracle::SeqFn<oracle::Pool> seq = oracle::urn_seq;
  for (const auto& p : urn_events()) {
    for (const auto& q : urn_events()) {
      const Event lp = urn_event(p), lq = urn_event(q);
      INFO(lp.str(), " ", lq.str());
      CHECK(check_order_exchange(urn(), lp, lq).holds == oracle::order_exchange(states, seq, p, q));
      CHECK(check_nondisturbance(urn(), lp, lq).holds == oracle::nondisturbance(states, seq, p, q));
      CHECK(check_ignored(urn(), lp, lq.variable).holds ==
            oracle::ignored(states, seq, p, q.var, oracle::urn_num_values(q.var)));
    }
  }
}

TEST_CASE("criteria agree with the oracle on every deck pair") {
  for (auto rule : {oracle::Rule::SpadesReplace, oracle::Rule::AlwaysReplace, oracle::Rule::AlwaysDiscard}) {
    const auto deck = build_card_deck(library_rule(rule));
    const auto states = oracle::deck_reachable(rule);
    const oracle::SeqFn<unsigned> seq = [rule](unsigned mask, std::span<const oracle::Ev> e) {
      return oracle::deck_seq(rule, mask, e);
    };
    for (const auto& p : deck_events()) {
      for (const auto& q : deck_events()) {
        const Event lp = deck_event(p), lq = deck_event(q);
        INFO(static_cast<int>(rule), " ", lp.str(), " ", lq.str());
        CHECK(check_order_exchange(deck, lp, lq).holds == oracle::order_exchange(states, seq, p, q));
        CHECK(check_nondisturbance(deck, lp, lq).holds == oracle::nondisturbance(states, seq, p, q));
        CHECK(check_ignored(deck, lp, lq.variable).holds == oracle::ignored(states, seq, p, q.var, 2));
      }
    }
  }
}

TEST_CASE("compatibility matrices") {
  const auto cards = compatibility_matrix(card(), "Face", "Suit");
  CHECK_FALSE(cards.all_hold);
  CHECK_FALSE(cards.cells[0][1].holds);  // King, Spades

  const auto colors = compatibility_matrix(urn(), "Color", "Color");
  CHECK(colors.all_hold);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      CHECK(colors.cells[a][b].holds);
      if (a != b) {
        const auto sides = order_exchange_sides(urn(), PState::point(urn().population()),
                                                Event{"Color", urn().variable("Color").values[a]},
                                                Event{"Color", urn().variable("Color").values[b]});
        CHECK(sides.left == R(0));
        CHECK(sides.right == R(0));
      }
    }
  }

  CHECK(compatibility_matrix(build_card_deck(DeckRule::AlwaysDiscard), "Face", "Suit").all_hold);
  CHECK(compatibility_matrix(build_card_deck(DeckRule::AlwaysReplace), "Face", "Suit").all_hold);
  CHECK_FALSE(compatibility_matrix(urn(), "Color", "Pattern").all_hold);
}

TEST_CASE("repeatability") {
  for (const char* var : {"Color", "Pattern", "ColorBlind"}) {
    for (const auto& e : repeatability_check(urn(), var)) {
      CHECK(e.holds);
      CHECK_FALSE(e.vacuous);
    }
  }
  const auto face = repeatability_check(card(), "Face");
  REQUIRE(face.size() == 4);
  CHECK(face[0].given == "King");
  CHECK(face[0].target == "King");
  CHECK_FALSE(face[0].holds);
  REQUIRE(face[0].witness);
  CHECK(face[0].witness->left == R(5, 12));
  CHECK(face[0].witness->right == R(1));
}

TEST_CASE("interference from the all-Plain urn") {
  const PState plain = PState::point(all_plain());
  const Event grue = ev("ColorBlind:Grue");
  const std::vector<Event> fine = evs("Color:Green,Color:Blue");

  const auto rec = interference_deficit(urn(), plain, grue, fine, ev("Pattern:Dotted"));
  oracle::Frac fine_sum(0);
  const auto pool = oracle::urn_refill(1, 0);
  for (int c : {1, 2}) {
    const oracle::Ev path[] = {{0, c}, {1, 1}};
    fine_sum = fine_sum + *oracle::urn_seq(pool, path);
  }
  const oracle::Ev coarse[] = {{2, 1}, {1, 1}};
  const auto coarse_path = *oracle::urn_seq(pool, coarse);
  CHECK(rec.coarse_path == R(coarse_path));
  CHECK(rec.fine_sum == R(fine_sum));
  CHECK(rec.deficit == R(coarse_path - fine_sum));
  CHECK(rec.coarse_path == R(1, 6));
  CHECK(rec.fine_sum == R(1, 9));
  CHECK(rec.deficit == R(1, 18));

  for (const auto& follow : {"ColorBlind:Yellow", "ColorBlind:Grue", "Color:Yellow"}) {
    CHECK(interference_deficit(urn(), plain, grue, fine, ev(follow)).deficit == R(0));
  }
  // A fine Color follow-up still tells Green from Blue after the Grue refill.
  const oracle::Ev grue_green[] = {{2, 1}, {0, 1}}, green_green[] = {{0, 1}, {0, 1}};
  const auto green_deficit = *oracle::urn_seq(pool, grue_green) - *oracle::urn_seq(pool, green_green);
  CHECK(interference_deficit(urn(), plain, grue, fine, ev("Color:Green")).deficit == R(green_deficit));
  CHECK(R(green_deficit) == R(-1, 6));
  CHECK(interference_deficit(urn(), plain, grue, fine, ev("Color:Blue")).deficit == R(1, 6));
  CHECK(interference_deficit(urn(), plain, grue, fine, std::nullopt).deficit == R(0));
}

TEST_CASE("single measurements never interfere") {
  for (const auto& config : reachable_configs(urn())) {
    const auto rec = interference_deficit(urn(), PState::point(config), ev("ColorBlind:Grue"),
                                          evs("Color:Blue,Color:Green"), std::nullopt);
    CHECK(rec.deficit == R(0));
  }
}

TEST_CASE("interference block must match") {
  const PState plain = PState::point(all_plain());
  CHECK_THROWS_AS(interference_deficit(urn(), plain, ev("ColorBlind:Grue"), evs("Color:Green"), std::nullopt),
                  BlockMismatch);
  CHECK_THROWS_AS(
      interference_deficit(urn(), plain, ev("ColorBlind:Grue"), evs("Color:Green,Color:Yellow"), std::nullopt),
      BlockMismatch);
  CHECK_THROWS_AS(interference_deficit(urn(), plain, ev("Color:Green"), evs("Color:Green"), std::nullopt),
                  BlockMismatch);
}

TEST_CASE("interference vanishes between compatible events") {
  std::size_t applicable = 0;
  const auto& cb = urn().variable("ColorBlind");
  const auto& color = urn().variable("Color");
  for (std::size_t v = 0; v < cb.values.size(); ++v) {
    const Event coarse{"ColorBlind", cb.values[v]};
    std::vector<Event> fine;
    for (std::size_t b : cb.blocks[v]) fine.push_back(Event{"Color", color.values[b]});
    for (const auto& follow : urn().all_events()) {
      bool compatible = check_order_exchange(urn(), coarse, follow).holds;
      for (const auto& f : fine) compatible = compatible && check_order_exchange(urn(), f, follow).holds;
      if (!compatible) continue;
      ++applicable;
      for (const auto& config : reachable_configs(urn())) {
        CHECK(interference_deficit(urn(), PState::point(config), coarse, fine, follow).deficit == R(0));
      }
    }
  }
  CHECK(applicable >= 5);
}

TEST_CASE("sharpness") {
  const auto audit = sharpness_audit(urn());
  CHECK(audit.size() == 8);
  const std::size_t color = urn().variable_index("Color"), pattern = urn().variable_index("Pattern");
  for (const auto& e : audit) {
    CHECK_FALSE(e.sharp_in_all_base);
    CHECK_FALSE((e.sharp[color] && e.sharp[pattern]));
    if (e.config == all_green()) {
      CHECK(e.sharp[color] == std::optional<std::string>("Green"));
      CHECK_FALSE(e.sharp[pattern]);
    }
  }

  const Configuration one({{0, 1}});
  const MeasurementSystem single(DynamicsKind::Urn,
                                 {Variable{"A", {"x", "y"}}, Variable{"B", {"u", "v"}}},
                                 {Item{"", {1, 0}}}, one, {one});
  const auto s = sharpness_audit(single);
  REQUIRE(s.size() == 1);
  CHECK(s[0].sharp_in_all_base);
  CHECK(s[0].sharp[0] == std::optional<std::string>("y"));
  CHECK(s[0].sharp[1] == std::optional<std::string>("u"));
}

TEST_CASE("relation audit") {
  const auto u = relation_audit(urn());
  CHECK(u.sound());
  CHECK(u.implications_checked > 0);

  const auto c = relation_audit(card());
  CHECK(c.sound());
  CHECK(std::any_of(c.pairs.begin(), c.pairs.end(), [](const auto& p) { return !p.verdicts.order_exchange; }));

  // Deck filters are not repeatable, so nondisturbance fails everywhere and
  // its implication is not asserted.
  for (auto rule : {DeckRule::AlwaysReplace, DeckRule::AlwaysDiscard}) {
    const auto r = relation_audit(build_card_deck(rule));
    CHECK(r.sound());
    for (const auto& p : r.pairs) {
      CHECK_FALSE(p.p_filter_repeatable);
      CHECK_FALSE(p.verdicts.nondisturbance);
      CHECK(p.verdicts.ignored);
      CHECK(p.verdicts.order_exchange);
    }
  }
}

TEST_CASE("relation audit over catalog and random tables") {
  for (const auto& s : catalog_and_tables()) CHECK(relation_audit(s).sound());
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    CHECK(relation_audit(random_table_system(3, {{"X", 2}, {"Y", 3}}, seed)).sound());
  }
}

TEST_CASE("verdict patterns") {
  const auto v = verdict_pattern(card(), ev("Face:King"), ev("Suit:Spades"));
  CHECK_FALSE(v.nondisturbance);
  CHECK_FALSE(v.ignored);
  CHECK_FALSE(v.order_exchange);
  CHECK(verdict_pattern_direct(card(), ev("Face:King"), ev("Suit:Spades")) == v);

  const auto discard = build_card_deck(DeckRule::AlwaysDiscard);
  for (const auto& p : discard.all_events()) {
    for (const auto& q : discard.all_events()) {
      if (p.variable == q.variable) continue;
      const Verdicts expected{false, true, true};
      CHECK(verdict_pattern(discard, p, q) == expected);
      CHECK(verdict_pattern_direct(discard, p, q) == expected);
    }
  }
}

TEST_CASE("direct enumeration matches the p-state engine") {
  for (const auto& s : catalog_and_tables()) {
    for (const auto& [p, q] : value_pairs(s)) {
      if (p.variable == q.variable) continue;
      CHECK(verdict_pattern(s, p, q) == verdict_pattern_direct(s, p, q));
    }
  }
}

TEST_CASE("counterexample search") {
  const TableGenerator gen;
  CHECK_THROWS_AS(search_counterexamples(gen, 0, 1), std::invalid_argument);
  CHECK_NOTHROW(search_counterexamples(gen, 1, 1));

  const auto a = search_counterexamples(gen, 60, 42);
  const auto b = search_counterexamples(gen, 60, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].trial == b[i].trial);
    CHECK(a[i].system == b[i].system);
    CHECK(a[i].hits.size() == b[i].hits.size());
  }
  for (const auto& f : a) {
    CHECK(f.system == random_table_system(gen.num_configs, gen.variables, f.seed));
    for (const auto& h : f.hits) {
      const auto direct = verdict_pattern_direct(f.system, h.p, h.q);
      CHECK(direct == h.verdicts);
      switch (h.pattern) {
        case SeparationPattern::NonDisturbanceOnly: CHECK((direct.nondisturbance && !direct.ignored)); break;
        case SeparationPattern::IgnoredOnly: CHECK((direct.ignored && !direct.nondisturbance)); break;
        case SeparationPattern::BothWithoutExchange:
          CHECK((direct.nondisturbance && direct.ignored && !direct.order_exchange));
          break;
      }
    }
  }
}

TEST_CASE("every failing report carries a valid witness") {
  for (const auto& s : catalog_and_tables()) {
    for (const auto& [p, q] : value_pairs(s)) {
      for (const auto& r : {check_order_exchange(s, p, q), check_nondisturbance(s, p, q),
                            check_ignored(s, p, q.variable)}) {
        CHECK(r.holds == !r.witness.has_value());
        if (r.witness) {
          CHECK(r.witness->left != r.witness->right);
          CHECK(witness_valid(s, r));
        }
      }
    }
  }
}

TEST_CASE("tampered witnesses are rejected") {
  auto r = check_order_exchange(card(), ev("Face:King"), ev("Suit:Spades"));
  REQUIRE(r.witness);
  r.witness->left = R(1, 3);
  CHECK_FALSE(witness_valid(card(), r));
}

TEST_CASE("order exchange is symmetric") {
  for (const auto& s : catalog_and_tables()) {
    for (const auto& [p, q] : value_pairs(s)) {
      CHECK(check_order_exchange(s, p, q).holds == check_order_exchange(s, q, p).holds);
    }
  }
}

TEST_CASE("point states decide the same verdicts as mixtures") {
  std::mt19937_64 rng(50);
  for (const auto& s : catalog_and_tables()) {
    for (const auto& [p, q] : value_pairs(s)) {
      INFO(p.str(), " ", q.str());
      const bool oe = mixture_verdict(s, rng, [&](const PState& sigma) -> std::optional<Sides> {
        return order_exchange_sides(s, sigma, p, q);
      });
      CHECK(oe == check_order_exchange(s, p, q).holds);
      const bool nd = mixture_verdict(s, rng, [&](const PState& sigma) { return nondisturbance_sides(s, sigma, p, q); });
      CHECK(nd == check_nondisturbance(s, p, q).holds);
      const bool ig = mixture_verdict(s, rng, [&](const PState& sigma) -> std::optional<Sides> {
        return ignored_sides(s, sigma, p, q.variable);
      });
      CHECK(ig == check_ignored(s, p, q.variable).holds);
    }
  }
}

TEST_CASE("widened domain") {
  const AnalysisOptions wide{PreparationDomain::AllSubmultisets};
  const auto r = check_order_exchange(card(), ev("Face:King"), ev("Suit:Spades"), wide);
  CHECK_FALSE(r.holds);
  CHECK(witness_valid(card(), r));
  CHECK(check_order_exchange(urn(), ev("Color:Green"), ev("Color:Green"), wide).holds);
}

TEST_CASE("criterion names") {
  for (auto k : {CriterionKind::NonDisturbance, CriterionKind::IgnoredMeasurement, CriterionKind::OrderExchange}) {
    CHECK(criterion_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(criterion_from_string("Nope"));
}

}  // TEST_SUITE
