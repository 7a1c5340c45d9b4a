#include "incompat/simulate.hpp"

#include "incompat/seeding.hpp"

#include <cmath>
#include <vector>

namespace incompat {

std::pair<std::size_t, Configuration> sample_manifestation(const MeasurementSystem& system,
                                                           const Configuration& config, std::size_t variable,
                                                           std::mt19937_64& rng) {
  if (config.empty()) throw EmptyPool("measurement on an empty pool");

  if (system.dynamics() == DynamicsKind::Table) {
    const std::size_t s = config.entries().front().first;
    const auto& row = system.table()->outcome[s][variable];
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0;
    std::size_t value = 0;
    // Last value with positive probability absorbs rounding at the top end.
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k].is_zero()) continue;
      value = k;
      acc += row[k].to_double();
      if (u < acc) break;
    }
    return {value, Configuration({{system.table()->update[s][variable][value], 1}})};
  }

  std::uint64_t pick = std::uniform_int_distribution<std::uint64_t>(0, config.total() - 1)(rng);
  std::size_t item = config.entries().back().first;
  for (const auto& [i, count] : config.entries()) {
    if (pick < count) {
      item = i;
      break;
    }
    pick -= count;
  }
  const std::size_t value = system.label(item, variable);
  if (system.dynamics() == DynamicsKind::Deck) {
    return {value, system.replaces(item) ? config : config.without_one(item)};
  }
  return {value, update_config(system, config, system.event_of({variable, value}))};
}

MonteCarloResult monte_carlo_estimate(const MeasurementSystem& system, std::span<const Event> prep,
                                      std::span<const Event> seq, std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("simulation needs at least one trial");
  if (seq.empty()) throw std::invalid_argument("simulation needs at least one event to estimate");

  const PState start = initial_state(system);
  std::vector<Event> joint(prep.begin(), prep.end());
  joint.insert(joint.end(), seq.begin(), seq.end());
  MonteCarloResult result;
  result.trials = trials;
  if (prep.empty()) {
    result.exact = sequence_prob(system, start, seq);
  } else {
    const Rational prep_prob = sequence_prob(system, start, prep);
    if (prep_prob.is_zero()) throw ZeroCondition("preparation events have probability zero");
    result.exact = sequence_prob(system, start, joint) / prep_prob;
  }

  std::vector<ResolvedEvent> prep_r, seq_r;
  for (const auto& e : prep) prep_r.push_back(system.resolve(e));
  for (const auto& e : seq) seq_r.push_back(system.resolve(e));
  const auto& initial = system.initial();

  for (std::uint64_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    Configuration config;
    for (bool prepared = false; !prepared;) {
      config = initial[std::uniform_int_distribution<std::size_t>(0, initial.size() - 1)(rng)];
      prepared = true;
      for (const auto& e : prep_r) {
        auto [value, next] = sample_manifestation(system, config, e.variable, rng);
        if (value != e.value) {
          prepared = false;
          break;
        }
        config = std::move(next);
      }
    }
    bool hit = true;
    for (const auto& e : seq_r) {
      auto [value, next] = sample_manifestation(system, config, e.variable, rng);
      if (value != e.value) {
        hit = false;
        break;
      }
      config = std::move(next);
    }
    if (hit) ++result.hits;
  }

  result.estimate = static_cast<double>(result.hits) / static_cast<double>(trials);
  const double p = result.exact.to_double();
  result.bound = 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  result.within_bound = std::abs(result.estimate - p) <= result.bound;
  return result;
}

}  // namespace incompat
