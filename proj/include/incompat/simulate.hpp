#pragma once

// Seeded Monte Carlo cross-check of exact sequence probabilities.

#include "incompat/measure.hpp"

#include <cstdint>
#include <random>
#include <span>

namespace incompat {

/// Draws one item from `config`, reports its value of `variable` and returns
/// the pool left behind.
std::pair<std::size_t, Configuration> sample_manifestation(const MeasurementSystem& system,
                                                           const Configuration& config, std::size_t variable,
                                                           std::mt19937_64& rng);

struct MonteCarloResult {
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double estimate = 0;
  Rational exact;
  /// 4 * sqrt(exact * (1 - exact) / trials).
  double bound = 0;
  bool within_bound = false;
};

/// Each trial starts from a uniformly chosen initial configuration and is
/// redrawn from scratch until every `prep` event is reported in turn; it then
/// runs `seq` and counts a hit when every event is reported. Trial i uses the
/// sub-seed derive_seed(seed, i). Throws ZeroCondition when `prep` is
/// impossible.
MonteCarloResult monte_carlo_estimate(const MeasurementSystem& system, std::span<const Event> prep,
                                      std::span<const Event> seq, std::uint64_t trials, std::uint64_t seed);

}  // namespace incompat
