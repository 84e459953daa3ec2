#pragma once

#include "sandpile/exact.hpp"
#include "sandpile/stabilize.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sandpile {

/// Visit counts over the stable states (lexicographic order) of one chain run.
struct OccupancyReport {
    std::uint64_t steps = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t seed = 0;
    std::vector<Config> states;         // stable states, lexicographic
    std::vector<std::uint64_t> counts;  // sum = steps - burn_in

    std::vector<Rational> frequencies() const;
};

/// Runs the chain for `steps` grain additions starting from the maximal state
/// (M_1, ..., M_N) unless `start` overrides it; states visited after the
/// first `burn_in` steps are counted. Reproducible given the seed.
OccupancyReport simulate(const SandpileModel& model, const AdditionDistribution& mu,
                         std::uint64_t steps, std::uint64_t burn_in, std::uint64_t seed,
                         const SiteSelectionPolicy& policy = SiteSelectionPolicy::smallest_index(),
                         std::optional<Config> start = std::nullopt, std::int64_t fuel = -1);

/// Count-summing merge of replica reports (same model and burn-in policy).
OccupancyReport merge(const std::vector<OccupancyReport>& replicas);

/// Total variation distance (1/2) sum |a_i - b_i|.
Rational tv_distance(const std::vector<Rational>& a, const std::vector<Rational>& b);

} // namespace sandpile
