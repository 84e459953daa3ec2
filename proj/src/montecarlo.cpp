#include "sandpile/montecarlo.hpp"

#include <numeric>
#include <string>

namespace sandpile {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Draws an index from exact rational weights using a uniform 64-bit value.
std::size_t sample_weighted(const std::vector<Rational>& cumulative, std::uint64_t draw) {
    static const Rational denom(BigInt(1) << 64);
    Rational u = Rational(BigInt(draw)) / denom;
    for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
        if (u < cumulative[i]) {
            return i;
        }
    }
    return cumulative.size() - 1;
}

} // namespace

std::vector<Rational> OccupancyReport::frequencies() const {
    std::uint64_t n = steps - burn_in;
    std::vector<Rational> freq(counts.size());
    if (n == 0) {
        return freq;
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        freq[i] = Rational(BigInt(counts[i]), BigInt(n));
    }
    return freq;
}

OccupancyReport simulate(const SandpileModel& model, const AdditionDistribution& mu,
                         std::uint64_t steps, std::uint64_t burn_in, std::uint64_t seed,
                         const SiteSelectionPolicy& policy, std::optional<Config> start,
                         std::int64_t fuel) {
    if (steps <= burn_in) {
        throw InvalidConfiguration("steps must exceed burn_in");
    }
    auto report = dissipativity(model);
    if (!report.satisfied) {
        throw FuelExhausted("model is not dissipative; the chain is not defined");
    }
    if (fuel < 0) {
        fuel = default_fuel(model);
    }

    StateIndex stable = enumerate_states(model, {});
    OccupancyReport out;
    out.steps = steps;
    out.burn_in = burn_in;
    out.seed = seed;
    out.states.assign(stable.states.begin(), stable.states.begin() + stable.n_stable);
    out.counts.assign(stable.n_stable, 0);

    Config eta = start ? *start : Config(model.thresholds);
    validate_config(model, eta);
    if (!is_stable(model, eta)) {
        throw InvalidConfiguration("start configuration must be stable");
    }

    std::vector<Rational> mu_cumulative;
    Rational cum = 0;
    for (const auto& w : mu.weights) {
        cum += w;
        mu_cumulative.push_back(cum);
    }

    std::uint64_t rng = splitmix64(seed);
    for (std::uint64_t step = 0; step < steps; ++step) {
        rng = splitmix64(rng);
        int k = static_cast<int>(sample_weighted(mu_cumulative, rng)) + 1;
        rng = splitmix64(rng);
        auto decks = DeckSource::seeded(model, rng);
        eta = markov_step(model, eta, k, decks, policy, fuel);
        if (step >= burn_in) {
            out.counts[*stable.find(eta)] += 1;
        }
    }
    return out;
}

OccupancyReport merge(const std::vector<OccupancyReport>& replicas) {
    if (replicas.empty()) {
        throw DimensionMismatch("nothing to merge");
    }
    OccupancyReport out = replicas.front();
    for (std::size_t r = 1; r < replicas.size(); ++r) {
        const auto& rep = replicas[r];
        if (rep.counts.size() != out.counts.size()) {
            throw DimensionMismatch("replica state spaces differ");
        }
        out.steps += rep.steps;
        out.burn_in += rep.burn_in;
        for (std::size_t i = 0; i < out.counts.size(); ++i) {
            out.counts[i] += rep.counts[i];
        }
    }
    return out;
}

Rational tv_distance(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("total variation distance needs equal-length vectors");
    }
    Rational sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Rational d = a[i] - b[i];
        sum += d < 0 ? -d : d;
    }
    return sum / 2;
}

} // namespace sandpile
