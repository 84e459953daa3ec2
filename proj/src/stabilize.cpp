#include "sandpile/stabilize.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace sandpile {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based draw: card `pos` of site v depends only on (seed, v, pos).
std::uint64_t deck_draw(std::uint64_t seed, int site, std::uint64_t pos) {
    std::uint64_t stream = splitmix64(seed + 0x7f4a7c15ULL * static_cast<std::uint64_t>(site));
    return splitmix64(stream ^ splitmix64(pos));
}

const Rational& two_pow_64() {
    static const Rational value(BigInt(1) << 64);
    return value;
}

} // namespace

DeckSource DeckSource::seeded(const SandpileModel& model, std::uint64_t seed) {
    auto streams = std::make_shared<std::vector<SiteStream>>();
    streams->resize(static_cast<std::size_t>(model.n_sites));
    for (int v = 1; v <= model.n_sites; ++v) {
        auto& s = (*streams)[static_cast<std::size_t>(v - 1)];
        Rational cum = 0;
        for (const auto& [vec, prob] : model.topplings[static_cast<std::size_t>(v - 1)].support) {
            s.support.push_back(vec);
            cum += prob;
            s.cumulative.push_back(cum);
        }
    }
    DeckSource d;
    d.seeded_ = true;
    d.seed_ = seed;
    d.streams_ = std::move(streams);
    return d;
}

DeckSource DeckSource::explicit_decks(const SandpileModel& model,
                                      std::vector<std::vector<TopplingVector>> cards) {
    if (cards.size() != static_cast<std::size_t>(model.n_sites)) {
        throw DimensionMismatch("expected one card list per site");
    }
    auto streams = std::make_shared<std::vector<SiteStream>>();
    streams->resize(static_cast<std::size_t>(model.n_sites));
    for (int v = 1; v <= model.n_sites; ++v) {
        (*streams)[static_cast<std::size_t>(v - 1)].cards =
            std::move(cards[static_cast<std::size_t>(v - 1)]);
    }
    DeckSource d;
    d.seeded_ = false;
    d.streams_ = std::move(streams);
    return d;
}

const TopplingVector& DeckSource::card(int site, std::uint64_t pos) const {
    const auto& s = (*streams_)[static_cast<std::size_t>(site - 1)];
    if (!seeded_) {
        if (pos >= s.cards.size()) {
            throw ExplicitDeckExhausted("site " + std::to_string(site) + ": card " +
                                        std::to_string(pos + 1) + " requested but deck holds " +
                                        std::to_string(s.cards.size()));
        }
        return s.cards[pos];
    }
    // Uniform 64-bit draw read as the rational r / 2^64 in [0, 1), matched
    // against the exact cumulative thresholds of lambda_v.
    Rational u(BigInt(deck_draw(seed_, site, pos)), boost::multiprecision::numerator(two_pow_64()));
    for (std::size_t j = 0; j + 1 < s.cumulative.size(); ++j) {
        if (u < s.cumulative[j]) {
            return s.support[j];
        }
    }
    return s.support.back();
}

CounterState with_zero_counters(Config eta) {
    CounterState s;
    s.counters.assign(eta.size(), 0);
    s.grains = std::move(eta);
    return s;
}

CounterState topple_unchecked(const SandpileModel& model, const CounterState& state, int v,
                              const DeckSource& decks) {
    (void)model;
    const auto& card = decks.card(v, state.counters[static_cast<std::size_t>(v - 1)]);
    CounterState next = state;
    for (std::size_t i = 0; i < next.grains.size(); ++i) {
        next.grains[i] += card.delta[i];
    }
    next.counters[static_cast<std::size_t>(v - 1)] += 1;
    return next;
}

CounterState topple(const SandpileModel& model, const CounterState& state, int v,
                    const DeckSource& decks) {
    if (state.grains[static_cast<std::size_t>(v - 1)] <=
        model.thresholds[static_cast<std::size_t>(v - 1)]) {
        throw SiteNotUnstable("site " + std::to_string(v) + " is stable");
    }
    return topple_unchecked(model, state, v, decks);
}

std::int64_t default_fuel(const SandpileModel& model) {
    std::int64_t total = 0;
    for (auto m : model.thresholds) {
        total += m;
    }
    auto report = dissipativity(model);
    return 10 * (total + 1) * (static_cast<std::int64_t>(report.depth) + 1);
}

namespace {

// Stateful selector over one stabilization run.
class SiteSelector {
public:
    SiteSelector(const SiteSelectionPolicy& policy, int n_sites)
        : policy_(policy), n_sites_(n_sites), rng_(splitmix64(policy.seed)) {}

    int pick(const SandpileModel& model, const CounterState& state) {
        auto unstable = unstable_sites(model, state.grains);
        switch (policy_.kind) {
        case SiteSelectionPolicy::Kind::SmallestIndex:
            return unstable.front();
        case SiteSelectionPolicy::Kind::LargestIndex:
            return unstable.back();
        case SiteSelectionPolicy::Kind::MostGrains: {
            int best = unstable.front();
            for (int v : unstable) {
                if (state.grains[static_cast<std::size_t>(v - 1)] >
                    state.grains[static_cast<std::size_t>(best - 1)]) {
                    best = v;
                }
            }
            return best;
        }
        case SiteSelectionPolicy::Kind::RoundRobin: {
            // First unstable site strictly after the previous pick, cyclically.
            for (int off = 1; off <= n_sites_; ++off) {
                int v = (last_ - 1 + off) % n_sites_ + 1;
                if (std::binary_search(unstable.begin(), unstable.end(), v)) {
                    last_ = v;
                    return v;
                }
            }
            return unstable.front();
        }
        case SiteSelectionPolicy::Kind::SeededRandom: {
            rng_ = splitmix64(rng_);
            return unstable[static_cast<std::size_t>(rng_ % unstable.size())];
        }
        case SiteSelectionPolicy::Kind::ExplicitSequence: {
            while (seq_pos_ < policy_.sequence.size()) {
                int v = policy_.sequence[seq_pos_++];
                if (std::binary_search(unstable.begin(), unstable.end(), v)) {
                    return v;
                }
            }
            return unstable.front();
        }
        }
        return unstable.front();
    }

private:
    const SiteSelectionPolicy& policy_;
    int n_sites_;
    std::uint64_t rng_;
    int last_ = 0;
    std::size_t seq_pos_ = 0;
};

} // namespace

StabilizeResult deterministic_stabilize(const SandpileModel& model, CounterState state,
                                        const DeckSource& decks,
                                        const SiteSelectionPolicy& policy, std::int64_t fuel) {
    if (fuel < 0) {
        fuel = default_fuel(model);
    }
    StabilizeResult result;
    SiteSelector selector(policy, model.n_sites);
    std::int64_t used = 0;
    while (!is_stable(model, state.grains)) {
        if (used >= fuel) {
            throw FuelExhausted("stabilization exceeded " + std::to_string(fuel) +
                                " topplings; the model may not be dissipative");
        }
        int v = selector.pick(model, state);
        std::uint64_t pos = state.counters[static_cast<std::size_t>(v - 1)];
        state = topple(model, state, v, decks);
        result.log.push_back({v, pos, decks.card(v, pos)});
        ++used;
    }
    result.state = std::move(state);
    return result;
}

Config random_stabilize(const SandpileModel& model, const Config& eta, std::uint64_t seed,
                        std::int64_t fuel) {
    auto decks = DeckSource::seeded(model, seed);
    auto result = deterministic_stabilize(model, with_zero_counters(eta), decks,
                                          SiteSelectionPolicy::smallest_index(), fuel);
    return result.state.grains;
}

bool is_legal_sequence(const SandpileModel& model, CounterState state, const DeckSource& decks,
                       const std::vector<int>& sites) {
    for (int v : sites) {
        if (state.grains[static_cast<std::size_t>(v - 1)] <=
            model.thresholds[static_cast<std::size_t>(v - 1)]) {
            return false;
        }
        state = topple_unchecked(model, state, v, decks);
    }
    return true;
}

Config markov_step(const SandpileModel& model, const Config& stable_eta, int k,
                   const DeckSource& decks, const SiteSelectionPolicy& policy,
                   std::int64_t fuel) {
    auto result = deterministic_stabilize(model, with_zero_counters(add_grain(stable_eta, k)),
                                          decks, policy, fuel);
    return result.state.grains;
}

} // namespace sandpile
