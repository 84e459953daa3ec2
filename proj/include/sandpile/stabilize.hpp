#pragma once

#include "sandpile/model.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace sandpile {

/// Per-site streams of pre-drawn toppling cards. In Seeded mode, card i of
/// site v is a pure function of (seed, v, i) distributed per the site's law,
/// so streams are independent of consumption order elsewhere and replaying a
/// seed reproduces every card. In Explicit mode the lists are finite and
/// requesting a card past the end throws ExplicitDeckExhausted.
class DeckSource {
public:
    static DeckSource seeded(const SandpileModel& model, std::uint64_t seed);
    static DeckSource explicit_decks(const SandpileModel& model,
                                     std::vector<std::vector<TopplingVector>> cards);

    /// Card at 0-based position `pos` of site v's deck (pos = counter value
    /// at the moment the card is drawn).
    const TopplingVector& card(int site, std::uint64_t pos) const;

    bool is_seeded() const { return seeded_; }

private:
    DeckSource() = default;

    struct SiteStream {
        // Seeded mode: support vectors with cumulative probability thresholds.
        std::vector<TopplingVector> support;
        std::vector<Rational> cumulative;
        // Explicit mode: the card list itself.
        std::vector<TopplingVector> cards;
    };

    bool seeded_ = false;
    std::uint64_t seed_ = 0;
    std::shared_ptr<const std::vector<SiteStream>> streams_;
};

/// Configuration plus per-site card counters; counters[v-1] is the number of
/// cards consumed at site v so far.
struct CounterState {
    Config grains;
    std::vector<std::uint64_t> counters;

    bool operator==(const CounterState& other) const = default;
};

CounterState with_zero_counters(Config eta);

struct SiteSelectionPolicy {
    enum class Kind {
        SmallestIndex,
        LargestIndex,
        MostGrains, // ties broken toward the smallest index
        RoundRobin,
        SeededRandom,
        ExplicitSequence,
    };

    Kind kind = Kind::SmallestIndex;
    std::uint64_t seed = 0;          // SeededRandom
    std::vector<int> sequence;       // ExplicitSequence; falls back to
                                     // smallest index once exhausted or when
                                     // the listed site is currently stable

    static SiteSelectionPolicy smallest_index() { return {}; }
    static SiteSelectionPolicy largest_index() { return {Kind::LargestIndex, 0, {}}; }
    static SiteSelectionPolicy most_grains() { return {Kind::MostGrains, 0, {}}; }
    static SiteSelectionPolicy round_robin() { return {Kind::RoundRobin, 0, {}}; }
    static SiteSelectionPolicy seeded_random(std::uint64_t seed) {
        return {Kind::SeededRandom, seed, {}};
    }
    static SiteSelectionPolicy explicit_sequence(std::vector<int> sites) {
        return {Kind::ExplicitSequence, 0, std::move(sites)};
    }
};

struct TopplingLogEntry {
    int site = 0;
    std::uint64_t card_position = 0; // 0-based deck position consumed
    TopplingVector card;
};
using TopplingLog = std::vector<TopplingLogEntry>;

/// One application of the toppling function at site v: grains move per the
/// next card of v's deck and v's counter increments. Throws SiteNotUnstable
/// unless v is unstable.
CounterState topple(const SandpileModel& model, const CounterState& state, int v,
                    const DeckSource& decks);

/// Same map without the legality check; defined on all integer grain vectors.
CounterState topple_unchecked(const SandpileModel& model, const CounterState& state, int v,
                              const DeckSource& decks);

struct StabilizeResult {
    CounterState state;
    TopplingLog log;
};

/// Guard on the number of topplings one stabilization may perform:
/// 10 * (sum of thresholds + 1) * (depth + 1).
std::int64_t default_fuel(const SandpileModel& model);

/// Topples until stable, choosing sites per `policy`. Throws FuelExhausted
/// after `fuel` topplings (a likely non-dissipative model). fuel < 0 means
/// default_fuel(model).
StabilizeResult deterministic_stabilize(const SandpileModel& model, CounterState state,
                                        const DeckSource& decks,
                                        const SiteSelectionPolicy& policy,
                                        std::int64_t fuel = -1);

/// Random stabilization: deterministic stabilization with fresh seeded decks
/// and zero counters.
Config random_stabilize(const SandpileModel& model, const Config& eta, std::uint64_t seed,
                        std::int64_t fuel = -1);

/// True iff each listed site is unstable at its turn when the previous
/// topplings have been applied with these decks.
bool is_legal_sequence(const SandpileModel& model, CounterState state, const DeckSource& decks,
                       const std::vector<int>& sites);

/// One chain step: add a grain at k, then stabilize.
Config markov_step(const SandpileModel& model, const Config& stable_eta, int k,
                   const DeckSource& decks, const SiteSelectionPolicy& policy,
                   std::int64_t fuel = -1);

} // namespace sandpile
