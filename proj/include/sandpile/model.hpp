#pragma once

#include "sandpile/errors.hpp"
#include "sandpile/rational.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace sandpile {

/// Grain counts per site; entry v-1 holds the count of site v (sites are 1-based).
/// A valid configuration has every entry >= 1.
using Config = std::vector<std::int64_t>;

/// One possible toppling of a site: the toppling site loses grains
/// (delta[site-1] < 0), every other site gains delta[w-1] >= 0, and the
/// total is <= 0. The shortfall -sum(delta) goes to the implicit sink.
struct TopplingVector {
    int site = 1;
    std::vector<std::int64_t> delta;

    std::int64_t sink_deficit() const;

    bool operator==(const TopplingVector& other) const = default;
};

/// Finite-support toppling law of one site. Probabilities are exact,
/// strictly positive, and sum to 1; support vectors are pairwise distinct.
struct TopplingDistribution {
    int site = 1;
    std::vector<std::pair<TopplingVector, Rational>> support;
};

struct SandpileModel {
    int n_sites = 0;
    std::vector<TopplingDistribution> topplings;
    /// thresholds[v-1] = max grains site v can lose in one toppling; site v is
    /// unstable in a configuration when its grain count exceeds this.
    std::vector<std::int64_t> thresholds;
};

/// Distribution governing where the next grain is added.
struct AdditionDistribution {
    std::vector<Rational> weights;
};

/// Outcome of the layered termination test. When satisfied, `layers` is the
/// peeling G_1, G_2, ... of the site set toward the sink and `depth` counts
/// them; otherwise `witness` is a nonempty site set no member of which can
/// ever send grains outside it.
struct DissipativityReport {
    bool satisfied = true;
    std::vector<std::vector<int>> layers;
    int depth = 0;
    std::vector<int> witness;
};

std::vector<std::int64_t> compute_thresholds(int n_sites,
                                             const std::vector<TopplingDistribution>& topplings);

/// Validates a raw model description and returns it with thresholds computed.
/// Throws InvalidTopplingVector, ProbabilitiesDoNotSumToOne,
/// DuplicateSupportVector or EmptySupport with the offending site index.
SandpileModel validate_model(int n_sites, std::vector<TopplingDistribution> topplings);

AdditionDistribution validate_mu(int n_sites, std::vector<Rational> weights);

void validate_config(const SandpileModel& model, const Config& eta);

bool is_stable(const SandpileModel& model, const Config& eta);

/// Sites v with eta[v-1] > M_v, ascending.
std::vector<int> unstable_sites(const SandpileModel& model, const Config& eta);

/// Decides almost-sure termination of stabilization by the layered fixpoint:
/// repeatedly peel off the sites that can leak grains out of the remainder.
DissipativityReport dissipativity(const SandpileModel& model);

Config add_grain(Config eta, int k);

} // namespace sandpile
