#pragma once

// Shared test machinery: random model generation, brute-force oracles kept
// independent of the library's decision procedures, and permutation matching
// of matrices given up to state relabeling.

#include "sandpile/exact.hpp"
#include "sandpile/model.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace sandpile::testing {

inline std::vector<TopplingVector> all_candidate_cards(int n, int site, std::int64_t max_loss,
                                                       std::int64_t max_gain) {
    std::vector<TopplingVector> cards;
    std::vector<std::int64_t> delta(static_cast<std::size_t>(n), 0);
    // Enumerate gains at sites != `site` with total gain <= loss.
    auto rec = [&](auto&& self, int w, std::int64_t loss, std::int64_t gain_left) -> void {
        if (w > n) {
            TopplingVector vec;
            vec.site = site;
            vec.delta = delta;
            vec.delta[static_cast<std::size_t>(site - 1)] = -loss;
            cards.push_back(std::move(vec));
            return;
        }
        if (w == site) {
            self(self, w + 1, loss, gain_left);
            return;
        }
        for (std::int64_t g = 0; g <= std::min(max_gain, gain_left); ++g) {
            delta[static_cast<std::size_t>(w - 1)] = g;
            self(self, w + 1, loss, gain_left - g);
        }
        delta[static_cast<std::size_t>(w - 1)] = 0;
    };
    for (std::int64_t loss = 1; loss <= max_loss; ++loss) {
        rec(rec, 1, loss, loss);
    }
    return cards;
}

struct ModelGenOptions {
    int max_sites = 3;
    int max_cards = 3;
    int max_denominator = 8;
    bool require_dissipative = true;
};

class ModelGen {
public:
    explicit ModelGen(std::uint64_t seed) : rng_(seed) {}

    SandpileModel next(const ModelGenOptions& opt = {}) {
        while (true) {
            SandpileModel model = draw(opt);
            if (!opt.require_dissipative || dissipativity(model).satisfied) {
                return model;
            }
        }
    }

    std::mt19937_64& rng() { return rng_; }

private:
    SandpileModel draw(const ModelGenOptions& opt) {
        std::uniform_int_distribution<int> n_dist(1, opt.max_sites);
        int n = n_dist(rng_);
        std::vector<TopplingDistribution> topplings(static_cast<std::size_t>(n));
        for (int v = 1; v <= n; ++v) {
            auto candidates = all_candidate_cards(n, v, 2, 2);
            std::shuffle(candidates.begin(), candidates.end(), rng_);
            std::uniform_int_distribution<int> card_dist(
                1, std::min<int>(opt.max_cards, static_cast<int>(candidates.size())));
            int ncards = card_dist(rng_);

            std::uniform_int_distribution<int> den_dist(ncards, opt.max_denominator);
            int q = den_dist(rng_);
            // Random composition of q into ncards positive parts.
            std::vector<int> cuts{0, q};
            std::set<int> inner;
            std::uniform_int_distribution<int> cut_dist(1, q - 1);
            while (static_cast<int>(inner.size()) < ncards - 1) {
                inner.insert(cut_dist(rng_));
            }
            cuts.insert(cuts.end(), inner.begin(), inner.end());
            std::sort(cuts.begin(), cuts.end());

            auto& dist = topplings[static_cast<std::size_t>(v - 1)];
            dist.site = v;
            for (int i = 0; i < ncards; ++i) {
                dist.support.emplace_back(candidates[static_cast<std::size_t>(i)],
                                          Rational(cuts[static_cast<std::size_t>(i + 1)] -
                                                       cuts[static_cast<std::size_t>(i)],
                                                   q));
            }
        }
        return validate_model(n, std::move(topplings));
    }

    std::mt19937_64 rng_;
};

/// Strictly positive random addition law with denominator <= 2 * n * scale.
inline AdditionDistribution random_positive_mu(std::mt19937_64& rng, int n, int scale = 4) {
    std::uniform_int_distribution<int> w_dist(1, scale);
    std::vector<Rational> weights(static_cast<std::size_t>(n));
    int total = 0;
    std::vector<int> raw(static_cast<std::size_t>(n));
    for (auto& w : raw) {
        w = w_dist(rng);
        total += w;
    }
    for (int i = 0; i < n; ++i) {
        weights[static_cast<std::size_t>(i)] = Rational(raw[static_cast<std::size_t>(i)], total);
    }
    return AdditionDistribution{std::move(weights)};
}

/// Direct enumeration of condition (ii): every nonempty subset H of the sites
/// must contain a site with a card of negative total over H.
inline bool dissipative_brute_force(const SandpileModel& model) {
    int n = model.n_sites;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        bool some_site_leaks = false;
        for (int v = 1; v <= n && !some_site_leaks; ++v) {
            if (!(mask & (1u << (v - 1)))) {
                continue;
            }
            for (const auto& [vec, prob] : model.topplings[static_cast<std::size_t>(v - 1)].support) {
                std::int64_t sum = 0;
                for (int w = 1; w <= n; ++w) {
                    if (mask & (1u << (w - 1))) {
                        sum += vec.delta[static_cast<std::size_t>(w - 1)];
                    }
                }
                if (sum < 0) {
                    some_site_leaks = true;
                    break;
                }
            }
        }
        if (!some_site_leaks) {
            return false;
        }
    }
    return true;
}

/// True iff no site of H has a card with negative total over H (i.e. H is a
/// valid counterexample to condition (ii)).
inline bool witness_is_valid(const SandpileModel& model, const std::vector<int>& witness) {
    if (witness.empty()) {
        return false;
    }
    for (int v : witness) {
        for (const auto& [vec, prob] : model.topplings[static_cast<std::size_t>(v - 1)].support) {
            std::int64_t sum = 0;
            for (int w : witness) {
                sum += vec.delta[static_cast<std::size_t>(w - 1)];
            }
            if (sum < 0) {
                return false;
            }
        }
    }
    return true;
}

/// Searches a bijection sigma with target(i, j) == ours(sigma(i), sigma(j))
/// for all i, j, respecting the group labels (states may only be relabeled
/// within their group, e.g. stable <-> stable). Returns sigma or nullopt.
inline std::optional<std::vector<std::size_t>> find_matching_permutation(
    const RationalMatrix& ours, const RationalMatrix& target,
    const std::vector<int>& groups_ours, const std::vector<int>& groups_target) {
    const std::size_t n = target.rows;
    if (ours.rows != n || ours.cols != n || target.cols != n) {
        return std::nullopt;
    }
    std::vector<std::size_t> sigma(n, n);
    std::vector<bool> used(n, false);

    auto consistent = [&](std::size_t i, std::size_t cand) {
        for (std::size_t j = 0; j <= i; ++j) {
            if (sigma[j] == n && j != i) {
                continue;
            }
            std::size_t sj = (j == i) ? cand : sigma[j];
            if (target(i, j) != ours(cand, sj) || target(j, i) != ours(sj, cand)) {
                return false;
            }
        }
        return true;
    };

    auto rec = [&](auto&& self, std::size_t i) -> bool {
        if (i == n) {
            return true;
        }
        for (std::size_t cand = 0; cand < n; ++cand) {
            if (used[cand] || groups_target[i] != groups_ours[cand]) {
                continue;
            }
            sigma[i] = cand;
            if (consistent(i, cand)) {
                used[cand] = true;
                if (self(self, i + 1)) {
                    return true;
                }
                used[cand] = false;
            }
            sigma[i] = n;
        }
        return false;
    };
    if (rec(rec, 0)) {
        return sigma;
    }
    return std::nullopt;
}

inline RationalMatrix matrix_from(std::initializer_list<std::initializer_list<Rational>> rows) {
    RationalMatrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (const auto& value : row) {
            m(i, j++) = value;
        }
        ++i;
    }
    return m;
}

} // namespace sandpile::testing
