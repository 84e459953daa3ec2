#include "sandpile/presets.hpp"

#include <map>
#include <string>

namespace sandpile {

SandpileModel single_grain_model(int n, const std::vector<std::vector<Rational>>& routing) {
    if (routing.size() != static_cast<std::size_t>(n)) {
        throw InvalidRouting("expected one routing row per site");
    }
    std::vector<TopplingDistribution> topplings(static_cast<std::size_t>(n));
    for (int v = 1; v <= n; ++v) {
        const auto& row = routing[static_cast<std::size_t>(v - 1)];
        if (row.size() != static_cast<std::size_t>(n) + 1) {
            throw InvalidRouting("site " + std::to_string(v) + ": routing row needs " +
                                 std::to_string(n + 1) + " entries (sites then sink)");
        }
        Rational total = 0;
        auto& dist = topplings[static_cast<std::size_t>(v - 1)];
        dist.site = v;
        for (std::size_t dest = 0; dest < row.size(); ++dest) {
            if (row[dest] < 0) {
                throw InvalidRouting("site " + std::to_string(v) + ": negative routing weight");
            }
            total += row[dest];
            if (row[dest] == 0) {
                continue;
            }
            if (dest == static_cast<std::size_t>(v - 1)) {
                throw InvalidRouting("site " + std::to_string(v) + ": cannot route to itself");
            }
            TopplingVector vec;
            vec.site = v;
            vec.delta.assign(static_cast<std::size_t>(n), 0);
            vec.delta[static_cast<std::size_t>(v - 1)] = -1;
            if (dest < static_cast<std::size_t>(n)) {
                vec.delta[dest] = 1;
            }
            dist.support.emplace_back(std::move(vec), row[dest]);
        }
        if (total != 1) {
            throw InvalidRouting("site " + std::to_string(v) + ": routing weights sum to " +
                                 format_rational(total));
        }
    }
    return validate_model(n, std::move(topplings));
}

SandpileModel bssm_model(const MultigraphSpec& graph, const Rational& p,
                         NullTopplingPolicy null_policy) {
    const int n = graph.n_sites;
    if (graph.edges.size() != static_cast<std::size_t>(n)) {
        throw InvalidPreset("edge matrix must be n_sites x n_sites");
    }
    for (int k = 1; k <= n; ++k) {
        const auto& row = graph.edges[static_cast<std::size_t>(k - 1)];
        if (row.size() != static_cast<std::size_t>(n)) {
            throw InvalidPreset("edge matrix must be n_sites x n_sites");
        }
        for (int l = 1; l <= n; ++l) {
            if (row[static_cast<std::size_t>(l - 1)] < 0) {
                throw InvalidPreset("negative edge multiplicity");
            }
            if (k != l && row[static_cast<std::size_t>(l - 1)] !=
                              graph.edges[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(k - 1)]) {
                throw InvalidPreset("edge multiplicities must be symmetric");
            }
        }
    }
    if (p <= 0 || p > 1) {
        throw InvalidPreset("p must be in (0, 1]");
    }

    std::vector<TopplingDistribution> topplings(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        const auto& row = graph.edges[static_cast<std::size_t>(k - 1)];
        std::int64_t total_edges = 0;
        for (int l = 1; l <= n; ++l) {
            total_edges += row[static_cast<std::size_t>(l - 1)];
        }
        if (total_edges == 0) {
            throw InvalidPreset("site " + std::to_string(k) + " has no incident edges");
        }

        // Enumerate per-destination firing counts; identical outcome vectors
        // aggregate (binomial weights already group the edge subsets).
        std::map<std::vector<std::int64_t>, Rational> outcomes;
        outcomes.emplace(std::vector<std::int64_t>(static_cast<std::size_t>(n) + 1, 0),
                         Rational(1));
        auto binom = [](std::int64_t d, std::int64_t j) {
            BigInt b = 1;
            for (std::int64_t i = 0; i < j; ++i) {
                b = b * (d - i) / (i + 1);
            }
            return Rational(b);
        };
        auto rat_pow = [](const Rational& base, std::int64_t e) {
            Rational r = 1;
            for (std::int64_t i = 0; i < e; ++i) {
                r *= base;
            }
            return r;
        };
        for (int dest = 1; dest <= n + 1; ++dest) {
            // dest n+1 plays the sink (diagonal multiplicity).
            std::int64_t d = dest <= n ? (dest == k ? 0 : row[static_cast<std::size_t>(dest - 1)])
                                       : row[static_cast<std::size_t>(k - 1)];
            if (d == 0) {
                continue;
            }
            std::map<std::vector<std::int64_t>, Rational> next;
            for (std::int64_t j = 0; j <= d; ++j) {
                Rational w = binom(d, j) * rat_pow(p, j) * rat_pow(1 - p, d - j);
                if (w == 0) {
                    continue;
                }
                for (const auto& [counts, prob] : outcomes) {
                    auto c = counts;
                    c[static_cast<std::size_t>(dest - 1)] += j;
                    next[c] += prob * w;
                }
            }
            outcomes = std::move(next);
        }

        auto& dist = topplings[static_cast<std::size_t>(k - 1)];
        dist.site = k;
        Rational kept = 0;
        for (const auto& [counts, prob] : outcomes) {
            std::int64_t fired = 0;
            for (auto c : counts) {
                fired += c;
            }
            if (fired == 0) {
                continue; // the all-silent outcome is not a toppling
            }
            TopplingVector vec;
            vec.site = k;
            vec.delta.assign(static_cast<std::size_t>(n), 0);
            for (int l = 1; l <= n; ++l) {
                if (l != k) {
                    vec.delta[static_cast<std::size_t>(l - 1)] = counts[static_cast<std::size_t>(l - 1)];
                }
            }
            vec.delta[static_cast<std::size_t>(k - 1)] = -fired;
            dist.support.emplace_back(std::move(vec), prob);
            kept += prob;
        }
        if (kept != 1) {
            if (null_policy == NullTopplingPolicy::Reject) {
                throw NullTopplingNotRepresentable(
                    "site " + std::to_string(k) +
                    ": the all-silent Bernoulli outcome has positive probability at p = " +
                    format_rational(p));
            }
            for (auto& [vec, prob] : dist.support) {
                prob /= kept;
            }
        }
    }
    return validate_model(n, std::move(topplings));
}

Fixture paper_triangle_ssm(const Rational& alpha, const Rational& beta, const Rational& gamma,
                           const Rational& mu_v) {
    if (alpha < 0 || beta < 0 || gamma < 0 || alpha + beta + gamma != 1) {
        throw ProbabilitiesDoNotSumToOne("alpha + beta + gamma must equal 1, all nonnegative");
    }
    if (gamma == 0) {
        throw InvalidPreset("gamma must be positive");
    }
    if (mu_v < 0 || mu_v > 1) {
        throw ProbabilitiesDoNotSumToOne("mu_v must be in [0, 1]");
    }

    std::vector<TopplingDistribution> topplings(2);
    for (int v = 1; v <= 2; ++v) {
        int w = 3 - v;
        auto& dist = topplings[static_cast<std::size_t>(v - 1)];
        dist.site = v;
        auto card = [&](std::int64_t dv, std::int64_t dw, const Rational& prob) {
            if (prob == 0) {
                return;
            }
            TopplingVector vec;
            vec.site = v;
            vec.delta.assign(2, 0);
            vec.delta[static_cast<std::size_t>(v - 1)] = dv;
            vec.delta[static_cast<std::size_t>(w - 1)] = dw;
            dist.support.emplace_back(std::move(vec), prob);
        };
        card(-1, 0, alpha); // one grain to the sink
        card(-1, 1, beta);  // one grain to the other site
        card(-2, 1, gamma); // one grain to each
    }
    Fixture f;
    f.model = validate_model(2, std::move(topplings));
    f.mu = validate_mu(2, {mu_v, 1 - mu_v});
    return f;
}

Fixture paper_triangle_asm(const Rational& alpha) {
    if (alpha < 0 || alpha > 1) {
        throw ProbabilitiesDoNotSumToOne("alpha must be in [0, 1]");
    }
    std::vector<TopplingDistribution> topplings(2);
    for (int v = 1; v <= 2; ++v) {
        int w = 3 - v;
        TopplingVector vec;
        vec.site = v;
        vec.delta.assign(2, 0);
        vec.delta[static_cast<std::size_t>(v - 1)] = -2;
        vec.delta[static_cast<std::size_t>(w - 1)] = 1;
        topplings[static_cast<std::size_t>(v - 1)].site = v;
        topplings[static_cast<std::size_t>(v - 1)].support.emplace_back(std::move(vec), Rational(1));
    }
    Fixture f;
    f.model = validate_model(2, std::move(topplings));
    f.mu = validate_mu(2, {alpha, 1 - alpha});
    return f;
}

} // namespace sandpile
