#pragma once

#include "sandpile/model.hpp"

#include <cstdint>
#include <vector>

namespace sandpile {

/// Undirected multigraph on the sites: edges[k-1][l-1] edges between k and l
/// (symmetric), diagonal entries counting edges to the sink.
struct MultigraphSpec {
    int n_sites = 0;
    std::vector<std::vector<std::int64_t>> edges;
};

enum class NullTopplingPolicy {
    Renormalize, // condition on at least one edge firing
    Reject,      // error unless p = 1
};

/// Model where every toppling moves exactly one grain: routing[v-1] has N+1
/// entries, destination weights for sites 1..N then the sink; row v must be a
/// probability distribution with routing[v-1][v-1] = 0.
SandpileModel single_grain_model(int n, const std::vector<std::vector<Rational>>& routing);

/// Bernoulli stochastic sandpile on a multigraph: when site k topples, each
/// incident edge independently carries a grain with probability p. The
/// all-silent outcome is not a valid toppling; it is renormalized away or
/// rejected per `null_policy`. p = 1 gives the deterministic sandpile model.
SandpileModel bssm_model(const MultigraphSpec& graph, const Rational& p,
                         NullTopplingPolicy null_policy = NullTopplingPolicy::Renormalize);

/// Model fixture together with its canonical grain-addition law.
struct Fixture {
    SandpileModel model;
    AdditionDistribution mu;
};

/// Two sites joined to each other and to a sink. Each site's cards: lose one
/// grain to the sink (alpha), give one grain to the other site (beta), or
/// give one to each (gamma). Requires alpha + beta + gamma = 1 and gamma > 0.
/// Grains are added at the first site with probability mu_v.
Fixture paper_triangle_ssm(const Rational& alpha, const Rational& beta, const Rational& gamma,
                           const Rational& mu_v = Rational(1, 3));

/// Deterministic variant: each toppling gives one grain to the other site and
/// one to the sink. Grains are added at the first site with probability alpha.
Fixture paper_triangle_asm(const Rational& alpha);

} // namespace sandpile
