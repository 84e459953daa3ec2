#include "sandpile/model.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

namespace sandpile {

namespace {

std::string site_tag(int v) {
    return "site " + std::to_string(v);
}

} // namespace

std::int64_t TopplingVector::sink_deficit() const {
    std::int64_t total = std::accumulate(delta.begin(), delta.end(), std::int64_t{0});
    return -total;
}

std::vector<std::int64_t> compute_thresholds(int n_sites,
                                             const std::vector<TopplingDistribution>& topplings) {
    std::vector<std::int64_t> thresholds(static_cast<std::size_t>(n_sites), 0);
    for (int v = 1; v <= n_sites; ++v) {
        std::int64_t m = 0;
        for (const auto& [vec, prob] : topplings[static_cast<std::size_t>(v - 1)].support) {
            m = std::max(m, -vec.delta[static_cast<std::size_t>(v - 1)]);
        }
        thresholds[static_cast<std::size_t>(v - 1)] = m;
    }
    return thresholds;
}

SandpileModel validate_model(int n_sites, std::vector<TopplingDistribution> topplings) {
    if (n_sites < 0) {
        throw InvalidConfiguration("n_sites must be nonnegative");
    }
    if (topplings.size() != static_cast<std::size_t>(n_sites)) {
        throw EmptySupport("expected one toppling distribution per site, got " +
                           std::to_string(topplings.size()) + " for " + std::to_string(n_sites) +
                           " sites");
    }

    for (int v = 1; v <= n_sites; ++v) {
        auto& dist = topplings[static_cast<std::size_t>(v - 1)];
        dist.site = v;
        if (dist.support.empty()) {
            throw EmptySupport(site_tag(v) + ": empty toppling support");
        }

        Rational total = 0;
        std::set<std::vector<std::int64_t>> seen;
        int entry = 0;
        for (auto& [vec, prob] : dist.support) {
            ++entry;
            vec.site = v;
            const std::string tag = site_tag(v) + ", support entry " + std::to_string(entry);
            if (vec.delta.size() != static_cast<std::size_t>(n_sites)) {
                throw InvalidTopplingVector(tag + ": delta has length " +
                                            std::to_string(vec.delta.size()) + ", expected " +
                                            std::to_string(n_sites));
            }
            if (vec.delta[static_cast<std::size_t>(v - 1)] >= 0) {
                throw InvalidTopplingVector(tag + ": toppling site must lose grains");
            }
            std::int64_t sum = 0;
            for (int w = 1; w <= n_sites; ++w) {
                std::int64_t d = vec.delta[static_cast<std::size_t>(w - 1)];
                if (w != v && d < 0) {
                    throw InvalidTopplingVector(tag + ": negative delta at site " +
                                                std::to_string(w));
                }
                sum += d;
            }
            if (sum > 0) {
                throw InvalidTopplingVector(tag + ": total delta is positive");
            }
            if (prob <= 0 || prob > 1) {
                throw ProbabilitiesDoNotSumToOne(tag + ": probability must be in (0, 1]");
            }
            if (!seen.insert(vec.delta).second) {
                throw DuplicateSupportVector(tag + ": repeated support vector");
            }
            total += prob;
        }
        if (total != 1) {
            throw ProbabilitiesDoNotSumToOne(site_tag(v) + ": support probabilities sum to " +
                                             format_rational(total));
        }
    }

    SandpileModel model;
    model.n_sites = n_sites;
    model.topplings = std::move(topplings);
    model.thresholds = compute_thresholds(n_sites, model.topplings);
    return model;
}

AdditionDistribution validate_mu(int n_sites, std::vector<Rational> weights) {
    if (weights.size() != static_cast<std::size_t>(n_sites)) {
        throw DimensionMismatch("mu has length " + std::to_string(weights.size()) +
                                ", expected " + std::to_string(n_sites));
    }
    Rational total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0) {
            throw ProbabilitiesDoNotSumToOne("mu entry " + std::to_string(i + 1) +
                                             " is negative");
        }
        total += weights[i];
    }
    if (total != 1) {
        throw ProbabilitiesDoNotSumToOne("mu entries sum to " + format_rational(total));
    }
    return AdditionDistribution{std::move(weights)};
}

void validate_config(const SandpileModel& model, const Config& eta) {
    if (eta.size() != static_cast<std::size_t>(model.n_sites)) {
        throw InvalidConfiguration("configuration has length " + std::to_string(eta.size()) +
                                   ", expected " + std::to_string(model.n_sites));
    }
    for (int v = 1; v <= model.n_sites; ++v) {
        if (eta[static_cast<std::size_t>(v - 1)] < 1) {
            throw InvalidConfiguration(site_tag(v) + ": grain count must be >= 1");
        }
    }
}

bool is_stable(const SandpileModel& model, const Config& eta) {
    for (int v = 1; v <= model.n_sites; ++v) {
        if (eta[static_cast<std::size_t>(v - 1)] > model.thresholds[static_cast<std::size_t>(v - 1)]) {
            return false;
        }
    }
    return true;
}

std::vector<int> unstable_sites(const SandpileModel& model, const Config& eta) {
    std::vector<int> sites;
    for (int v = 1; v <= model.n_sites; ++v) {
        if (eta[static_cast<std::size_t>(v - 1)] > model.thresholds[static_cast<std::size_t>(v - 1)]) {
            sites.push_back(v);
        }
    }
    return sites;
}

DissipativityReport dissipativity(const SandpileModel& model) {
    DissipativityReport report;

    std::set<int> remaining;
    for (int v = 1; v <= model.n_sites; ++v) {
        remaining.insert(v);
    }

    // Peel: G_{n+1} = sites of H_n with a card whose total over H_n is
    // negative, H_{n+1} = H_n \ G_{n+1}.
    while (!remaining.empty()) {
        std::vector<int> layer;
        for (int v : remaining) {
            bool leaks = false;
            for (const auto& [vec, prob] : model.topplings[static_cast<std::size_t>(v - 1)].support) {
                std::int64_t sum_in = 0;
                for (int w : remaining) {
                    sum_in += vec.delta[static_cast<std::size_t>(w - 1)];
                }
                if (sum_in < 0) {
                    leaks = true;
                    break;
                }
            }
            if (leaks) {
                layer.push_back(v);
            }
        }
        if (layer.empty()) {
            break;
        }
        for (int v : layer) {
            remaining.erase(v);
        }
        report.layers.push_back(std::move(layer));
    }

    report.satisfied = remaining.empty();
    report.depth = static_cast<int>(report.layers.size());
    if (!report.satisfied) {
        report.witness.assign(remaining.begin(), remaining.end());
    }
    return report;
}

Config add_grain(Config eta, int k) {
    eta[static_cast<std::size_t>(k - 1)] += 1;
    return eta;
}

} // namespace sandpile
