#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "sandpile/model.hpp"
#include "sandpile/presets.hpp"

using namespace sandpile;
using namespace sandpile::testing;

namespace {

TopplingDistribution dist(int site, std::initializer_list<std::pair<std::vector<std::int64_t>, Rational>> cards) {
    TopplingDistribution d;
    d.site = site;
    for (const auto& [delta, prob] : cards) {
        TopplingVector vec;
        vec.site = site;
        vec.delta = delta;
        d.support.emplace_back(std::move(vec), prob);
    }
    return d;
}

// Two sites that only exchange grains with each other; nothing ever leaves.
SandpileModel exchange_only_model() {
    return validate_model(2, {dist(1, {{{-1, 1}, 1}}), dist(2, {{{1, -1}, 1}})});
}

// Chain 3 -> 2 -> 1 -> sink, one grain at a time.
SandpileModel three_site_chain() {
    return validate_model(3, {dist(1, {{{-1, 0, 0}, 1}}), dist(2, {{{1, -1, 0}, 1}}),
                              dist(3, {{{0, 1, -1}, 1}})});
}

} // namespace

TEST_CASE("validate_model accepts a minimal single-card site") {
    auto model = validate_model(2, {dist(1, {{{-1, 0}, 1}}), dist(2, {{{0, -1}, 1}})});
    CHECK(model.thresholds == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("validate_model rejects a positive-sum toppling vector") {
    CHECK_THROWS_AS(validate_model(2, {dist(1, {{{-1, 2}, 1}}), dist(2, {{{0, -1}, 1}})}),
                    InvalidTopplingVector);
}

TEST_CASE("validate_model rejects a nonnegative entry at the toppling site") {
    CHECK_THROWS_AS(validate_model(2, {dist(1, {{{0, 0}, 1}}), dist(2, {{{0, -1}, 1}})}),
                    InvalidTopplingVector);
    CHECK_THROWS_AS(validate_model(2, {dist(1, {{{-1, -1}, 1}}), dist(2, {{{0, -1}, 1}})}),
                    InvalidTopplingVector);
}

TEST_CASE("validate_model rejects bad probabilities and duplicate vectors") {
    CHECK_THROWS_AS(validate_model(1, {dist(1, {{{-1}, Rational(1, 2)}})}),
                    ProbabilitiesDoNotSumToOne);
    CHECK_THROWS_AS(
        validate_model(1, {dist(1, {{{-1}, Rational(1, 2)}, {{-1}, Rational(1, 2)}})}),
        DuplicateSupportVector);
    CHECK_THROWS_AS(validate_model(1, {dist(1, {})}), EmptySupport);
}

TEST_CASE("triangle model of the worked example validates with thresholds (2,2)") {
    auto fixture = paper_triangle_ssm(Rational(1, 4), Rational(1, 4), Rational(1, 2));
    CHECK(fixture.model.thresholds == std::vector<std::int64_t>{2, 2});
    CHECK(fixture.model.topplings[0].support.size() == 3);
    CHECK(fixture.model.topplings[1].support.size() == 3);
}

TEST_CASE("is_stable and unstable_sites") {
    auto fixture = paper_triangle_ssm(Rational(1, 4), Rational(1, 4), Rational(1, 2));
    CHECK(is_stable(fixture.model, {2, 2}));
    CHECK_FALSE(is_stable(fixture.model, {3, 1}));
    CHECK(unstable_sites(fixture.model, {3, 1}) == std::vector<int>{1});
    CHECK(unstable_sites(fixture.model, {3, 3}) == std::vector<int>{1, 2});
    CHECK(unstable_sites(fixture.model, {2, 2}).empty());
}

TEST_CASE("add_grain") {
    CHECK(add_grain({1, 1}, 2) == Config{1, 2});
    CHECK(add_grain({2, 2}, 1) == Config{3, 2});
    auto fixture = paper_triangle_ssm(Rational(1, 4), Rational(1, 4), Rational(1, 2));
    CHECK_FALSE(is_stable(fixture.model, add_grain({2, 2}, 1)));
}

TEST_CASE("dissipativity: direct-to-sink sites form one layer") {
    auto model = validate_model(2, {dist(1, {{{-1, 0}, 1}}), dist(2, {{{0, -1}, 1}})});
    auto report = dissipativity(model);
    CHECK(report.satisfied);
    CHECK(report.depth == 1);
    REQUIRE(report.layers.size() == 1);
    CHECK(report.layers[0] == std::vector<int>{1, 2});
}

TEST_CASE("dissipativity: three-site chain peels one site per layer") {
    auto report = dissipativity(three_site_chain());
    CHECK(report.satisfied);
    CHECK(report.depth == 3);
    REQUIRE(report.layers.size() == 3);
    CHECK(report.layers[0] == std::vector<int>{1});
    CHECK(report.layers[1] == std::vector<int>{2});
    CHECK(report.layers[2] == std::vector<int>{3});
}

TEST_CASE("dissipativity: exchange-only pair is not dissipative") {
    auto report = dissipativity(exchange_only_model());
    CHECK_FALSE(report.satisfied);
    CHECK(report.witness == std::vector<int>{1, 2});
    CHECK(witness_is_valid(exchange_only_model(), report.witness));
}

TEST_CASE("dissipativity of the degenerate empty model") {
    auto model = validate_model(0, {});
    auto report = dissipativity(model);
    CHECK(report.satisfied);
    CHECK(report.depth == 0);
}

TEST_CASE("thresholds are the maximal per-card loss and at least 1") {
    ModelGen gen(2024);
    for (int i = 0; i < 50; ++i) {
        auto model = gen.next({4, 3, 8, false});
        auto recomputed = compute_thresholds(model.n_sites, model.topplings);
        CHECK(model.thresholds == recomputed);
        for (auto m : model.thresholds) {
            CHECK(m >= 1);
        }
    }
}

TEST_CASE("layered fixpoint agrees with brute-force subset enumeration") {
    ModelGen gen(7);
    int negatives = 0;
    for (int i = 0; i < 200; ++i) {
        auto model = gen.next({6, 3, 8, false});
        auto report = dissipativity(model);
        CHECK(report.satisfied == dissipative_brute_force(model));
        if (report.satisfied) {
            // Layers partition the site set.
            std::set<int> all;
            for (const auto& layer : report.layers) {
                for (int v : layer) {
                    CHECK(all.insert(v).second);
                }
            }
            CHECK(all.size() == static_cast<std::size_t>(model.n_sites));
            CHECK(report.depth == static_cast<int>(report.layers.size()));
            // G_1 is exactly the set of sites with a strictly leaky card.
            std::vector<int> g1;
            for (int v = 1; v <= model.n_sites; ++v) {
                for (const auto& [vec, prob] :
                     model.topplings[static_cast<std::size_t>(v - 1)].support) {
                    if (vec.sink_deficit() > 0) {
                        g1.push_back(v);
                        break;
                    }
                }
            }
            CHECK(report.layers.front() == g1);
        } else {
            ++negatives;
            CHECK(witness_is_valid(model, report.witness));
        }
    }
    CHECK(negatives > 0); // the corpus must exercise both outcomes
}

TEST_CASE("configuration validation rejects zero grains") {
    auto model = validate_model(2, {dist(1, {{{-1, 0}, 1}}), dist(2, {{{0, -1}, 1}})});
    CHECK_THROWS_AS(validate_config(model, {0, 1}), InvalidConfiguration);
    CHECK_THROWS_AS(validate_config(model, {1}), InvalidConfiguration);
    CHECK_NOTHROW(validate_config(model, {1, 1}));
}
