#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "corex/concept_select.hpp"
#include "fixtures.hpp"

using namespace corex;

namespace {

std::set<ConceptId> ids(const std::vector<ConceptScore>& scores)
{
    std::set<ConceptId> out;
    for (const auto& s : scores) out.insert(s.concept_id);
    return out;
}

// Sorted-list quantile written out directly.
double quantile_ref(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    std::size_t i = 0;
    while (static_cast<double>(i) < q * static_cast<double>(v.size() - 1) - 1e-9) ++i;
    return v[std::min(i, v.size() - 1)];
}

}  // namespace

TEST_CASE("scores are pixel sums with a sign")
{
    SampleRecord s;
    s.sample_id = "s";
    s.grids = {fixture::grid(0, 2, 2, {1.f, -0.5f, 0.25f, 0.25f}), fixture::constant(1, 2, 2, 0.f),
               fixture::constant(2, 2, 2, -1.f)};
    const auto scores = score_concepts(s);
    REQUIRE(scores.size() == 3);
    CHECK(scores[0].total_relevance == doctest::Approx(1.0));
    CHECK(scores[0].sign == Sign::pos);
    CHECK(scores[1].sign == Sign::null);
    CHECK(scores[2].total_relevance == doctest::Approx(-4.0));
    CHECK(scores[2].sign == Sign::neg);
}

TEST_CASE("zero band is relative to the largest magnitude")
{
    const auto s = fixture::sample_with_sums("s", {100.0, 0.05, -0.2});
    const auto scores = score_concepts(s, 1e-3);
    CHECK(scores[1].sign == Sign::null);
    CHECK(scores[2].sign == Sign::neg);
}

TEST_CASE("quantile filter keeps the upper part")
{
    const auto s = fixture::sample_with_sums("s", {1, 2, 3, 4});
    SelectionConfig cfg;
    cfg.bk_quantile = 0.5;
    CHECK(ids(filter_concepts(s, cfg)) == std::set<ConceptId>{2, 3});
    cfg.bk_quantile = 0.0;
    CHECK(ids(filter_concepts(s, cfg)).size() == 4);
    cfg.bk_quantile = 1.0;
    CHECK(ids(filter_concepts(s, cfg)) == std::set<ConceptId>{3});
}

TEST_CASE("null concepts never pass, even at q = 0")
{
    const auto s = fixture::sample_with_sums("s", {0, 2, -3});
    SelectionConfig cfg;
    cfg.bk_quantile = 0.0;
    CHECK(ids(filter_concepts(s, cfg)) == std::set<ConceptId>{1, 2});
}

TEST_CASE("property: filter matches a direct quantile computation")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> val(-10, 10);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> sums(1 + rng() % 12);
        for (auto& v : sums) v = std::round(val(rng) * 4) / 4;  // ties are common
        SelectionConfig cfg;
        cfg.bk_quantile = static_cast<double>(rng() % 11) / 10.0;
        const auto s = fixture::sample_with_sums("s", sums);
        std::vector<double> mags;
        for (double v : sums) mags.push_back(std::abs(v));
        const double t = quantile_ref(mags, cfg.bk_quantile);
        const double maxabs = *std::max_element(mags.begin(), mags.end());
        std::set<ConceptId> expected;
        for (std::size_t i = 0; i < sums.size(); ++i)
            if (std::abs(sums[i]) >= t && std::abs(sums[i]) > cfg.zero_band * maxabs)
                expected.insert(static_cast<ConceptId>(i));
        CHECK(ids(filter_concepts(s, cfg)) == expected);
    }
}

TEST_CASE("property: raising q never adds concepts")
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> val(0, 3);
    for (int round = 0; round < 100; ++round) {
        std::vector<double> sums(2 + rng() % 10);
        for (auto& v : sums) v = val(rng);
        const auto s = fixture::sample_with_sums("s", sums);
        std::set<ConceptId> prev = ids(filter_concepts(s, {0.0}));
        for (double q = 0.1; q <= 1.0001; q += 0.1) {
            const auto cur = ids(filter_concepts(s, {std::min(q, 1.0)}));
            CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
            CHECK_FALSE(cur.empty());
            prev = cur;
        }
    }
}

TEST_CASE("dataset scope uses one pooled threshold")
{
    Dataset d;
    d.samples = {fixture::sample_with_sums("a", {1, 2}), fixture::sample_with_sums("b", {3, 4})};
    SelectionConfig cfg;
    cfg.bk_quantile = 0.5;
    CHECK(dataset_threshold(d, cfg) == doctest::Approx(3.0));
    cfg.scope = QuantileScope::dataset;
    const auto per = filter_dataset(d, cfg);
    CHECK(per[0].empty());
    CHECK(ids(per[1]) == std::set<ConceptId>{0, 1});
    cfg.scope = QuantileScope::per_sample;
    const auto local = filter_dataset(d, cfg);
    CHECK(ids(local[0]) == std::set<ConceptId>{1});
}

TEST_CASE("partition splits observed concepts three ways")
{
    Dataset d;
    auto s = fixture::sample_with_sums("a", {0, 5, 0, 0, 0, 0, 0, 0, 0, 0});
    // concept ids: 7 low, 9 and 30 high
    s.grids = {fixture::constant(7, 1, 1, 0.1f), fixture::constant(9, 1, 1, 5.f), fixture::constant(30, 1, 1, 4.f)};
    d.samples = {s};
    SelectionConfig cfg;
    const auto p = partition_concepts(d, cfg, {9});
    CHECK(p.rule_concepts == std::set<ConceptId>{9});
    CHECK(p.bk_concepts == std::set<ConceptId>{30});
    CHECK(p.irrelevant_concepts == std::set<ConceptId>{7});

    const auto empty = partition_concepts(d, cfg, {});
    CHECK(empty.rule_concepts.empty());
    CHECK(empty.bk_concepts == std::set<ConceptId>{9, 30});

    try {
        partition_concepts(d, cfg, {7});
        FAIL("expected InconsistentTheory");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::inconsistent_theory);
    }
}

TEST_CASE("property: partition sets are disjoint and cover every concept")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset d = fixture::random_dataset(seed, 8, 6, 3, 3);
        SelectionConfig cfg;
        cfg.bk_quantile = 0.6;
        std::set<ConceptId> filtered;
        for (const auto& v : filter_dataset(d, cfg))
            for (const auto& s : v) filtered.insert(s.concept_id);
        std::set<ConceptId> theory;
        for (ConceptId c : filtered)
            if (c % 2 == 0) theory.insert(c);
        const auto p = partition_concepts(d, cfg, theory);
        std::set<ConceptId> all;
        for (auto* part : {&p.rule_concepts, &p.bk_concepts, &p.irrelevant_concepts})
            for (ConceptId c : *part) CHECK(all.insert(c).second);
        CHECK(all.size() == 6);
    }
}

TEST_CASE("invalid selection settings are rejected")
{
    CHECK_THROWS_AS((SelectionConfig{1.5}.validate()), Error);
    CHECK_THROWS_AS((SelectionConfig{0.5, -1.0}.validate()), Error);
}
