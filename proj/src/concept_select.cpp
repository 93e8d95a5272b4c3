#include "corex/concept_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace corex {

void SelectionConfig::validate() const
{
    if (!(bk_quantile >= 0.0 && bk_quantile <= 1.0))
        throw Error(ErrorCode::config, "bk_quantile must lie in [0, 1]");
    if (!(zero_band >= 0.0)) throw Error(ErrorCode::config, "zero_band must be non-negative");
}

std::vector<ConceptScore> score_concepts(const SampleRecord& sample, double zero_band)
{
    std::vector<ConceptScore> scores;
    scores.reserve(sample.grids.size());
    double max_abs = 0.0;
    for (const auto& grid : sample.grids) {
        const double sum = std::accumulate(grid.values.begin(), grid.values.end(), 0.0);
        scores.push_back({grid.concept_id, sum, Sign::null});
        max_abs = std::max(max_abs, std::abs(sum));
    }
    const double eps = zero_band * max_abs;
    for (auto& s : scores) {
        if (s.total_relevance > eps) s.sign = Sign::pos;
        else if (s.total_relevance < -eps) s.sign = Sign::neg;
    }
    return scores;
}

double nearest_rank_quantile(std::vector<double> values, double q)
{
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    // The 1e-9 slack keeps q * (n - 1) values like 3.0000000000000004 on index 3.
    const double raw = q * static_cast<double>(values.size() - 1);
    auto index = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    index = std::min(index, values.size() - 1);
    return values[index];
}

std::vector<ConceptScore> filter_concepts(const SampleRecord& sample, const SelectionConfig& cfg,
                                          std::optional<double> threshold)
{
    auto scores = score_concepts(sample, cfg.zero_band);
    if (!threshold) {
        std::vector<double> magnitudes;
        magnitudes.reserve(scores.size());
        for (const auto& s : scores) magnitudes.push_back(std::abs(s.total_relevance));
        threshold = nearest_rank_quantile(std::move(magnitudes), cfg.bk_quantile);
    }
    std::erase_if(scores, [&](const ConceptScore& s) {
        return s.sign == Sign::null || std::abs(s.total_relevance) < *threshold;
    });
    return scores;
}

double dataset_threshold(const Dataset& dataset, const SelectionConfig& cfg)
{
    std::vector<double> magnitudes;
    for (const auto& sample : dataset.samples)
        for (const auto& s : score_concepts(sample, cfg.zero_band)) magnitudes.push_back(std::abs(s.total_relevance));
    return nearest_rank_quantile(std::move(magnitudes), cfg.bk_quantile);
}

std::vector<std::vector<ConceptScore>> filter_dataset(const Dataset& dataset, const SelectionConfig& cfg)
{
    std::optional<double> threshold;
    if (cfg.scope == QuantileScope::dataset) threshold = dataset_threshold(dataset, cfg);
    std::vector<std::vector<ConceptScore>> out;
    out.reserve(dataset.samples.size());
    for (const auto& sample : dataset.samples) out.push_back(filter_concepts(sample, cfg, threshold));
    return out;
}

ConceptPartition partition_concepts(const Dataset& dataset, const SelectionConfig& cfg,
                                    const std::set<ConceptId>& theory_concepts)
{
    std::set<ConceptId> observed;
    std::set<ConceptId> filtered;
    const auto per_sample = filter_dataset(dataset, cfg);
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        for (const auto& g : dataset.samples[i].grids) observed.insert(g.concept_id);
        for (const auto& s : per_sample[i]) filtered.insert(s.concept_id);
    }
    for (ConceptId c : theory_concepts)
        if (!filtered.contains(c))
            throw Error(ErrorCode::inconsistent_theory,
                        "theory concept c" + std::to_string(c) + " never passes the relevance filter");

    ConceptPartition p;
    p.rule_concepts = theory_concepts;
    std::set_difference(filtered.begin(), filtered.end(), theory_concepts.begin(), theory_concepts.end(),
                        std::inserter(p.bk_concepts, p.bk_concepts.end()));
    std::set_difference(observed.begin(), observed.end(), filtered.begin(), filtered.end(),
                        std::inserter(p.irrelevant_concepts, p.irrelevant_concepts.end()));
    return p;
}

}  // namespace corex
