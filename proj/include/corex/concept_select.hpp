#pragma once

#include <optional>
#include <set>
#include <vector>

#include "corex/core.hpp"

namespace corex {

enum class QuantileScope { per_sample, dataset };

struct SelectionConfig {
    double bk_quantile = 0.5;
    double zero_band = 1e-6;  // fraction of the sample's max |sum|
    QuantileScope scope = QuantileScope::per_sample;

    void validate() const;
};

struct ConceptPartition {
    std::set<ConceptId> rule_concepts;
    std::set<ConceptId> bk_concepts;
    std::set<ConceptId> irrelevant_concepts;
};

/// One score per grid: pixel sum and its sign under the zero band.
std::vector<ConceptScore> score_concepts(const SampleRecord& sample, double zero_band = 1e-6);

/// Nearest-rank quantile: element ceil(q * (n - 1)) of the ascending values.
double nearest_rank_quantile(std::vector<double> values, double q);

/// Retains non-null concepts whose |sum| reaches the quantile threshold. With
/// `threshold` set, that absolute value replaces the per-sample quantile
/// (dataset-scope selection).
std::vector<ConceptScore> filter_concepts(const SampleRecord& sample, const SelectionConfig& cfg,
                                          std::optional<double> threshold = std::nullopt);

/// Quantile of |sum| over every concept of every sample.
double dataset_threshold(const Dataset& dataset, const SelectionConfig& cfg);

/// Filtered concepts of every sample, honoring cfg.scope.
std::vector<std::vector<ConceptScore>> filter_dataset(const Dataset& dataset, const SelectionConfig& cfg);

ConceptPartition partition_concepts(const Dataset& dataset, const SelectionConfig& cfg,
                                    const std::set<ConceptId>& theory_concepts);

}  // namespace corex
