#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corex/concept_select.hpp"
#include "corex/ilp.hpp"

namespace corex {

struct Confusion {
    std::uint32_t tp = 0, tn = 0, fp = 0, fn = 0;
    bool operator==(const Confusion&) const = default;
};

struct EvaluationReport {
    double fidelity = 0.0;
    Confusion confusion;
    double f1 = 0.0;
};

double fidelity(const std::vector<Label>& model_truth, const std::vector<Label>& explainer_truth);

/// Confusion of `predicted` against `ground_truth`; positions whose ground
/// truth is unknown are skipped.
Confusion confusion(const std::vector<Label>& ground_truth, const std::vector<Label>& predicted);
double f1_score(const Confusion& c);  // 0 when precision + recall is 0

/// Classifier stand-in used by the masking protocol.
struct ModelOracle {
    std::function<Label(const SampleRecord&)> classify;
    bool thread_safe = false;
};

enum class MaskLabel { rule_plus_nonbk, nonbk_only, custom };

std::string_view to_string(MaskLabel label);
MaskLabel parse_mask_label(std::string_view text);

struct MaskSpec {
    std::set<ConceptId> masked_concepts;
    MaskLabel label = MaskLabel::custom;
};

/// The two named masks: rule + non-BK concepts, or non-BK concepts only.
MaskSpec make_mask(MaskLabel label, const ConceptPartition& partition);

/// Copy of `dataset` with every grid of a masked concept zeroed.
Dataset apply_mask(const Dataset& dataset, const std::set<ConceptId>& masked_concepts);

/// Re-labels the masked dataset with `oracle`. Fidelity is measured against
/// the unmasked model truth, F1 against ground truth.
EvaluationReport ablate(const Dataset& dataset, const MaskSpec& spec, const ModelOracle& oracle);

using ClusterMap = std::map<std::set<std::size_t>, std::vector<std::string>>;

/// Groups samples by the set of clauses covering them.
ClusterMap clusters(const Theory& theory, const KnowledgeBase& kb);

struct RankHistogram {
    std::optional<ConceptId> concept_id;  // nullopt for the pooled histogram
    std::vector<std::pair<std::uint32_t, std::uint32_t>> top_ranks;  // (rank, count), count desc then rank asc
    std::uint32_t samples = 0;
};

struct RankReport {
    std::vector<RankHistogram> per_concept;
    RankHistogram pooled;
    std::uint32_t possible_ranks = 0;  // max concepts in one sample
};

/// Ranks (by |sum|, 1-based, ties by concept id) of the concepts used in the
/// `top_rules` clauses with most positive coverage.
RankReport rank_analysis(const Dataset& dataset, const Theory& theory, std::size_t top_rules = 3);

struct ContrastiveReport {
    std::string sample_id;
    std::size_t clause_index = 0;
    std::vector<Literal> failing_literals;
    std::string verbalization;
};

using ConceptLabels = std::map<ConceptId, std::string>;

/// Index of the clause with most positive coverage (lowest index on ties).
std::size_t best_clause(const Theory& theory);

ContrastiveReport contrastive(const Theory& theory, const std::string& sample_id, const std::set<Literal>& sample_facts,
                              std::optional<std::size_t> clause_index = std::nullopt,
                              const ConceptLabels& labels = {});

std::string verbalize_concept(const SignedConcept& c, const ConceptLabels& labels);
std::string verbalize_literal(const Literal& literal, const ConceptLabels& labels);
std::string verbalize(const Clause& clause, const std::string& class_name, const ConceptLabels& labels = {});
/// With `sample_facts`, failures caused by an absent concept are reported as
/// "missing: ...".
std::string verbalize(const ContrastiveReport& report, const ConceptLabels& labels = {},
                      const std::set<Literal>* sample_facts = nullptr);

}  // namespace corex
