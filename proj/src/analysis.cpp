#include "corex/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

namespace corex {

double fidelity(const std::vector<Label>& model_truth, const std::vector<Label>& explainer_truth)
{
    if (model_truth.empty() || model_truth.size() != explainer_truth.size())
        throw Error(ErrorCode::invalid_input, "fidelity needs two non-empty label sequences of equal length");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < model_truth.size(); ++i) agree += model_truth[i] == explainer_truth[i];
    return static_cast<double>(agree) / static_cast<double>(model_truth.size());
}

Confusion confusion(const std::vector<Label>& ground_truth, const std::vector<Label>& predicted)
{
    if (ground_truth.size() != predicted.size())
        throw Error(ErrorCode::invalid_input, "confusion needs label sequences of equal length");
    Confusion c;
    for (std::size_t i = 0; i < ground_truth.size(); ++i) {
        if (ground_truth[i] == Label::unknown) continue;
        const bool truth = ground_truth[i] == Label::positive;
        const bool guess = predicted[i] == Label::positive;
        if (truth && guess) ++c.tp;
        else if (!truth && !guess) ++c.tn;
        else if (guess) ++c.fp;
        else ++c.fn;
    }
    return c;
}

double f1_score(const Confusion& c)
{
    const double precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / (c.tp + c.fp);
    const double recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / (c.tp + c.fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

std::string_view to_string(MaskLabel label)
{
    switch (label) {
    case MaskLabel::rule_plus_nonbk: return "rule_plus_nonbk";
    case MaskLabel::nonbk_only: return "nonbk_only";
    case MaskLabel::custom: return "custom";
    }
    return "custom";
}

MaskLabel parse_mask_label(std::string_view text)
{
    if (text == "rule_plus_nonbk") return MaskLabel::rule_plus_nonbk;
    if (text == "nonbk_only") return MaskLabel::nonbk_only;
    if (text == "custom") return MaskLabel::custom;
    throw Error(ErrorCode::invalid_input, "unknown mask label '" + std::string(text) + "'");
}

MaskSpec make_mask(MaskLabel label, const ConceptPartition& partition)
{
    MaskSpec spec;
    spec.label = label;
    if (label == MaskLabel::custom) return spec;
    spec.masked_concepts = partition.irrelevant_concepts;
    if (label == MaskLabel::rule_plus_nonbk)
        spec.masked_concepts.insert(partition.rule_concepts.begin(), partition.rule_concepts.end());
    if (spec.masked_concepts.empty())
        throw Error(ErrorCode::invalid_input, "mask '" + std::string(to_string(label)) + "' selects no concept");
    return spec;
}

Dataset apply_mask(const Dataset& dataset, const std::set<ConceptId>& masked_concepts)
{
    Dataset out = dataset;
    for (auto& sample : out.samples)
        for (auto& grid : sample.grids)
            if (masked_concepts.contains(grid.concept_id)) std::fill(grid.values.begin(), grid.values.end(), 0.0f);
    return out;
}

EvaluationReport ablate(const Dataset& dataset, const MaskSpec& spec, const ModelOracle& oracle)
{
    if (!oracle.classify) throw Error(ErrorCode::oracle, "no model oracle supplied");
    const Dataset masked = apply_mask(dataset, spec.masked_concepts);
    const auto n = masked.samples.size();
    std::vector<Label> predicted(n, Label::negative);
    std::vector<std::exception_ptr> failures(n);

    auto run_one = [&](std::size_t i) {
        try {
            predicted[i] = oracle.classify(masked.samples[i]);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };
    if (oracle.thread_safe) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(n); ++i) run_one(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) run_one(i);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
            throw Error(ErrorCode::oracle, "oracle failed on '" + masked.samples[i].sample_id + "': " + e.what());
        }
    }

    std::vector<Label> model_truth, ground_truth;
    for (const auto& s : dataset.samples) {
        model_truth.push_back(s.model_truth);
        ground_truth.push_back(s.ground_truth);
    }
    EvaluationReport report;
    report.fidelity = n == 0 ? 0.0 : fidelity(model_truth, predicted);
    report.confusion = confusion(ground_truth, predicted);
    report.f1 = f1_score(report.confusion);
    return report;
}

ClusterMap clusters(const Theory& theory, const KnowledgeBase& kb)
{
    ClusterMap groups;
    for (const auto& [sample, facts] : kb.facts) {
        std::set<std::size_t> key;
        for (std::size_t i = 0; i < theory.clauses.size(); ++i)
            if (covers(theory.clauses[i], facts)) key.insert(i);
        groups[key].push_back(sample);
    }
    return groups;
}

std::size_t best_clause(const Theory& theory)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < theory.clauses.size(); ++i)
        if (theory.clauses[i].covered_pos.size() > theory.clauses[best].covered_pos.size()) best = i;
    return best;
}

namespace {

RankHistogram summarize(std::map<std::uint32_t, std::uint32_t> counts, std::optional<ConceptId> concept_id)
{
    RankHistogram h;
    h.concept_id = concept_id;
    for (const auto& [rank, count] : counts) {
        h.top_ranks.emplace_back(rank, count);
        h.samples += count;
    }
    std::sort(h.top_ranks.begin(), h.top_ranks.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (h.top_ranks.size() > 10) h.top_ranks.resize(10);
    return h;
}

}  // namespace

RankReport rank_analysis(const Dataset& dataset, const Theory& theory, std::size_t top_rules)
{
    if (theory.clauses.empty()) throw Error(ErrorCode::invalid_input, "rank analysis needs a non-empty theory");

    std::vector<std::size_t> order(theory.clauses.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return theory.clauses[a].covered_pos.size() > theory.clauses[b].covered_pos.size();
    });
    order.resize(std::min(order.size(), top_rules));
    std::set<ConceptId> concepts;
    for (std::size_t i : order)
        for (const auto& lit : theory.clauses[i].body) {
            concepts.insert(lit.subject.concept_id);
            if (lit.object) concepts.insert(lit.object->concept_id);
        }

    RankReport report;
    std::map<ConceptId, std::map<std::uint32_t, std::uint32_t>> per;
    std::map<std::uint32_t, std::uint32_t> pooled;
    for (const auto& sample : dataset.samples) {
        std::vector<std::pair<double, ConceptId>> ranked;
        for (const auto& g : sample.grids)
            ranked.emplace_back(std::abs(std::accumulate(g.values.begin(), g.values.end(), 0.0)), g.concept_id);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        report.possible_ranks = std::max(report.possible_ranks, static_cast<std::uint32_t>(ranked.size()));
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            if (!concepts.contains(ranked[r].second) || ranked[r].first == 0.0) continue;
            const auto rank = static_cast<std::uint32_t>(r + 1);
            ++per[ranked[r].second][rank];
            ++pooled[rank];
        }
    }
    for (ConceptId c : concepts) report.per_concept.push_back(summarize(per[c], c));
    report.pooled = summarize(pooled, std::nullopt);
    return report;
}

ContrastiveReport contrastive(const Theory& theory, const std::string& sample_id, const std::set<Literal>& sample_facts,
                              std::optional<std::size_t> clause_index, const ConceptLabels& labels)
{
    if (theory.clauses.empty()) throw Error(ErrorCode::invalid_clause, "contrastive explanation needs a non-empty theory");
    const std::size_t idx = clause_index.value_or(best_clause(theory));
    if (idx >= theory.clauses.size())
        throw Error(ErrorCode::invalid_clause, "clause index " + std::to_string(idx) + " out of range (theory has " +
                                                   std::to_string(theory.clauses.size()) + ")");
    ContrastiveReport report;
    report.sample_id = sample_id;
    report.clause_index = idx;
    for (const auto& lit : theory.clauses[idx].body)
        if (!sample_facts.contains(lit)) report.failing_literals.push_back(lit);
    report.verbalization = verbalize(report, labels, &sample_facts);
    return report;
}

std::string verbalize_concept(const SignedConcept& c, const ConceptLabels& labels)
{
    std::string out = c.sign == Sign::neg ? "negative concept c" : "positive concept c";
    out += std::to_string(c.concept_id);
    if (auto it = labels.find(c.concept_id); it != labels.end()) out += " (" + it->second + ")";
    return out;
}

namespace {

// Compass and surrounding relations describe the object as seen from the subject.
std::string_view phrase(Relation r, bool& object_first)
{
    object_first = false;
    switch (r) {
    case Relation::present: return "is contained";
    case Relation::above_of: return "is above of";
    case Relation::below_of: return "is below of";
    case Relation::left_of: return "is left of";
    case Relation::right_of: return "is right of";
    case Relation::disjoint: return "is disjoint of";
    case Relation::equals: return "equals";
    case Relation::touches: return "touches";
    case Relation::overlaps: return "overlaps";
    case Relation::covers: return "covers";
    case Relation::contains: return "contains";
    case Relation::covered_by: return "is covered by";
    case Relation::within: return "is within";
    case Relation::close_to: return "is close to";
    default: break;
    }
    object_first = true;
    switch (r) {
    case Relation::center: return "is centered on";
    case Relation::middle_right: return "is middle right of";
    case Relation::bottom_right: return "is bottom right of";
    case Relation::bottom_middle: return "is bottom middle of";
    case Relation::bottom_left: return "is bottom left of";
    case Relation::middle_left: return "is middle left of";
    case Relation::top_left: return "is top left of";
    case Relation::top_middle: return "is top middle of";
    case Relation::top_right: return "is top right of";
    case Relation::amid_x: return "is horizontally surrounded by";
    case Relation::amid_y: return "is vertically surrounded by";
    default: return "";
    }
}

}  // namespace

std::string verbalize_literal(const Literal& literal, const ConceptLabels& labels)
{
    bool object_first = false;
    const std::string verb(phrase(literal.predicate, object_first));
    const std::string subject = verbalize_concept(literal.subject, labels);
    if (!literal.object) return subject + " " + verb;
    const std::string object = verbalize_concept(*literal.object, labels);
    return object_first ? object + " " + verb + " " + subject : subject + " " + verb + " " + object;
}

std::string verbalize(const Clause& clause, const std::string& class_name, const ConceptLabels& labels)
{
    std::string out = class_name;
    for (std::size_t i = 0; i < clause.body.size(); ++i) {
        out += i == 0 ? ", if " : " and ";
        out += verbalize_literal(clause.body[i], labels);
    }
    return out;
}

std::string verbalize(const ContrastiveReport& report, const ConceptLabels& labels,
                      const std::set<Literal>* sample_facts)
{
    if (report.failing_literals.empty())
        return "sample " + report.sample_id + " is covered by clause " + std::to_string(report.clause_index);
    auto absent = [&](const SignedConcept& c) {
        return sample_facts && !sample_facts->contains(Literal{Relation::present, c, std::nullopt});
    };
    std::string out;
    for (const auto& lit : report.failing_literals) {
        if (!out.empty()) out += "; ";
        if (lit.predicate == Relation::present) {
            out += "missing: " + verbalize_concept(lit.subject, labels);
        } else if (absent(lit.subject) || (lit.object && absent(*lit.object))) {
            const auto& gone = absent(lit.subject) ? lit.subject : *lit.object;
            out += "missing: " + verbalize_concept(gone, labels) + ", so relation '" + verbalize_literal(lit, labels) +
                   "' does not hold";
        } else {
            out += "relation '" + verbalize_literal(lit, labels) + "' does not hold";
        }
    }
    return out;
}

}  // namespace corex
