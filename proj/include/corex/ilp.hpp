#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corex/kb.hpp"

namespace corex {

enum class Exec { serial, parallel };

struct ConstraintSet {
    std::set<ConceptId> forbidden_concepts;
    std::set<Relation> forbidden_relations;
    std::set<Literal> forbidden_literals;

    bool allows(const Literal& literal) const;
    bool empty() const { return forbidden_concepts.empty() && forbidden_relations.empty() && forbidden_literals.empty(); }

    bool operator==(const ConstraintSet&) const = default;
};

struct LearnConfig {
    std::uint32_t max_body = 3;
    std::uint32_t min_pos = 1;
    std::uint32_t noise = 0;
    std::uint32_t beam_width = 8;
    /// Bottom clauses with at most this many literals are searched without a
    /// beam limit, which makes the returned clause coverage-optimal.
    std::uint32_t exhaustive_limit = 12;
    /// Aleph default: keep positives no clause generalizes as ground clauses.
    bool aleph_compat_ground_clauses = false;
    Exec exec = Exec::parallel;

    void validate() const;
    bool operator==(const LearnConfig&) const = default;
};

struct Clause {
    std::vector<Literal> body;
    std::vector<std::string> covered_pos;  // over all positives
    std::vector<std::string> covered_neg;
    std::string seed;

    bool operator==(const Clause&) const = default;
};

struct Theory {
    std::vector<Clause> clauses;
    std::vector<std::string> ground_examples;  // only with aleph_compat_ground_clauses
    std::vector<std::string> uncovered_pos;
    LearnConfig config;
    ConstraintSet constraints;

    std::set<ConceptId> concepts() const;
    bool operator==(const Theory&) const = default;
};

/// Ground matching: every body literal is among the sample's facts.
bool covers(const std::vector<Literal>& body, const std::set<Literal>& sample_facts);
bool covers(const Clause& clause, const std::set<Literal>& sample_facts);

std::vector<Literal> bottom_clause(const std::string& seed, const KnowledgeBase& kb, const ConstraintSet& constraints);

/// Per-literal sample bitsets over E+ and E-; a body's coverage is the AND of
/// its literals' sets.
class CoverageIndex {
public:
    explicit CoverageIndex(const KnowledgeBase& kb);

    struct Counts {
        std::uint32_t pos = 0;  // within the active positives
        std::uint32_t neg = 0;
        bool operator==(const Counts&) const = default;
    };

    std::size_t words_pos() const { return words_pos_; }
    std::size_t words_neg() const { return words_neg_; }
    const KnowledgeBase& kb() const { return *kb_; }

    std::vector<std::uint64_t> positives_mask(const std::vector<std::string>& active) const;

    /// Coverage counts of each candidate body. Exec::serial walks samples with
    /// `covers`; Exec::parallel intersects bitsets across OpenMP threads. Both
    /// return identical results.
    std::vector<Counts> evaluate(const std::vector<std::vector<Literal>>& bodies,
                                 const std::vector<std::uint64_t>& active_pos, Exec exec) const;

    std::vector<std::string> covered_positives(const std::vector<Literal>& body) const;
    std::vector<std::string> covered_negatives(const std::vector<Literal>& body) const;

private:
    struct Bits {
        std::vector<std::uint64_t> pos;
        std::vector<std::uint64_t> neg;
    };
    const KnowledgeBase* kb_;
    std::size_t words_pos_;
    std::size_t words_neg_;
    std::map<Literal, Bits> bits_;

    Counts count_bits(const std::vector<Literal>& body, const std::vector<std::uint64_t>& active_pos) const;
    Counts count_direct(const std::vector<Literal>& body, const std::vector<std::uint64_t>& active_pos) const;
};

/// Orders candidate clauses: more positives first, then shorter, then
/// lexicographically smaller body.
bool better_clause(std::uint32_t pos_a, const std::vector<Literal>& a, std::uint32_t pos_b,
                   const std::vector<Literal>& b);

/// Top-down refinement over literal subsets of `bottom`. `active` restricts
/// the positives that count toward the score (all positives when empty).
std::optional<Clause> search_clause(const std::vector<Literal>& bottom, const CoverageIndex& index,
                                    const LearnConfig& cfg, const ConstraintSet& constraints,
                                    const std::vector<std::string>& active = {});
std::optional<Clause> search_clause(const std::vector<Literal>& bottom, const KnowledgeBase& kb,
                                    const LearnConfig& cfg, const ConstraintSet& constraints);

/// Sequential covering with bottom-clause generalization.
Theory induce(const KnowledgeBase& kb, const LearnConfig& cfg, const ConstraintSet& constraints);

Label explainer_truth(const Theory& theory, const std::set<Literal>& sample_facts, std::string_view sample_id = {});

/// Clause text with the sample variable A, e.g.
/// is_class(A) :- right_of(A, pos(A,c30), pos(A,c9)).
std::string render_clause(const Clause& clause);
std::string render_theory(const Theory& theory);
/// Inverse of render_theory for bodies and ground examples; coverage caches
/// are left empty.
Theory parse_theory(std::string_view text);

}  // namespace corex
