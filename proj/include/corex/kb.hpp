#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corex/core.hpp"
#include "corex/prolog_text.hpp"
#include "corex/relations.hpp"

namespace corex {

/// A predicate over signed concept constants; the sample argument is implicit.
/// As a ground fact it is bound to a sample constant, inside a clause to the
/// sample variable A.
struct Literal {
    Relation predicate = Relation::present;
    SignedConcept subject;
    std::optional<SignedConcept> object;

    static Literal from_fact(const RelationFact& f) { return {f.name, f.subject, f.object}; }

    bool operator==(const Literal&) const = default;
    /// Lexicographic on (predicate name, arity, subject, object).
    std::strong_ordering operator<=>(const Literal& other) const;
};

struct Atom {
    std::string sample;
    Literal literal;

    bool operator==(const Atom&) const = default;
    auto operator<=>(const Atom&) const = default;
};

/// Renders `literal` with `sample_term` as sample argument, e.g.
/// right_of(s1, pos(s1,c30), pos(s1,c9)).
std::string render_literal(const Literal& literal, std::string_view sample_term);

/// Interprets a parsed atom term; its sample argument (constant or variable)
/// is stored in `sample`. Throws Error(parse) naming unknown predicates.
Literal literal_from_term(const text::Term& term, std::string& sample);

struct KnowledgeBase {
    std::map<std::string, std::set<Literal>> facts;  // sample -> ground facts
    std::vector<std::string> positives;              // ascending
    std::vector<std::string> negatives;              // ascending
    std::vector<std::string> declarations;           // directive bodies

    const std::set<Literal>& facts_of(const std::string& sample) const;
    std::vector<Atom> atoms() const;  // canonical order

    bool operator==(const KnowledgeBase&) const = default;
};

struct KbText {
    std::string background;
    std::string positives;
    std::string negatives;

    bool operator==(const KbText&) const = default;
};

using FactsBySample = std::map<std::string, std::set<RelationFact>>;

KnowledgeBase build_kb(const Dataset& dataset, const FactsBySample& facts_per_sample);

/// Aleph-style mode declarations for the predicates used in `kb`.
std::vector<std::string> mode_declarations(const KnowledgeBase& kb);

KbText render_kb(const KnowledgeBase& kb);
KnowledgeBase parse_kb(std::string_view background, std::string_view positives, std::string_view negatives);

}  // namespace corex
