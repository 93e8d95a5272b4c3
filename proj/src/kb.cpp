#include "corex/kb.hpp"

#include <algorithm>
#include <charconv>

namespace corex {

namespace {

void append_concept(std::string& out, const SignedConcept& c, std::string_view sample_term)
{
    if (c.sign == Sign::null) throw Error(ErrorCode::render, "cannot render a concept with null sign");
    out += to_string(c.sign);
    out += '(';
    out += sample_term;
    out += ",c";
    out += std::to_string(c.concept_id);
    out += ')';
}

SignedConcept concept_from_term(const text::Term& t, const std::string& sample)
{
    if (t.args.size() != 2 || (t.functor != "pos" && t.functor != "neg"))
        text::fail_at(t, "expected pos(S,cN) or neg(S,cN), found '" + t.functor + "'");
    if (t.args[0].functor != sample || !t.args[0].args.empty())
        text::fail_at(t.args[0], "concept term names sample '" + t.args[0].functor + "' inside an atom about '" +
                                     sample + "'");
    const std::string& id = t.args[1].functor;
    ConceptId value = 0;
    const char* first = id.data() + 1;
    const char* last = id.data() + id.size();
    if (id.size() < 2 || id[0] != 'c' || !t.args[1].args.empty() ||
        std::from_chars(first, last, value).ptr != last)
        text::fail_at(t.args[1], "expected a concept constant cN, found '" + id + "'");
    return {value, t.functor == "pos" ? Sign::pos : Sign::neg};
}

void parse_examples(std::string_view source, std::vector<std::string>& out)
{
    for (const auto& clause : text::parse_program(source).clauses) {
        const auto& head = clause.head;
        if (!clause.body.empty()) text::fail_at(head, "example files hold facts only");
        if (head.functor != "is_class" || head.args.size() != 1 || !head.args[0].args.empty())
            text::fail_at(head, "unknown example predicate '" + head.functor + "'");
        out.push_back(head.args[0].functor);
    }
    std::sort(out.begin(), out.end());
}

}  // namespace

std::strong_ordering Literal::operator<=>(const Literal& other) const
{
    if (auto c = predicate_name(predicate) <=> predicate_name(other.predicate); c != 0) return c;
    if (auto c = arity(predicate) <=> arity(other.predicate); c != 0) return c;
    if (auto c = subject <=> other.subject; c != 0) return c;
    return object <=> other.object;
}

std::string render_literal(const Literal& literal, std::string_view sample_term)
{
    std::string out(predicate_name(literal.predicate));
    out += '(';
    out += sample_term;
    out += ", ";
    append_concept(out, literal.subject, sample_term);
    if (literal.object) {
        out += ", ";
        append_concept(out, *literal.object, sample_term);
    }
    out += ')';
    return out;
}

Literal literal_from_term(const text::Term& term, std::string& sample)
{
    const int ar = static_cast<int>(term.args.size());
    const auto relation = relation_from_name(term.functor, ar);
    if (!relation) text::fail_at(term, "unknown predicate '" + term.functor + "/" + std::to_string(ar) + "'");
    if (!term.args[0].args.empty()) text::fail_at(term.args[0], "sample argument must be a constant or variable");
    sample = term.args[0].functor;
    Literal lit;
    lit.predicate = *relation;
    lit.subject = concept_from_term(term.args[1], sample);
    if (ar == 3) lit.object = concept_from_term(term.args[2], sample);
    return lit;
}

const std::set<Literal>& KnowledgeBase::facts_of(const std::string& sample) const
{
    static const std::set<Literal> none;
    auto it = facts.find(sample);
    return it == facts.end() ? none : it->second;
}

std::vector<Atom> KnowledgeBase::atoms() const
{
    std::vector<Atom> out;
    for (const auto& [sample, lits] : facts)
        for (const auto& lit : lits) out.push_back({sample, lit});
    return out;
}

std::vector<std::string> mode_declarations(const KnowledgeBase& kb)
{
    if (kb.positives.empty() && kb.negatives.empty()) return {};
    std::set<Relation> used;
    for (const auto& [sample, lits] : kb.facts)
        for (const auto& lit : lits) used.insert(lit.predicate);
    std::vector<std::pair<std::string, std::string>> keyed;
    for (Relation r : used) {
        std::string decl = "modeb(*, " + std::string(predicate_name(r)) + "(+sample, #sconcept";
        decl += arity(r) == 3 ? ", #sconcept))" : "))";
        keyed.emplace_back(relation_key(r), std::move(decl));
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::string> out{"modeh(1, is_class(+sample))"};
    for (auto& [key, decl] : keyed) out.push_back(std::move(decl));
    return out;
}

KnowledgeBase build_kb(const Dataset& dataset, const FactsBySample& facts_per_sample)
{
    KnowledgeBase kb;
    for (const auto& sample : dataset.samples) {
        (sample.model_truth == Label::positive ? kb.positives : kb.negatives).push_back(sample.sample_id);
        auto& lits = kb.facts[sample.sample_id];
        if (auto it = facts_per_sample.find(sample.sample_id); it != facts_per_sample.end())
            for (const auto& f : it->second) lits.insert(Literal::from_fact(f));
    }
    std::sort(kb.positives.begin(), kb.positives.end());
    std::sort(kb.negatives.begin(), kb.negatives.end());
    kb.declarations = mode_declarations(kb);
    return kb;
}

KbText render_kb(const KnowledgeBase& kb)
{
    auto check = [](const std::string& id) {
        if (!is_valid_identifier(id))
            throw Error(ErrorCode::render, "sample id '" + id + "' is not a lowercase identifier");
    };
    KbText out;
    for (const auto& d : kb.declarations) out.background += ":- " + d + ".\n";
    for (const auto& [sample, lits] : kb.facts) {
        check(sample);
        for (const auto& lit : lits) out.background += render_literal(lit, sample) + ".\n";
    }
    for (const auto& id : kb.positives) {
        check(id);
        out.positives += "is_class(" + id + ").\n";
    }
    for (const auto& id : kb.negatives) {
        check(id);
        out.negatives += "is_class(" + id + ").\n";
    }
    return out;
}

KnowledgeBase parse_kb(std::string_view background, std::string_view positives, std::string_view negatives)
{
    KnowledgeBase kb;
    parse_examples(positives, kb.positives);
    parse_examples(negatives, kb.negatives);
    for (const auto& id : kb.positives) kb.facts[id];
    for (const auto& id : kb.negatives) kb.facts[id];

    const auto program = text::parse_program(background);
    kb.declarations = program.directives;
    for (const auto& clause : program.clauses) {
        if (!clause.body.empty()) text::fail_at(clause.head, "background knowledge holds ground facts only");
        if (clause.head.args.size() < 2) {
            text::fail_at(clause.head, "unknown predicate '" + clause.head.functor + "/" +
                                           std::to_string(clause.head.args.size()) + "'");
        }
        std::string sample;
        Literal lit = literal_from_term(clause.head, sample);
        auto it = kb.facts.find(sample);
        if (it == kb.facts.end())
            text::fail_at(clause.head, "fact about '" + sample + "', which is neither a positive nor a negative example");
        it->second.insert(lit);
    }
    return kb;
}

}  // namespace corex
