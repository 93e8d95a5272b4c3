#include "corex/json_io.hpp"

#include "corex/prolog_text.hpp"

namespace corex {

namespace {

std::string concept_set_key(const std::set<std::size_t>& key)
{
    std::string out;
    for (std::size_t i : key) out += (out.empty() ? "" : ";") + std::to_string(i);
    return out;
}

json rank_histogram(const RankHistogram& h)
{
    json ranks = json::array();
    for (const auto& [rank, count] : h.top_ranks) ranks.push_back({{"rank", rank}, {"count", count}});
    json j{{"samples", h.samples}, {"top_ranks", ranks}};
    j["concept_id"] = h.concept_id ? json(*h.concept_id) : json(nullptr);
    return j;
}

SignedConcept signed_concept_from_json(const json& j)
{
    return {j.at("concept_id").get<ConceptId>(), parse_sign(j.at("sign").get<std::string>())};
}

template <class T>
void read_if(const json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view what)
{
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || k == key;
        if (!ok) throw Error(ErrorCode::config, "unknown " + std::string(what) + " field '" + key + "'");
    }
}

}  // namespace

json to_json(const SignedConcept& c) { return {{"concept_id", c.concept_id}, {"sign", to_string(c.sign)}}; }

json to_json(const Literal& literal)
{
    json j{{"predicate", predicate_name(literal.predicate)},
           {"arity", arity(literal.predicate)},
           {"subject", to_json(literal.subject)},
           {"text", render_literal(literal, "A")}};
    if (literal.object) j["object"] = to_json(*literal.object);
    return j;
}

json to_json(const Clause& clause, std::size_t index, const std::string& class_name, const ConceptLabels& labels)
{
    json body = json::array();
    for (const auto& lit : clause.body) body.push_back(to_json(lit));
    return {{"index", index},
            {"body", body},
            {"text", render_clause(clause)},
            {"verbalized", verbalize(clause, class_name, labels)},
            {"seed", clause.seed},
            {"pos_coverage", clause.covered_pos.size()},
            {"neg_coverage", clause.covered_neg.size()},
            {"covered_pos", clause.covered_pos},
            {"covered_neg", clause.covered_neg}};
}

json to_json(const Theory& theory, const std::string& class_name, const ConceptLabels& labels)
{
    json clauses = json::array();
    for (std::size_t i = 0; i < theory.clauses.size(); ++i)
        clauses.push_back(to_json(theory.clauses[i], i, class_name, labels));
    const std::set<ConceptId> concepts = theory.concepts();
    return {{"clauses", clauses},
            {"text", render_theory(theory)},
            {"concepts", concepts},
            {"uncovered_pos", theory.uncovered_pos},
            {"ground_examples", theory.ground_examples},
            {"constraints", to_json(theory.constraints)},
            {"learn", to_json(theory.config)}};
}

json to_json(const ConstraintSet& constraints)
{
    json relations = json::array();
    for (Relation r : constraints.forbidden_relations) relations.push_back(relation_key(r));
    json literals = json::array();
    for (const auto& lit : constraints.forbidden_literals) literals.push_back(render_literal(lit, "A"));
    return {{"forbidden_concepts", constraints.forbidden_concepts},
            {"forbidden_relations", relations},
            {"forbidden_literals", literals}};
}

json to_json(const LearnConfig& cfg)
{
    return {{"max_body", cfg.max_body},
            {"min_pos", cfg.min_pos},
            {"noise", cfg.noise},
            {"beam_width", cfg.beam_width},
            {"exhaustive_limit", cfg.exhaustive_limit},
            {"aleph_compat_ground_clauses", cfg.aleph_compat_ground_clauses}};
}

json to_json(const EvaluationReport& report)
{
    return {{"fidelity", report.fidelity},
            {"f1", report.f1},
            {"confusion",
             {{"tp", report.confusion.tp}, {"tn", report.confusion.tn}, {"fp", report.confusion.fp}, {"fn", report.confusion.fn}}}};
}

json to_json(const ConceptPartition& partition)
{
    return {{"rule_concepts", partition.rule_concepts},
            {"bk_concepts", partition.bk_concepts},
            {"irrelevant_concepts", partition.irrelevant_concepts}};
}

json to_json(const ClusterMap& clusters)
{
    json out = json::array();
    for (const auto& [key, samples] : clusters)
        out.push_back({{"clauses", key}, {"key", concept_set_key(key)}, {"size", samples.size()}, {"samples", samples}});
    return out;
}

json to_json(const RankReport& report)
{
    json per = json::array();
    for (const auto& h : report.per_concept) per.push_back(rank_histogram(h));
    return {{"possible_ranks", report.possible_ranks}, {"per_concept", per}, {"pooled", rank_histogram(report.pooled)}};
}

json to_json(const ContrastiveReport& report)
{
    json failing = json::array();
    for (const auto& lit : report.failing_literals) failing.push_back(to_json(lit));
    return {{"sample_id", report.sample_id},
            {"clause_index", report.clause_index},
            {"failing_literals", failing},
            {"covered", report.failing_literals.empty()},
            {"verbalization", report.verbalization}};
}

json to_json(const ConceptRegion& region)
{
    json boundary = json::array();
    for (const auto& v : region.boundary) boundary.push_back({v.x, v.y});
    const BoundingBox box = region.mask.bounds();
    return {{"concept_id", region.concept_id},
            {"sign", to_string(region.sign)},
            {"pixels", region.mask.count()},
            {"centroid", {region.centroid.x, region.centroid.y}},
            {"bbox", {box.x0, box.y0, box.x1, box.y1}},
            {"boundary", boundary}};
}

json to_json(const MaskSpec& spec) { return {{"label", to_string(spec.label)}, {"masked_concepts", spec.masked_concepts}}; }

Literal parse_literal_text(std::string_view text)
{
    std::string src(text);
    while (!src.empty() && (src.back() == ' ' || src.back() == '\n' || src.back() == '.')) src.pop_back();
    const auto program = text::parse_program(src + ".\n");
    if (program.clauses.size() != 1 || !program.clauses[0].body.empty())
        throw Error(ErrorCode::parse, "expected a single literal, got '" + std::string(text) + "'");
    std::string sample;
    return literal_from_term(program.clauses[0].head, sample);
}

Literal literal_from_json(const json& j)
{
    if (j.is_string()) return parse_literal_text(j.get<std::string>());
    try {
        Literal lit;
        const std::string name = j.at("predicate").get<std::string>();
        const bool binary = j.contains("object");
        const auto rel = relation_from_name(name, binary ? 3 : 2);
        if (!rel) throw Error(ErrorCode::config, "unknown predicate '" + name + "'");
        lit.predicate = *rel;
        lit.subject = signed_concept_from_json(j.at("subject"));
        if (binary) lit.object = signed_concept_from_json(j.at("object"));
        return lit;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("malformed literal: ") + e.what());
    }
}

ConstraintSet constraints_from_json(const json& j)
{
    ConstraintSet out;
    if (j.is_null()) return out;
    if (!j.is_object()) throw Error(ErrorCode::config, "constraints must be a JSON object");
    reject_unknown(j, {"forbidden_concepts", "forbidden_relations", "forbidden_literals"}, "constraint");
    try {
        if (j.contains("forbidden_concepts"))
            for (const auto& c : j.at("forbidden_concepts")) out.forbidden_concepts.insert(c.get<ConceptId>());
        if (j.contains("forbidden_relations"))
            for (const auto& r : j.at("forbidden_relations"))
                for (Relation rel : relations_matching(r.get<std::string>())) out.forbidden_relations.insert(rel);
        if (j.contains("forbidden_literals"))
            for (const auto& l : j.at("forbidden_literals")) out.forbidden_literals.insert(literal_from_json(l));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("malformed constraints: ") + e.what());
    }
    return out;
}

LearnConfig learn_config_from_json(const json& j, LearnConfig base)
{
    reject_unknown(j, {"max_body", "min_pos", "noise", "beam_width", "exhaustive_limit", "aleph_compat_ground_clauses"},
                   "learn");
    try {
        read_if(j, "max_body", base.max_body);
        read_if(j, "min_pos", base.min_pos);
        read_if(j, "noise", base.noise);
        read_if(j, "beam_width", base.beam_width);
        read_if(j, "exhaustive_limit", base.exhaustive_limit);
        read_if(j, "aleph_compat_ground_clauses", base.aleph_compat_ground_clauses);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("malformed learn config: ") + e.what());
    }
    base.validate();
    return base;
}

MaskSpec mask_spec_from_json(const json& j)
{
    if (!j.is_object()) throw Error(ErrorCode::config, "mask spec must be a JSON object");
    reject_unknown(j, {"label", "masked_concepts"}, "mask");
    MaskSpec spec;
    try {
        if (j.contains("label")) spec.label = parse_mask_label(j.at("label").get<std::string>());
        if (j.contains("masked_concepts"))
            for (const auto& c : j.at("masked_concepts")) spec.masked_concepts.insert(c.get<ConceptId>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("malformed mask spec: ") + e.what());
    }
    return spec;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace corex
