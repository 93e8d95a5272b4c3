#include "corex/ilp.hpp"

#include <algorithm>
#include <bit>

namespace corex {

namespace {

using Words = std::vector<std::uint64_t>;

std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

bool test_bit(const Words& w, std::size_t i) { return (w[i / 64] >> (i % 64)) & 1U; }
void set_bit(Words& w, std::size_t i) { w[i / 64] |= std::uint64_t{1} << (i % 64); }

bool is_consistent(const CoverageIndex::Counts& c, const LearnConfig& cfg)
{
    return c.neg <= cfg.noise && c.pos >= cfg.min_pos;
}

bool lex_less(const std::vector<Literal>& a, const std::vector<Literal>& b)
{
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

bool ConstraintSet::allows(const Literal& literal) const
{
    if (forbidden_relations.contains(literal.predicate)) return false;
    if (forbidden_concepts.contains(literal.subject.concept_id)) return false;
    if (literal.object && forbidden_concepts.contains(literal.object->concept_id)) return false;
    return !forbidden_literals.contains(literal);
}

void LearnConfig::validate() const
{
    if (max_body < 1) throw Error(ErrorCode::config, "max_body must be positive");
    if (min_pos < 1) throw Error(ErrorCode::config, "min_pos must be positive");
    if (beam_width < 1) throw Error(ErrorCode::config, "beam_width must be positive");
}

std::set<ConceptId> Theory::concepts() const
{
    std::set<ConceptId> out;
    for (const auto& c : clauses)
        for (const auto& lit : c.body) {
            out.insert(lit.subject.concept_id);
            if (lit.object) out.insert(lit.object->concept_id);
        }
    return out;
}

bool covers(const std::vector<Literal>& body, const std::set<Literal>& sample_facts)
{
    return std::all_of(body.begin(), body.end(), [&](const Literal& l) { return sample_facts.contains(l); });
}

bool covers(const Clause& clause, const std::set<Literal>& sample_facts)
{
    return covers(clause.body, sample_facts);
}

std::vector<Literal> bottom_clause(const std::string& seed, const KnowledgeBase& kb, const ConstraintSet& constraints)
{
    auto it = kb.facts.find(seed);
    if (it == kb.facts.end() || !std::binary_search(kb.positives.begin(), kb.positives.end(), seed))
        throw Error(ErrorCode::unknown_sample, "seed '" + seed + "' is not a positive example");
    std::vector<Literal> out;
    for (const auto& lit : it->second)
        if (constraints.allows(lit)) out.push_back(lit);
    return out;  // std::set iteration is already canonical
}

CoverageIndex::CoverageIndex(const KnowledgeBase& kb)
    : kb_(&kb), words_pos_(word_count(kb.positives.size())), words_neg_(word_count(kb.negatives.size()))
{
    auto fill = [&](const std::vector<std::string>& ids, bool positive) {
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (const auto& lit : kb.facts_of(ids[i])) {
                auto [slot, fresh] = bits_.try_emplace(lit);
                if (fresh) {
                    slot->second.pos.assign(words_pos_, 0);
                    slot->second.neg.assign(words_neg_, 0);
                }
                set_bit(positive ? slot->second.pos : slot->second.neg, i);
            }
    };
    fill(kb.positives, true);
    fill(kb.negatives, false);
}

Words CoverageIndex::positives_mask(const std::vector<std::string>& active) const
{
    Words mask(words_pos_, 0);
    if (active.empty()) {
        for (std::size_t i = 0; i < kb_->positives.size(); ++i) set_bit(mask, i);
        return mask;
    }
    for (const auto& id : active) {
        auto it = std::lower_bound(kb_->positives.begin(), kb_->positives.end(), id);
        if (it != kb_->positives.end() && *it == id)
            set_bit(mask, static_cast<std::size_t>(it - kb_->positives.begin()));
    }
    return mask;
}

CoverageIndex::Counts CoverageIndex::count_bits(const std::vector<Literal>& body, const Words& active_pos) const
{
    std::vector<const Bits*> parts;
    parts.reserve(body.size());
    for (const auto& lit : body) {
        auto it = bits_.find(lit);
        if (it == bits_.end()) return {};
        parts.push_back(&it->second);
    }
    Counts c;
    for (std::size_t w = 0; w < words_pos_; ++w) {
        std::uint64_t acc = active_pos[w];
        for (const Bits* p : parts) acc &= p->pos[w];
        c.pos += static_cast<std::uint32_t>(std::popcount(acc));
    }
    for (std::size_t w = 0; w < words_neg_; ++w) {
        std::uint64_t acc = ~std::uint64_t{0};
        for (const Bits* p : parts) acc &= p->neg[w];
        if (parts.empty() && w + 1 == words_neg_ && kb_->negatives.size() % 64 != 0)
            acc &= (std::uint64_t{1} << (kb_->negatives.size() % 64)) - 1;
        c.neg += static_cast<std::uint32_t>(std::popcount(acc));
    }
    return c;
}

CoverageIndex::Counts CoverageIndex::count_direct(const std::vector<Literal>& body, const Words& active_pos) const
{
    Counts c;
    for (std::size_t i = 0; i < kb_->positives.size(); ++i)
        if (test_bit(active_pos, i) && covers(body, kb_->facts_of(kb_->positives[i]))) ++c.pos;
    for (const auto& id : kb_->negatives)
        if (covers(body, kb_->facts_of(id))) ++c.neg;
    return c;
}

std::vector<CoverageIndex::Counts> CoverageIndex::evaluate(const std::vector<std::vector<Literal>>& bodies,
                                                           const Words& active_pos, Exec exec) const
{
    std::vector<Counts> out(bodies.size());
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < bodies.size(); ++i) out[i] = count_direct(bodies[i], active_pos);
        return out;
    }
    const auto n = static_cast<long>(bodies.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = count_bits(bodies[static_cast<std::size_t>(i)], active_pos);
    return out;
}

std::vector<std::string> CoverageIndex::covered_positives(const std::vector<Literal>& body) const
{
    std::vector<std::string> out;
    for (const auto& id : kb_->positives)
        if (covers(body, kb_->facts_of(id))) out.push_back(id);
    return out;
}

std::vector<std::string> CoverageIndex::covered_negatives(const std::vector<Literal>& body) const
{
    std::vector<std::string> out;
    for (const auto& id : kb_->negatives)
        if (covers(body, kb_->facts_of(id))) out.push_back(id);
    return out;
}

bool better_clause(std::uint32_t pos_a, const std::vector<Literal>& a, std::uint32_t pos_b,
                   const std::vector<Literal>& b)
{
    if (pos_a != pos_b) return pos_a > pos_b;
    if (a.size() != b.size()) return a.size() < b.size();
    return lex_less(a, b);
}

std::optional<Clause> search_clause(const std::vector<Literal>& bottom_in, const CoverageIndex& index,
                                    const LearnConfig& cfg, const ConstraintSet& constraints,
                                    const std::vector<std::string>& active)
{
    std::vector<Literal> bottom;
    for (const auto& lit : bottom_in)
        if (constraints.allows(lit)) bottom.push_back(lit);
    std::sort(bottom.begin(), bottom.end());
    bottom.erase(std::unique(bottom.begin(), bottom.end()), bottom.end());
    if (bottom.empty()) return std::nullopt;

    const Words active_pos = index.positives_mask(active);
    const bool exhaustive = bottom.size() <= cfg.exhaustive_limit;

    struct Scored {
        std::vector<std::size_t> idx;  // ascending positions in bottom
        std::vector<Literal> body;
        CoverageIndex::Counts counts;
    };
    std::optional<Scored> best;

    std::vector<std::vector<std::size_t>> frontier;
    for (std::size_t i = 0; i < bottom.size(); ++i) frontier.push_back({i});

    for (std::uint32_t level = 1; level <= cfg.max_body && !frontier.empty(); ++level) {
        std::vector<Scored> scored(frontier.size());
        std::vector<std::vector<Literal>> bodies(frontier.size());
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            for (std::size_t k : frontier[i]) bodies[i].push_back(bottom[k]);
            scored[i].idx = frontier[i];
        }
        const auto counts = index.evaluate(bodies, active_pos, cfg.exec);
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            scored[i].body = std::move(bodies[i]);
            scored[i].counts = counts[i];
            if (is_consistent(counts[i], cfg) &&
                (!best || better_clause(counts[i].pos, scored[i].body, best->counts.pos, best->body)))
                best = scored[i];
        }
        if (level == cfg.max_body) break;

        // Refinement only removes coverage, so a candidate that cannot beat the
        // best consistent clause on positives is closed.
        std::vector<Scored> open;
        for (auto& s : scored) {
            if (is_consistent(s.counts, cfg) || s.counts.pos < std::max<std::uint32_t>(cfg.min_pos, 1)) continue;
            if (best && s.counts.pos <= best->counts.pos) continue;
            open.push_back(std::move(s));
        }
        std::sort(open.begin(), open.end(), [](const Scored& a, const Scored& b) {
            return better_clause(a.counts.pos, a.body, b.counts.pos, b.body);
        });
        if (!exhaustive && open.size() > cfg.beam_width) open.resize(cfg.beam_width);

        std::set<std::vector<std::size_t>> next;
        for (const auto& s : open)
            for (std::size_t k = 0; k < bottom.size(); ++k) {
                if (std::binary_search(s.idx.begin(), s.idx.end(), k)) continue;
                auto idx = s.idx;
                idx.insert(std::upper_bound(idx.begin(), idx.end(), k), k);
                next.insert(std::move(idx));
            }
        frontier.assign(next.begin(), next.end());
    }

    if (!best) return std::nullopt;
    Clause clause;
    clause.body = std::move(best->body);
    clause.covered_pos = index.covered_positives(clause.body);
    clause.covered_neg = index.covered_negatives(clause.body);
    return clause;
}

std::optional<Clause> search_clause(const std::vector<Literal>& bottom, const KnowledgeBase& kb,
                                    const LearnConfig& cfg, const ConstraintSet& constraints)
{
    const CoverageIndex index(kb);
    return search_clause(bottom, index, cfg, constraints);
}

Theory induce(const KnowledgeBase& kb, const LearnConfig& cfg, const ConstraintSet& constraints)
{
    cfg.validate();
    if (kb.positives.empty()) throw Error(ErrorCode::empty_positives, "induction needs at least one positive example");

    const CoverageIndex index(kb);
    Theory theory;
    theory.config = cfg;
    theory.constraints = constraints;

    std::vector<std::string> remaining = kb.positives;  // ascending
    while (!remaining.empty()) {
        const std::string seed = remaining.front();
        const auto bottom = bottom_clause(seed, kb, constraints);
        auto clause = search_clause(bottom, index, cfg, constraints, remaining);
        if (!clause) {
            remaining.erase(remaining.begin());
            (cfg.aleph_compat_ground_clauses ? theory.ground_examples : theory.uncovered_pos).push_back(seed);
            continue;
        }
        clause->seed = seed;
        std::erase_if(remaining, [&](const std::string& id) {
            return std::binary_search(clause->covered_pos.begin(), clause->covered_pos.end(), id);
        });
        theory.clauses.push_back(std::move(*clause));
    }
    return theory;
}

Label explainer_truth(const Theory& theory, const std::set<Literal>& sample_facts, std::string_view sample_id)
{
    for (const auto& c : theory.clauses)
        if (covers(c, sample_facts)) return Label::positive;
    if (!sample_id.empty() &&
        std::find(theory.ground_examples.begin(), theory.ground_examples.end(), sample_id) != theory.ground_examples.end())
        return Label::positive;
    return Label::negative;
}

std::string render_clause(const Clause& clause)
{
    std::string out = "is_class(A)";
    for (std::size_t i = 0; i < clause.body.size(); ++i) {
        out += i == 0 ? " :- " : ", ";
        out += render_literal(clause.body[i], "A");
    }
    return out + ".";
}

std::string render_theory(const Theory& theory)
{
    std::string out;
    for (const auto& c : theory.clauses) out += render_clause(c) + "\n";
    for (const auto& id : theory.ground_examples) out += "is_class(" + id + ").\n";
    return out;
}

Theory parse_theory(std::string_view source)
{
    Theory theory;
    for (const auto& pc : text::parse_program(source).clauses) {
        if (pc.head.functor != "is_class" || pc.head.args.size() != 1 || !pc.head.args[0].args.empty())
            text::fail_at(pc.head, "theory clauses must have head is_class/1");
        const auto& arg = pc.head.args[0];
        if (pc.body.empty()) {
            if (arg.is_variable()) text::fail_at(arg, "unit clause with a variable head");
            theory.ground_examples.push_back(arg.functor);
            continue;
        }
        if (!arg.is_variable()) text::fail_at(arg, "rule head must use the sample variable");
        Clause c;
        for (const auto& t : pc.body) {
            std::string var;
            c.body.push_back(literal_from_term(t, var));
            if (var != arg.functor) text::fail_at(t, "body literal uses '" + var + "' instead of '" + arg.functor + "'");
        }
        theory.clauses.push_back(std::move(c));
    }
    return theory;
}

}  // namespace corex
