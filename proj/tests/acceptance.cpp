// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "corex/ingest.hpp"
#include "corex/pipeline.hpp"
#include "corex/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace corex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why)
    {
        if (pass) detail = why;
        pass = false;
    }
    void require(bool ok, const std::string& why)
    {
        if (!ok) fail(why);
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const SyntheticSet& default_set()
{
    static const SyntheticSet set = generate(GeneratorConfig{});
    return set;
}

const PipelineResult& default_run()
{
    static const PipelineResult r = run_pipeline(default_set().dataset, {});
    return r;
}

// Noisy variant: a few flipped model labels leave room for extra clauses that
// mention non-planted concepts.
GeneratorConfig noisy_generator()
{
    GeneratorConfig g;
    g.model_error_rate = 0.02;
    return g;
}

PipelineConfig noisy_pipeline()
{
    PipelineConfig cfg;
    cfg.learn.noise = 5;
    return cfg;
}

std::set<ConceptId> planted_ids(const GeneratorConfig& g)
{
    std::set<ConceptId> out;
    for (const auto& p : g.planted) out.insert(p.concept_id);
    return out;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---- criteria -----------------------------------------------------------------

Outcome planted_rule_recovery()
{
    Outcome out;
    omp_set_num_threads(1);
    const auto t0 = std::chrono::steady_clock::now();
    const SyntheticSet set = generate(GeneratorConfig{});
    const PipelineResult r = run_pipeline(set.dataset, {});
    const double elapsed = seconds_since(t0);
    omp_set_num_threads(omp_get_num_procs());

    const auto& theory = r.learned.theory;
    if (theory.clauses.empty()) {
        out.fail("empty theory");
        return out;
    }
    const Clause& top = theory.clauses[best_clause(theory)];
    const auto& kb = r.extraction->kb;
    const auto cov = oracle::coverage(top.body, kb, kb.positives);
    const double pos_frac = static_cast<double>(cov.pos) / static_cast<double>(kb.positives.size());
    out.require(pos_frac >= 0.95, fmt("top clause covers %.4f of positives", pos_frac));
    out.require(cov.neg == 0, fmt("top clause covers %u negatives", cov.neg));
    out.require(r.learned.report.fidelity >= 0.98, fmt("fidelity %.4f", r.learned.report.fidelity));
    out.require(elapsed < 60.0, fmt("took %.2f s", elapsed));
    if (out.pass)
        out.detail = fmt("pos %.4f, neg %u, fidelity %.4f, %.2f s single-threaded; ", pos_frac, cov.neg,
                         r.learned.report.fidelity, elapsed) +
                     render_clause(top);
    return out;
}

Outcome masking_direction()
{
    Outcome out;
    const auto& set = default_set();
    const auto& r = default_run();
    const auto& part = r.learned.partition;
    const double f1_rule = ablate(set.dataset, make_mask(MaskLabel::rule_plus_nonbk, part), set.oracle).f1;
    const double f1_nonbk = ablate(set.dataset, make_mask(MaskLabel::nonbk_only, part), set.oracle).f1;
    out.require(f1_rule <= 0.6, fmt("F1(rule_plus_nonbk) = %.4f", f1_rule));
    out.require(f1_nonbk >= 0.95, fmt("F1(nonbk_only) = %.4f", f1_nonbk));

    // Adding rule concepts to any mask never raises F1.
    std::vector<ConceptId> all, rule(part.rule_concepts.begin(), part.rule_concepts.end());
    for (const auto& g : set.dataset.samples.front().grids) all.push_back(g.concept_id);
    out.require(!rule.empty(), "theory has no rule concepts");
    SplitMix64 rng(2024);
    for (int i = 0; i < 20 && !rule.empty(); ++i) {
        MaskSpec base;
        for (ConceptId c : all)
            if (rng.below(3) == 0) base.masked_concepts.insert(c);
        // non-empty subset R of rule concepts, kept out of the base mask
        std::set<ConceptId> subset;
        while (subset.empty())
            for (ConceptId c : rule)
                if (rng.below(2) == 0) subset.insert(c);
        for (ConceptId c : subset) base.masked_concepts.erase(c);
        MaskSpec with_rule = base;
        with_rule.masked_concepts.insert(subset.begin(), subset.end());
        const double f_base = ablate(set.dataset, base, set.oracle).f1;
        const double f_rule = ablate(set.dataset, with_rule, set.oracle).f1;
        out.require(f_rule <= f_base, fmt("mask %d: F1 rose from %.4f to %.4f", i, f_base, f_rule));
    }
    if (out.pass)
        out.detail = fmt("F1 rule_plus_nonbk %.4f <= 0.6, nonbk_only %.4f >= 0.95; 20 random rule masks monotone",
                         f1_rule, f1_nonbk);
    return out;
}

Outcome fidelity_exactness()
{
    Outcome out;
    constexpr Label P = Label::positive, N = Label::negative;
    struct Case {
        std::vector<Label> model, explainer;
        double expected;
    };
    const std::vector<Case> cases{
        {{P, N, P, N}, {P, N, P, N}, 1.0},
        {{P, P, N}, {N, N, P}, 0.0},
        {{P, P, N}, {P, N, N}, 2.0 / 3.0},
        {{P}, {P}, 1.0},
        {{N}, {P}, 0.0},
        {{P, N}, {P, P}, 0.5},
        {{P, P, P, P, P}, {P, P, P, P, N}, 4.0 / 5.0},
        {{N, N, N, N, N, N, N}, {N, P, N, P, N, P, N}, 4.0 / 7.0},
        {{P, N, P, N, P, N, P, N, P, N}, {N, N, N, N, N, N, N, N, N, N}, 1.0 / 2.0},
        {{P, P, P, N, N, N}, {P, N, N, N, P, P}, 2.0 / 6.0},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const double got = fidelity(cases[i].model, cases[i].explainer);
        out.require(std::abs(got - cases[i].expected) <= 1e-15,
                    fmt("pair %zu: %.17g != %.17g", i, got, cases[i].expected));
    }
    if (out.pass) out.detail = "10 fixed pairs exact to 1e-15";
    return out;
}

struct PairStats {
    std::size_t pairs = 0;
    double seconds = 0;
    std::string first_mismatch;
    std::string first_algebra_violation;
};

const PairStats& spatial_pairs()
{
    static const PairStats stats = [] {
        PairStats s;
        std::mt19937_64 rng(20240601);
        const auto cfg = RelationConfig::for_grid(64, 64);
        auto mismatch = [&](std::size_t i, const char* what) {
            if (s.first_mismatch.empty()) s.first_mismatch = fmt("pair %zu: %s", i, what);
        };
        auto violation = [&](std::size_t i, const char* what) {
            if (s.first_algebra_violation.empty()) s.first_algebra_violation = fmt("pair %zu: %s", i, what);
        };
        auto as_set = [](const RelationSetResult& r) { return std::set<Relation>(r.begin(), r.end()); };
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < 1000; ++i) {
            const auto [pa, pb] = oracle::random_pair(rng);
            const oracle::PixelSet pc = oracle::grow_blob(
                rng, 64, 64, {static_cast<int>(rng() % 64), static_cast<int>(rng() % 64)}, 1 + rng() % 200);
            const auto a = oracle::region_of(pa, 0), b = oracle::region_of(pb, 1);
            const auto a2 = oracle::region_of(pb, 0), c = oracle::region_of(pc, 2);

            const auto topo = as_set(de9im(a, b));
            if (topo != oracle::de9im(pa, pb, 64, 64)) mismatch(i, "de9im");
            if (as_set(de9im(b, a)) != oracle::de9im(pb, pa, 64, 64)) mismatch(i, "de9im reversed");
            if (as_set(simple_alignment(a, b)) != oracle::simple_alignment(pa, pb)) mismatch(i, "simple alignment");
            if (as_set(compass_alignment(a, b, cfg)) != oracle::compass(pa, pb, cfg.center_buffer))
                mismatch(i, "compass");
            if (close_to(a, b, cfg) != oracle::close_to(pa, pb, cfg.close_range)) mismatch(i, "close_to");
            if (as_set(surrounding(a, a2, c)) != oracle::surrounding(pa, pb, pc)) mismatch(i, "surrounding");
            if (oracle::pixels_of(interior(a.mask)) != oracle::interior(pa, 64, 64)) mismatch(i, "interior");

            // algebra
            const auto fwd = as_set(simple_alignment(a, b)), back = as_set(simple_alignment(b, a));
            if (fwd.contains(Relation::left_of) != back.contains(Relation::right_of) ||
                fwd.contains(Relation::right_of) != back.contains(Relation::left_of))
                violation(i, "left/right duality");
            if (fwd.contains(Relation::above_of) != back.contains(Relation::below_of) ||
                fwd.contains(Relation::below_of) != back.contains(Relation::above_of))
                violation(i, "above/below duality");
            if (close_to(a, b, cfg) != close_to(b, a, cfg)) violation(i, "close_to symmetry");
            if (topo.contains(Relation::disjoint) && topo.size() != 1) violation(i, "disjoint not exclusive");
            if (topo.contains(Relation::equals) &&
                !(topo.contains(Relation::covers) && topo.contains(Relation::covered_by)))
                violation(i, "equals without covers/covered_by");
            if (topo.contains(Relation::contains) && !topo.contains(Relation::covers))
                violation(i, "contains without covers");
            if (topo.contains(Relation::within) && !topo.contains(Relation::covered_by))
                violation(i, "within without covered_by");
            const auto rev = as_set(de9im(b, a));
            if (topo.contains(Relation::covers) != rev.contains(Relation::covered_by) ||
                topo.contains(Relation::contains) != rev.contains(Relation::within))
                violation(i, "converse relations disagree");
            // point-sized object: exactly one sector unless center holds
            const oracle::Pixel px = *std::next(pb.begin(), static_cast<long>(rng() % pb.size()));
            const auto point = oracle::region_of({px}, 1);
            const auto comp = as_set(compass_alignment(a, point, cfg));
            if (!(comp.size() == 1)) violation(i, "point region not in exactly one sector");
            ++s.pairs;
        }
        s.seconds = seconds_since(t0);
        return s;
    }();
    return stats;
}

Outcome spatial_oracle_equivalence()
{
    Outcome out;
    const auto& s = spatial_pairs();
    out.require(s.first_mismatch.empty(), s.first_mismatch);
    out.require(s.seconds < 30.0, fmt("took %.2f s", s.seconds));
    if (out.pass) out.detail = fmt("%zu pairs, all predicates exact, %.2f s", s.pairs, s.seconds);
    return out;
}

Outcome relation_algebra()
{
    Outcome out;
    const auto& s = spatial_pairs();
    out.require(s.first_algebra_violation.empty(), s.first_algebra_violation);
    if (out.pass) out.detail = fmt("duality, symmetry, DE-9IM lattice and point sectors hold on %zu pairs", s.pairs);
    return out;
}

Outcome learner_soundness_optimality()
{
    Outcome out;
    std::mt19937_64 rng(777);
    std::size_t theories = 0, clauses = 0;
    for (int round = 0; round < 300 && out.pass; ++round) {
        const auto kb = oracle::random_kb(rng, 4 + rng() % 37, 4 + rng() % 9, 0.5, round % 3 != 0);
        LearnConfig cfg;
        cfg.max_body = 1 + static_cast<std::uint32_t>(rng() % 3);
        cfg.noise = static_cast<std::uint32_t>(rng() % 3);
        cfg.min_pos = 1 + static_cast<std::uint32_t>(rng() % 2);
        ConstraintSet phi;
        if (round % 4 == 1) phi.forbidden_concepts = {static_cast<ConceptId>(rng() % 5)};
        const Theory t = induce(kb, cfg, phi);
        if (const auto problem = oracle::verify_theory(t, kb, cfg, phi))
            out.fail(fmt("kb %d: ", round) + *problem);
        ++theories;
        clauses += t.clauses.size();
    }
    // and on the pipeline's own knowledge base (soundness only: bottoms are large)
    const auto& r = default_run();
    for (const auto& c : r.learned.theory.clauses) {
        const auto cov = oracle::coverage(c.body, r.extraction->kb, r.extraction->kb.positives);
        out.require(cov.neg <= r.learned.theory.config.noise && cov.pos >= r.learned.theory.config.min_pos,
                    "synthetic theory clause unsound");
    }
    if (out.pass)
        out.detail = fmt("%zu random KBs (<=40 samples, <=12 bottom literals), %zu clauses sound and optimal", theories,
                         clauses);
    return out;
}

Outcome constraint_loop()
{
    Outcome out;
    const GeneratorConfig g = noisy_generator();
    const SyntheticSet set = generate(g);
    const PipelineConfig cfg = noisy_pipeline();
    const Extraction ex = extract(set.dataset, cfg);
    const Learned before = learn(ex, cfg);
    const auto planted = planted_ids(g);
    std::vector<ConceptId> candidates;
    for (ConceptId c : before.theory.concepts())
        if (!planted.contains(c)) candidates.push_back(c);
    if (candidates.empty()) {
        out.fail("theory holds no non-planted concept to forbid");
        return out;
    }
    std::string summary;
    for (ConceptId c : candidates) {
        PipelineConfig next = cfg;
        next.constraints.forbidden_concepts.insert(c);
        const Learned after = learn(ex, next);
        out.require(!after.theory.concepts().contains(c), fmt("c%u still in the theory", c));
        for (const auto& cl : after.theory.clauses)
            for (const auto& l : cl.body) out.require(next.constraints.allows(l), "forbidden literal in theory");
        const double delta = after.report.fidelity - before.report.fidelity;
        out.require(std::abs(delta) <= 0.02, fmt("forbidding c%u moved fidelity by %.4f", c, delta));
        summary += fmt("%sc%u: %.4f -> %.4f", summary.empty() ? "" : ", ", c, before.report.fidelity,
                       after.report.fidelity);
    }
    if (out.pass) out.detail = "fidelity " + summary + " (|delta| <= 0.02)";
    return out;
}

Outcome contrastive_correctness()
{
    Outcome out;
    std::size_t checked = 0;
    auto check_run = [&](const PipelineResult& r) {
        const auto& theory = r.learned.theory;
        for (std::size_t ci = 0; ci < theory.clauses.size(); ++ci) {
            const auto& body = theory.clauses[ci].body;
            if (body.size() > 3) continue;
            for (const auto& [id, facts] : r.extraction->kb.facts) {
                const auto rep = contrastive(theory, id, facts, ci);
                if (covers(theory.clauses[ci], facts)) {
                    out.require(rep.failing_literals.empty(), "covered sample reported failing literals");
                    continue;
                }
                const std::size_t k = rep.failing_literals.size();
                out.require(k > 0, "uncovered sample without failing literals");
                for (std::uint32_t bits = 0; bits < (1u << k); ++bits) {
                    std::vector<Literal> kept;
                    for (const auto& l : body) {
                        const auto it = std::find(rep.failing_literals.begin(), rep.failing_literals.end(), l);
                        if (it == rep.failing_literals.end() || !(bits >> (it - rep.failing_literals.begin()) & 1u))
                            kept.push_back(l);
                    }
                    const bool all_removed = bits == (1u << k) - 1;
                    out.require(covers(kept, facts) == all_removed,
                                "sample " + id + ": removal of failing subset behaves wrongly");
                }
                ++checked;
            }
        }
    };
    check_run(default_run());
    check_run(run_pipeline(generate(noisy_generator()).dataset, noisy_pipeline()));
    if (out.pass) out.detail = fmt("%zu uncovered (sample, clause) pairs, every failing-literal subset checked", checked);
    return out;
}

Outcome rank_pattern()
{
    Outcome out;
    const auto& r = default_run();
    const auto& ranks = r.learned.ranks;
    const auto limit = static_cast<std::uint32_t>(std::ceil(0.2 * ranks.possible_ranks));
    const auto planted = planted_ids(GeneratorConfig{});
    std::size_t seen = 0;
    for (const auto& h : ranks.per_concept) {
        if (!h.concept_id || !planted.contains(*h.concept_id)) continue;
        ++seen;
        out.require(!h.top_ranks.empty(), fmt("c%u has no ranks", *h.concept_id));
        if (!h.top_ranks.empty())
            out.require(h.top_ranks.front().first <= limit,
                        fmt("c%u most frequent rank %u > %u", *h.concept_id, h.top_ranks.front().first, limit));
    }
    out.require(seen > 0, "no planted concept in the top rules");
    out.require(!ranks.pooled.top_ranks.empty() && ranks.pooled.top_ranks.front().first <= limit,
                "pooled most frequent rank outside the top 20%");
    if (out.pass)
        out.detail = fmt("%zu planted concepts, most frequent rank <= %u of %u possible", seen, limit,
                         ranks.possible_ranks);
    return out;
}

Outcome determinism_roundtrips()
{
    Outcome out;
    fixture::TempDir d1("acc1"), d2("acc2");
    const PipelineConfig cfg;
    for (const auto* dir : {&d1, &d2}) {
        const SyntheticSet set = generate(GeneratorConfig{});
        save_dataset(set.dataset, dir->path / "data");
        write_expected_rule(GeneratorConfig{}, dir->path / "data" / "expected_rule.json");
        const Dataset loaded = load_dataset(dir->path / "data" / "manifest.json");
        out.require(bit_identical(loaded, set.dataset), "CRM1 dataset round-trip changed data");
        write_artifacts(run_pipeline(loaded, cfg), cfg, dir->path / "out", set.labels);
    }
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(d1.path)) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(e.path(), d1.path);
        out.require(slurp(e.path()) == slurp(d2.path / rel), "file differs between runs: " + rel.string());
    }
    const auto& r = default_run();
    const KbText text = render_kb(r.extraction->kb);
    out.require(parse_kb(text.background, text.positives, text.negatives) == r.extraction->kb,
                "KB text round-trip is not the identity");
    const KbText written{slurp(d1.path / "out" / "bk.pl"), slurp(d1.path / "out" / "pos.pl"),
                         slurp(d1.path / "out" / "neg.pl")};
    out.require(written == text, "written KB differs from render_kb");
    const Theory parsed = parse_theory(render_theory(r.learned.theory));
    out.require(render_theory(parsed) == render_theory(r.learned.theory), "theory text round-trip failed");
    if (out.pass) out.detail = fmt("%zu files byte-identical across two runs; CRM1, KB and theory text round-trip", files);
    return out;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"planted-rule recovery", planted_rule_recovery},
        {"masking ablation direction", masking_direction},
        {"fidelity exactness", fidelity_exactness},
        {"spatial oracle equivalence", spatial_oracle_equivalence},
        {"relation algebra", relation_algebra},
        {"learner soundness and optimality", learner_soundness_optimality},
        {"constraint loop", constraint_loop},
        {"contrastive correctness", contrastive_correctness},
        {"rank pattern", rank_pattern},
        {"determinism and round-trips", determinism_roundtrips},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
