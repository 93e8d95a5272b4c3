#include <doctest.h>

#include <fstream>
#include <sstream>

#include "corex/ingest.hpp"
#include "corex/pipeline.hpp"
#include "corex/synth.hpp"
#include "fixtures.hpp"

using namespace corex;
namespace fs = std::filesystem;

namespace {

const SyntheticSet& shared_set()
{
    static const SyntheticSet set = [] {
        GeneratorConfig g;
        g.n_pos = 60;
        g.n_neg = 60;
        return generate(g);
    }();
    return set;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::set<ConceptId> planted_ids() { return {0, 1, 2}; }

}  // namespace

TEST_CASE("pipeline recovers the planted rule on a small set")
{
    const auto& set = shared_set();
    const auto r = run_pipeline(set.dataset, {});
    REQUIRE(r.learned.theory.clauses.size() == 1);
    CHECK(r.learned.theory.clauses[0].body == set.rule.literals);
    CHECK(r.learned.report.fidelity == 1.0);
    CHECK(r.learned.report.f1 == 1.0);
    CHECK(r.learned.partition.rule_concepts == std::set<ConceptId>{0, 2});
    CHECK(r.extraction->geometry.size() == set.dataset.samples.size());
}

TEST_CASE("serial and parallel extraction agree")
{
    const auto& set = shared_set();
    const PipelineConfig cfg;
    const auto a = extract_geometry(set.dataset, cfg, Exec::serial);
    const auto b = extract_geometry(set.dataset, cfg, Exec::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].retained == b[i].retained);
        CHECK(a[i].regions == b[i].regions);
        CHECK(a[i].facts == b[i].facts);
    }
}

TEST_CASE("artifacts are byte-identical across runs")
{
    const auto& set = shared_set();
    fixture::TempDir d1("pipe1"), d2("pipe2");
    const PipelineConfig cfg;
    write_artifacts(run_pipeline(set.dataset, cfg), cfg, d1.path, set.labels);
    write_artifacts(run_pipeline(set.dataset, cfg), cfg, d2.path, set.labels);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(d1.path)) {
        ++files;
        CHECK(slurp(e.path()) == slurp(d2.path / e.path().filename()));
    }
    CHECK(files == 8);
    const std::string theory = slurp(d1.path / "theory.pl");
    CHECK(theory == "is_class(A) :- above_of(A, pos(A,c0), pos(A,c2)).\n");
    CHECK(slurp(d1.path / "clusters.csv").rfind("clauses,size,samples\n", 0) == 0);
    CHECK(slurp(d1.path / "ranks.csv").rfind("concept,rank,count\n", 0) == 0);

    // the written knowledge base parses back to the in-memory one
    const auto r = run_pipeline(set.dataset, cfg);
    const KnowledgeBase kb =
        parse_kb(slurp(d1.path / "bk.pl"), slurp(d1.path / "pos.pl"), slurp(d1.path / "neg.pl"));
    CHECK(kb == r.extraction->kb);
    CHECK(parse_theory(theory).clauses[0].body == r.learned.theory.clauses[0].body);
}

TEST_CASE("dataset saved to disk gives the same theory")
{
    const auto& set = shared_set();
    fixture::TempDir dir("pipe_disk");
    save_dataset(set.dataset, dir.path);
    const Dataset loaded = load_dataset(dir.path / "manifest.json");
    CHECK(bit_identical(loaded, set.dataset));
    CHECK(run_pipeline(loaded, {}).learned.theory == run_pipeline(set.dataset, {}).learned.theory);
}

TEST_CASE("forbidden planted concept leaves the theory")
{
    const auto& set = shared_set();
    PipelineConfig cfg;
    cfg.constraints.forbidden_concepts = {0};
    const auto r = run_pipeline(set.dataset, cfg);
    CHECK_FALSE(r.learned.theory.concepts().contains(0));
    for (const auto& c : r.learned.theory.clauses)
        for (const auto& l : c.body) CHECK(cfg.constraints.allows(l));
}

TEST_CASE("named mask resolves from an unmasked run")
{
    const auto& set = shared_set();
    PipelineConfig cfg;
    cfg.mask = MaskSpec{{}, MaskLabel::nonbk_only};
    const auto r = run_pipeline(set.dataset, cfg);
    const auto base = run_pipeline(set.dataset, {});
    std::size_t nonzero = 0;
    for (const auto& s : r.extraction->dataset.samples)
        for (const auto& g : s.grids)
            if (base.learned.partition.irrelevant_concepts.contains(g.concept_id))
                for (float v : g.values) nonzero += v != 0.0f;
    CHECK(nonzero == 0);
    CHECK(r.learned.theory.concepts() == base.learned.theory.concepts());
}

TEST_CASE("errors carry the failing stage")
{
    Dataset all_neg = shared_set().dataset;
    for (auto& s : all_neg.samples) s.model_truth = Label::negative;
    try {
        run_pipeline(all_neg, {});
        FAIL("expected EmptyPositives");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_positives);
        CHECK(e.stage() == "induce");
    }
    PipelineConfig bad;
    bad.selection.bk_quantile = 2;
    try {
        run_pipeline(shared_set().dataset, bad);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config);
        CHECK(e.stage() == "config");
    }
}

TEST_CASE("config json round-trip and strictness")
{
    PipelineConfig cfg;
    cfg.selection.bk_quantile = 0.7;
    cfg.selection.scope = QuantileScope::dataset;
    cfg.localize.max_instances = 3;
    cfg.close_range_frac = 0.2;
    cfg.relation_sets = {RelationSet::simple_alignment, RelationSet::distance};
    cfg.learn.noise = 4;
    cfg.constraints.forbidden_concepts = {3};
    cfg.constraints.forbidden_relations = {Relation::contains};
    cfg.constraints.forbidden_literals = {{Relation::left_of, {1, Sign::pos}, SignedConcept{2, Sign::neg}}};
    cfg.mask = MaskSpec{{4, 5}, MaskLabel::custom};
    cfg.top_rules = 5;
    const json j = to_json(cfg);
    const PipelineConfig back = pipeline_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.learn == cfg.learn);
    CHECK(back.constraints == cfg.constraints);

    CHECK(to_json(pipeline_config_from_json(json::object())) == to_json(PipelineConfig{}));
    CHECK_THROWS_AS(pipeline_config_from_json(json{{"bogus", 1}}), Error);
    CHECK_THROWS_AS(pipeline_config_from_json(json{{"learn", {{"max_body", 0}}}}), Error);
    CHECK_THROWS_AS(pipeline_config_from_json(json{{"relations", {{"sets", {"nope"}}}}}), Error);

    fixture::TempDir dir("cfg");
    std::ofstream(dir.path / "c.json") << j.dump();
    CHECK(to_json(load_pipeline_config(dir.path / "c.json")) == j);
    std::ofstream(dir.path / "bad.json") << "{";
    CHECK_THROWS_AS(load_pipeline_config(dir.path / "bad.json"), Error);
}

TEST_CASE("constraint json forms")
{
    const auto c = constraints_from_json(json::parse(R"j({
        "forbidden_concepts": [7],
        "forbidden_relations": ["contains", "left_of/3"],
        "forbidden_literals": ["right_of(A, pos(A,c30), pos(A,c9))",
                               {"predicate": "contains", "subject": {"concept_id": 1, "sign": "neg"}}]})j"));
    CHECK(c.forbidden_concepts == std::set<ConceptId>{7});
    CHECK(c.forbidden_relations == std::set<Relation>{Relation::present, Relation::contains, Relation::left_of});
    CHECK(c.forbidden_literals.size() == 2);
    CHECK(c.forbidden_literals.contains({Relation::present, {1, Sign::neg}, std::nullopt}));
    CHECK_THROWS_AS(constraints_from_json(json{{"forbidden_concept", {1}}}), Error);
    CHECK_THROWS_AS(constraints_from_json(json{{"forbidden_literals", {"nonsense(A"}}}), Error);
    CHECK(constraints_from_json(nullptr).empty());
}
