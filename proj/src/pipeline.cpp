#include "corex/pipeline.hpp"

#include <exception>
#include <fstream>
#include <sstream>

#include "corex/kb.hpp"

namespace corex {

namespace {

template <class F>
auto in_stage(const char* name, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw e.with_stage(name);
    }
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

SampleGeometry sample_geometry(const SampleRecord& sample, const std::vector<ConceptScore>& retained,
                               const PipelineConfig& cfg)
{
    SampleGeometry g;
    g.retained = retained;
    g.regions = in_stage("localize", [&] {
        std::vector<ConceptRegion> regions;
        for (const auto& score : retained) {
            if (score.sign == Sign::null) continue;
            const RelevanceGrid* grid = sample.find(score.concept_id);
            auto found = localize(*grid, score.sign, cfg.localize);
            regions.insert(regions.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
        }
        return regions;
    });
    g.facts = in_stage("relations", [&] {
        if (sample.grids.empty()) return std::set<RelationFact>{};
        return find_relations(g.regions, cfg.relations_for(sample.grids.front().height, sample.grids.front().width));
    });
    return g;
}

}  // namespace

void PipelineConfig::validate() const
{
    selection.validate();
    localize.validate();
    learn.validate();
    if (!(close_range_frac >= 0.0) || !(center_buffer_frac >= 0.0))
        throw Error(ErrorCode::config, "relation range fractions must be non-negative");
    if (top_rules < 1) throw Error(ErrorCode::config, "top_rules must be at least 1");
}

RelationConfig PipelineConfig::relations_for(std::uint32_t height, std::uint32_t width) const
{
    RelationConfig rc = RelationConfig::for_grid(height, width, close_range_frac, center_buffer_frac);
    rc.enabled_sets = relation_sets;
    return rc;
}

json to_json(const PipelineConfig& cfg)
{
    json sets = json::array();
    for (RelationSet s : cfg.relation_sets) sets.push_back(to_string(s));
    json j{{"selection",
            {{"bk_quantile", cfg.selection.bk_quantile},
             {"zero_band", cfg.selection.zero_band},
             {"quantile_scope", cfg.selection.scope == QuantileScope::dataset ? "dataset" : "per_sample"}}},
           {"localize",
            {{"pixel_threshold", cfg.localize.pixel_threshold},
             {"min_component_px", cfg.localize.min_component_px},
             {"max_instances", cfg.localize.max_instances}}},
           {"relations",
            {{"close_range_frac", cfg.close_range_frac}, {"center_buffer_frac", cfg.center_buffer_frac}, {"sets", sets}}},
           {"learn", to_json(cfg.learn)},
           {"constraints", to_json(cfg.constraints)},
           {"top_rules", cfg.top_rules}};
    j["mask"] = cfg.mask ? to_json(*cfg.mask) : json(nullptr);
    return j;
}

PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig cfg)
{
    if (!j.is_object()) throw Error(ErrorCode::config, "pipeline config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "selection") {
                for (const auto& [k, v] : value.items()) {
                    if (k == "bk_quantile") cfg.selection.bk_quantile = v.get<double>();
                    else if (k == "zero_band") cfg.selection.zero_band = v.get<double>();
                    else if (k == "quantile_scope") {
                        const auto s = v.get<std::string>();
                        if (s == "per_sample") cfg.selection.scope = QuantileScope::per_sample;
                        else if (s == "dataset") cfg.selection.scope = QuantileScope::dataset;
                        else throw Error(ErrorCode::config, "quantile_scope must be per_sample or dataset");
                    } else throw Error(ErrorCode::config, "unknown selection field '" + k + "'");
                }
            } else if (key == "localize") {
                for (const auto& [k, v] : value.items()) {
                    if (k == "pixel_threshold") cfg.localize.pixel_threshold = v.get<double>();
                    else if (k == "min_component_px") cfg.localize.min_component_px = v.get<std::uint32_t>();
                    else if (k == "max_instances") cfg.localize.max_instances = v.get<std::uint32_t>();
                    else throw Error(ErrorCode::config, "unknown localize field '" + k + "'");
                }
            } else if (key == "relations") {
                for (const auto& [k, v] : value.items()) {
                    if (k == "close_range_frac") cfg.close_range_frac = v.get<double>();
                    else if (k == "center_buffer_frac") cfg.center_buffer_frac = v.get<double>();
                    else if (k == "sets") {
                        cfg.relation_sets.clear();
                        for (const auto& s : v) cfg.relation_sets.insert(parse_relation_set(s.get<std::string>()));
                    } else throw Error(ErrorCode::config, "unknown relations field '" + k + "'");
                }
            } else if (key == "learn") {
                cfg.learn = learn_config_from_json(value, cfg.learn);
            } else if (key == "constraints") {
                cfg.constraints = constraints_from_json(value);
            } else if (key == "mask") {
                if (value.is_null()) cfg.mask.reset();
                else cfg.mask = mask_spec_from_json(value);
            } else if (key == "top_rules") {
                cfg.top_rules = value.get<std::size_t>();
            } else {
                throw Error(ErrorCode::config, "unknown config field '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("malformed pipeline config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, "'" + path.string() + "': " + e.what());
    }
    return pipeline_config_from_json(j);
}

const SampleGeometry* Extraction::geometry_of(std::string_view sample_id) const
{
    for (std::size_t i = 0; i < dataset.samples.size(); ++i)
        if (dataset.samples[i].sample_id == sample_id) return &geometry[i];
    return nullptr;
}

std::vector<SampleGeometry> extract_geometry(const Dataset& dataset, const PipelineConfig& cfg, Exec exec)
{
    const auto retained = in_stage("select", [&] { return filter_dataset(dataset, cfg.selection); });
    const std::size_t n = dataset.samples.size();
    std::vector<SampleGeometry> out(n);
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) out[i] = sample_geometry(dataset.samples[i], retained[i], cfg);
        return out;
    }
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (long li = 0; li < static_cast<long>(n); ++li) {
        const auto i = static_cast<std::size_t>(li);
        try {
            out[i] = sample_geometry(dataset.samples[i], retained[i], cfg);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

Extraction extract(const Dataset& dataset, const PipelineConfig& cfg, Exec exec)
{
    in_stage("config", [&] {
        cfg.validate();
        return 0;
    });
    Extraction ex;
    ex.dataset = in_stage("mask", [&] {
        if (!cfg.mask || cfg.mask->masked_concepts.empty()) return dataset;
        return apply_mask(dataset, cfg.mask->masked_concepts);
    });
    ex.geometry = extract_geometry(ex.dataset, cfg, exec);
    ex.kb = in_stage("kb", [&] {
        FactsBySample facts;
        for (std::size_t i = 0; i < ex.dataset.samples.size(); ++i)
            facts[ex.dataset.samples[i].sample_id] = ex.geometry[i].facts;
        return build_kb(ex.dataset, facts);
    });
    return ex;
}

Learned learn(const Extraction& ex, const PipelineConfig& cfg)
{
    Learned out;
    out.theory = in_stage("induce", [&] { return induce(ex.kb, cfg.learn, cfg.constraints); });
    in_stage("evaluate", [&] {
        std::vector<Label> model, ground;
        for (const auto& s : ex.dataset.samples) {
            out.explainer_truth.push_back(explainer_truth(out.theory, ex.kb.facts_of(s.sample_id), s.sample_id));
            model.push_back(s.model_truth);
            ground.push_back(s.ground_truth);
        }
        if (!model.empty()) out.report.fidelity = fidelity(model, out.explainer_truth);
        out.report.confusion = confusion(ground, out.explainer_truth);
        out.report.f1 = f1_score(out.report.confusion);
        out.partition = partition_concepts(ex.dataset, cfg.selection, out.theory.concepts());
        out.clusters = clusters(out.theory, ex.kb);
        if (!out.theory.clauses.empty()) out.ranks = rank_analysis(ex.dataset, out.theory, cfg.top_rules);
        return 0;
    });
    return out;
}

PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& cfg)
{
    PipelineConfig effective = cfg;
    if (cfg.mask && cfg.mask->label != MaskLabel::custom && cfg.mask->masked_concepts.empty()) {
        PipelineConfig unmasked = cfg;
        unmasked.mask.reset();
        const PipelineResult base = run_pipeline(dataset, unmasked);
        effective.mask = in_stage("mask", [&] { return make_mask(cfg.mask->label, base.learned.partition); });
    }
    PipelineResult result;
    auto ex = std::make_shared<Extraction>(extract(dataset, effective));
    result.learned = learn(*ex, effective);
    result.extraction = std::move(ex);
    return result;
}

json report_json(const PipelineResult& result, const PipelineConfig& cfg)
{
    const auto& ex = *result.extraction;
    std::size_t facts = 0, regions = 0;
    for (const auto& g : ex.geometry) {
        facts += g.facts.size();
        regions += g.regions.size();
    }
    json samples = json::array();
    for (std::size_t i = 0; i < ex.dataset.samples.size(); ++i) {
        const auto& s = ex.dataset.samples[i];
        samples.push_back({{"sample_id", s.sample_id},
                           {"ground_truth", to_string(s.ground_truth)},
                           {"model_truth", to_string(s.model_truth)},
                           {"explainer_truth", to_string(result.learned.explainer_truth[i])}});
    }
    return {{"evaluation", to_json(result.learned.report)},
            {"partition", to_json(result.learned.partition)},
            {"counts",
             {{"samples", ex.dataset.samples.size()},
              {"positives", ex.kb.positives.size()},
              {"negatives", ex.kb.negatives.size()},
              {"regions", regions},
              {"facts", facts},
              {"clauses", result.learned.theory.clauses.size()}}},
            {"samples", samples},
            {"config", to_json(cfg)}};
}

std::string clusters_csv(const ClusterMap& clusters)
{
    std::ostringstream out;
    out << "clauses,size,samples\n";
    for (const auto& [key, samples] : clusters) {
        std::string k, s;
        for (std::size_t i : key) k += (k.empty() ? "" : ";") + std::to_string(i);
        for (const auto& id : samples) s += (s.empty() ? "" : ";") + id;
        out << k << ',' << samples.size() << ',' << s << '\n';
    }
    return out.str();
}

std::string ranks_csv(const RankReport& ranks)
{
    std::ostringstream out;
    out << "concept,rank,count\n";
    auto rows = [&](const RankHistogram& h) {
        const std::string c = h.concept_id ? std::to_string(*h.concept_id) : "all";
        for (const auto& [rank, count] : h.top_ranks) out << c << ',' << rank << ',' << count << '\n';
    };
    for (const auto& h : ranks.per_concept) rows(h);
    rows(ranks.pooled);
    return out.str();
}

void write_artifacts(const PipelineResult& result, const PipelineConfig& cfg, const std::filesystem::path& dir,
                     const ConceptLabels& labels)
{
    in_stage("write", [&] {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
        const auto& ex = *result.extraction;
        const KbText kb = render_kb(ex.kb);
        write_file(dir / "bk.pl", kb.background);
        write_file(dir / "pos.pl", kb.positives);
        write_file(dir / "neg.pl", kb.negatives);
        write_file(dir / "theory.pl", render_theory(result.learned.theory));
        write_file(dir / "theory.json", dump(to_json(result.learned.theory, ex.dataset.class_name, labels)));
        write_file(dir / "report.json", dump(report_json(result, cfg)));
        write_file(dir / "clusters.csv", clusters_csv(result.learned.clusters));
        write_file(dir / "ranks.csv", ranks_csv(result.learned.ranks));
        return 0;
    });
}

}  // namespace corex
