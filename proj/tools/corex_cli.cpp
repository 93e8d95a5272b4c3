// corex command-line driver.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <omp.h>

#include "corex/ingest.hpp"
#include "corex/pipeline.hpp"
#include "corex/service.hpp"
#include "corex/synth.hpp"

namespace fs = std::filesystem;
using namespace corex;

namespace {

struct Options {
    std::string out = "corex_out";
    std::string data;
    std::string config;
    int threads = 0;

    double bk_quantile = 0.5, zero_band = 1e-6;
    std::string quantile_scope = "per_sample";
    double pixel_threshold = 0.3;
    std::uint32_t min_component = 4, max_instances = 2;
    double close_range_frac = 0.10, center_buffer_frac = 0.05;
    std::vector<std::string> relation_sets;
    std::uint32_t max_body = 3, min_pos = 1, noise = 0, beam_width = 8, exhaustive_limit = 12;
    bool aleph_ground = false;
    std::vector<ConceptId> forbid_concepts;
    std::vector<std::string> forbid_relations, forbid_literals;
    std::size_t top_rules = 3;
};

struct Flag {
    CLI::Option* opt;
    bool set() const { return opt->count() > 0; }
};

fs::path manifest_path(const Options& o)
{
    fs::path p = o.data.empty() ? fs::path(o.out) : fs::path(o.data);
    return fs::is_directory(p) ? p / "manifest.json" : p;
}

fs::path expected_rule_path(const Options& o) { return manifest_path(o).parent_path() / "expected_rule.json"; }

std::optional<GeneratorConfig> generator_of(const Options& o)
{
    const fs::path p = expected_rule_path(o);
    if (!fs::exists(p)) return std::nullopt;
    return read_generator_config(p);
}

ConceptLabels labels_of(const Options& o)
{
    const auto g = generator_of(o);
    return g ? g->labels() : ConceptLabels{};
}

void print_error(const Error& e)
{
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"corex: concept-relation explanations by inductive logic programming"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    std::map<std::string, Flag> flags;
    auto flag = [&](const std::string& name, CLI::Option* opt) { flags[name] = Flag{opt}; };

    app.add_option("--out", o.out, "Output directory")->capture_default_str();
    app.add_option("--data", o.data, "Dataset manifest or directory (default: --out)");
    app.add_option("--config", o.config, "JSON file mirroring the pipeline configuration")->check(CLI::ExistingFile);
    app.add_option("--threads", o.threads, "OpenMP threads (0: runtime default)");

    auto* sel = "Concept selection";
    flag("bk_quantile", app.add_option("--bk-quantile", o.bk_quantile, "Quantile of |relevance| kept per sample")->group(sel));
    flag("zero_band", app.add_option("--zero-band", o.zero_band, "Null-sign band, fraction of max |sum|")->group(sel));
    flag("quantile_scope", app.add_option("--quantile-scope", o.quantile_scope, "per_sample or dataset")
                               ->check(CLI::IsMember({"per_sample", "dataset"}))
                               ->group(sel));
    auto* geo = "Localization and relations";
    flag("pixel_threshold", app.add_option("--pixel-threshold", o.pixel_threshold, "Fraction of the signed max")->group(geo));
    flag("min_component", app.add_option("--min-component", o.min_component, "Smallest region in pixels")->group(geo));
    flag("max_instances", app.add_option("--max-instances", o.max_instances, "Regions kept per concept")->group(geo));
    flag("close_range_frac", app.add_option("--close-range-frac", o.close_range_frac, "close_to range, fraction of the diagonal")->group(geo));
    flag("center_buffer_frac", app.add_option("--center-buffer-frac", o.center_buffer_frac, "center buffer, fraction of the diagonal")->group(geo));
    flag("relation_sets", app.add_option("--relation-sets", o.relation_sets, "Enabled relation sets")->delimiter(',')->group(geo));
    auto* ilp = "Learner and constraints";
    flag("max_body", app.add_option("--max-body", o.max_body)->group(ilp));
    flag("min_pos", app.add_option("--min-pos", o.min_pos)->group(ilp));
    flag("noise", app.add_option("--noise", o.noise, "Negatives a clause may cover")->group(ilp));
    flag("beam_width", app.add_option("--beam-width", o.beam_width)->group(ilp));
    flag("exhaustive_limit", app.add_option("--exhaustive-limit", o.exhaustive_limit)->group(ilp));
    flag("aleph_ground", app.add_flag("--aleph-ground-clauses", o.aleph_ground, "Keep uncovered positives as ground clauses")->group(ilp));
    flag("forbid_concepts", app.add_option("--forbid-concept", o.forbid_concepts)->delimiter(',')->group(ilp));
    flag("forbid_relations", app.add_option("--forbid-relation", o.forbid_relations, "name or name/arity")->delimiter(',')->group(ilp));
    flag("forbid_literals", app.add_option("--forbid-literal", o.forbid_literals, "e.g. \"left_of(A, pos(A,c1), pos(A,c2))\"")->group(ilp));
    flag("top_rules", app.add_option("--top-rules", o.top_rules, "Clauses used by rank analysis")->group(ilp));

    // generate
    GeneratorConfig gen;
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic dataset with a planted rule");
    generate_cmd->add_option("--seed", gen.seed)->capture_default_str();
    generate_cmd->add_option("--n-pos", gen.n_pos)->capture_default_str();
    generate_cmd->add_option("--n-neg", gen.n_neg)->capture_default_str();
    generate_cmd->add_option("--height", gen.height)->capture_default_str();
    generate_cmd->add_option("--width", gen.width)->capture_default_str();
    generate_cmd->add_option("--distractors", gen.distractor_concepts)->capture_default_str();
    generate_cmd->add_option("--sigma", gen.blob_sigma)->capture_default_str();
    generate_cmd->add_option("--jitter", gen.jitter)->capture_default_str();
    generate_cmd->add_option("--model-error-rate", gen.model_error_rate)->capture_default_str();

    auto* induce_cmd = app.add_subcommand("induce", "Run the pipeline and write KB, theory and reports");
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Print fidelity, confusion and F1");
    std::string sample;
    std::optional<std::size_t> clause_index;
    auto* explain_cmd = app.add_subcommand("explain", "Contrastive explanation of one sample");
    explain_cmd->add_option("sample", sample)->required();
    explain_cmd->add_option("--clause", clause_index, "Clause index (default: highest coverage)");
    auto* cluster_cmd = app.add_subcommand("cluster", "Group samples by the clauses covering them");
    auto* ranks_cmd = app.add_subcommand("ranks", "Relevance ranks of the top rules' concepts");
    std::string mask_label;
    std::vector<ConceptId> mask_concepts;
    auto* mask_cmd = app.add_subcommand("mask", "Ablation: zero concepts and re-label with the oracle");
    auto* label_opt = mask_cmd->add_option("--label", mask_label)->check(CLI::IsMember({"rule_plus_nonbk", "nonbk_only"}));
    auto* concepts_opt = mask_cmd->add_option("--concepts", mask_concepts)->delimiter(',');
    label_opt->excludes(concepts_opt);
    std::string host = "127.0.0.1";
    int port = 8080;
    bool no_queue = false;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API");
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();
    serve_cmd->add_flag("--no-queue", no_queue, "Reject concurrent mutations with 409");

    CLI11_PARSE(app, argc, argv);
    if (o.threads > 0) omp_set_num_threads(o.threads);

    try {
        if (generate_cmd->parsed()) {
            const auto syn = generate(gen);
            const fs::path dir = o.out;
            const Manifest m = save_dataset(syn.dataset, dir);
            write_expected_rule(gen, dir / "expected_rule.json");
            std::cout << "wrote " << m.samples.size() << " samples to " << (dir / "manifest.json").string() << "\n";
            return 0;
        }

        PipelineConfig cfg;
        if (!o.config.empty()) cfg = load_pipeline_config(o.config);
        auto is = [&](const char* name) { return flags.at(name).set(); };
        if (is("bk_quantile")) cfg.selection.bk_quantile = o.bk_quantile;
        if (is("zero_band")) cfg.selection.zero_band = o.zero_band;
        if (is("quantile_scope"))
            cfg.selection.scope = o.quantile_scope == "dataset" ? QuantileScope::dataset : QuantileScope::per_sample;
        if (is("pixel_threshold")) cfg.localize.pixel_threshold = o.pixel_threshold;
        if (is("min_component")) cfg.localize.min_component_px = o.min_component;
        if (is("max_instances")) cfg.localize.max_instances = o.max_instances;
        if (is("close_range_frac")) cfg.close_range_frac = o.close_range_frac;
        if (is("center_buffer_frac")) cfg.center_buffer_frac = o.center_buffer_frac;
        if (is("relation_sets")) {
            cfg.relation_sets.clear();
            for (const auto& s : o.relation_sets) cfg.relation_sets.insert(parse_relation_set(s));
        }
        if (is("max_body")) cfg.learn.max_body = o.max_body;
        if (is("min_pos")) cfg.learn.min_pos = o.min_pos;
        if (is("noise")) cfg.learn.noise = o.noise;
        if (is("beam_width")) cfg.learn.beam_width = o.beam_width;
        if (is("exhaustive_limit")) cfg.learn.exhaustive_limit = o.exhaustive_limit;
        if (is("aleph_ground")) cfg.learn.aleph_compat_ground_clauses = o.aleph_ground;
        for (ConceptId c : o.forbid_concepts) cfg.constraints.forbidden_concepts.insert(c);
        for (const auto& r : o.forbid_relations)
            for (Relation rel : relations_matching(r)) cfg.constraints.forbidden_relations.insert(rel);
        for (const auto& l : o.forbid_literals) cfg.constraints.forbidden_literals.insert(parse_literal_text(l));
        if (is("top_rules")) cfg.top_rules = o.top_rules;
        cfg.validate();

        const Dataset dataset = load_dataset(manifest_path(o));
        const ConceptLabels labels = labels_of(o);
        const PipelineResult result = run_pipeline(dataset, cfg);
        const auto& ex = *result.extraction;
        const auto& learned = result.learned;

        if (induce_cmd->parsed()) {
            write_artifacts(result, cfg, o.out, labels);
            std::cout << render_theory(learned.theory);
            for (std::size_t i = 0; i < learned.theory.clauses.size(); ++i) {
                const auto& c = learned.theory.clauses[i];
                std::cout << "% clause " << i << ": " << c.covered_pos.size() << " pos, " << c.covered_neg.size()
                          << " neg; " << verbalize(c, ex.dataset.class_name, labels) << "\n";
            }
            std::cout << "% fidelity " << learned.report.fidelity << ", f1 " << learned.report.f1 << "\n";
        } else if (evaluate_cmd->parsed()) {
            std::cout << dump(to_json(learned.report));
        } else if (explain_cmd->parsed()) {
            const std::string id = ex.dataset.find(sample) ? sample : normalize_sample_id(sample);
            if (!ex.dataset.find(id)) throw Error(ErrorCode::unknown_sample, "unknown sample '" + sample + "'");
            const auto report = contrastive(learned.theory, id, ex.kb.facts_of(id), clause_index, labels);
            std::cout << report.verbalization << "\n" << dump(to_json(report));
        } else if (cluster_cmd->parsed()) {
            std::cout << clusters_csv(learned.clusters);
        } else if (ranks_cmd->parsed()) {
            std::cout << ranks_csv(learned.ranks);
        } else if (mask_cmd->parsed()) {
            const auto g = generator_of(o);
            if (!g) throw Error(ErrorCode::config, "masking needs the oracle description " + expected_rule_path(o).string());
            MaskSpec spec;
            if (label_opt->count() > 0) spec = make_mask(parse_mask_label(mask_label), learned.partition);
            else spec.masked_concepts.insert(mask_concepts.begin(), mask_concepts.end());
            json out = to_json(ablate(ex.dataset, spec, synthetic_oracle(*g)));
            out["mask"] = to_json(spec);
            std::cout << dump(out);
        } else if (serve_cmd->parsed()) {
            const auto g = generator_of(o);
            std::optional<ModelOracle> oracle;
            if (g) oracle = synthetic_oracle(*g);
            Service service(result, cfg, oracle, labels, ServiceOptions{!no_queue});
            const int bound = service.bind(host, port);
            std::cout << "listening on http://" << host << ":" << bound << "\n" << std::flush;
            service.listen();
        }
    } catch (const Error& e) {
        print_error(e);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
