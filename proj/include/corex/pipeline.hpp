#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "corex/analysis.hpp"
#include "corex/concept_select.hpp"
#include "corex/geometry.hpp"
#include "corex/ilp.hpp"
#include "corex/json_io.hpp"

namespace corex {

struct PipelineConfig {
    SelectionConfig selection;
    LocalizeConfig localize;
    double close_range_frac = 0.10;
    double center_buffer_frac = 0.05;
    std::set<RelationSet> relation_sets = RelationConfig{}.enabled_sets;
    LearnConfig learn;
    ConstraintSet constraints;
    std::optional<MaskSpec> mask;  // applied before concept selection
    std::size_t top_rules = 3;

    void validate() const;
    RelationConfig relations_for(std::uint32_t height, std::uint32_t width) const;
};

json to_json(const PipelineConfig& cfg);
/// Missing fields keep their defaults; unknown fields are rejected.
PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig base = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct SampleGeometry {
    std::vector<ConceptScore> retained;
    std::vector<ConceptRegion> regions;
    std::set<RelationFact> facts;
};

/// Everything up to and including the knowledge base. Independent of the
/// learner settings and constraints, so re-induction reuses it.
struct Extraction {
    Dataset dataset;  // after the optional mask
    std::vector<SampleGeometry> geometry;  // parallel to dataset.samples
    KnowledgeBase kb;

    const SampleGeometry* geometry_of(std::string_view sample_id) const;
};

struct Learned {
    Theory theory;
    std::vector<Label> explainer_truth;  // parallel to dataset.samples
    EvaluationReport report;             // fidelity vs model truth; F1 vs ground truth
    ConceptPartition partition;
    ClusterMap clusters;
    RankReport ranks;
};

struct PipelineResult {
    std::shared_ptr<const Extraction> extraction;
    Learned learned;
};

/// Selection, localization and relation extraction for every sample.
/// Exec::parallel distributes samples over OpenMP threads; both modes give
/// identical output.
std::vector<SampleGeometry> extract_geometry(const Dataset& dataset, const PipelineConfig& cfg,
                                             Exec exec = Exec::parallel);

Extraction extract(const Dataset& dataset, const PipelineConfig& cfg, Exec exec = Exec::parallel);
Learned learn(const Extraction& extraction, const PipelineConfig& cfg);

/// The full algorithm. A named mask without explicit concepts is resolved
/// from the partition of an unmasked run. Errors carry the failing stage.
PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& cfg);

/// bk.pl, pos.pl, neg.pl, theory.pl, theory.json, report.json, clusters.csv,
/// ranks.csv. Byte-identical for identical inputs.
void write_artifacts(const PipelineResult& result, const PipelineConfig& cfg, const std::filesystem::path& dir,
                     const ConceptLabels& labels = {});

json report_json(const PipelineResult& result, const PipelineConfig& cfg);
std::string clusters_csv(const ClusterMap& clusters);
std::string ranks_csv(const RankReport& ranks);

}  // namespace corex
