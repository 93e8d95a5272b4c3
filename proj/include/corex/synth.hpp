#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "corex/analysis.hpp"
#include "corex/kb.hpp"

namespace corex {

/// SplitMix64 (Steele, Lea, Flood 2014). Fully specified so other
/// implementations can reproduce generated datasets bit for bit.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform in [0, n) by multiply-shift on the top 32 bits.
    std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(((next() >> 32) * n) >> 32); }

private:
    std::uint64_t state_;
};

struct PlantedConcept {
    ConceptId concept_id = 0;
    Point position;          // canonical blob center
    double amplitude = 1.0;  // signed peak value
    std::string label;
};

/// Planted binary relation between two planted concepts (indices into
/// GeneratorConfig::planted). Only the SimpleAlignment relations are allowed.
struct PlantedRule {
    Relation relation = Relation::above_of;
    std::size_t subject = 0;
    std::size_t object = 2;
};

struct GeneratorConfig {
    std::uint64_t seed = 42;
    std::uint32_t n_pos = 200;
    std::uint32_t n_neg = 200;
    std::uint32_t height = 64;
    std::uint32_t width = 64;
    std::vector<PlantedConcept> planted{
        {0, {32.0, 18.0}, 1.0, "eyes"},
        {1, {32.0, 32.0}, 0.8, "nose"},
        {2, {32.0, 46.0}, 0.9, "mouth"},
    };
    PlantedRule rule;
    std::uint32_t distractor_concepts = 5;
    double distractor_amplitude = 0.6;  // first distractor; each further one 0.1 weaker, floor 0.1
    double blob_sigma = 3.0;
    double jitter = 2.0;  // uniform position noise, pixels
    double model_error_rate = 0.0;
    std::string class_name = "face";
    std::string contrast_class_name = "scrambled_face";
    std::string layer_id = "features.last_conv";

    void validate() const;
    std::vector<ConceptId> distractor_ids() const;
    ConceptLabels labels() const;
};

struct GroundTruthRule {
    std::vector<Literal> literals;
};

struct SyntheticSet {
    Dataset dataset;
    GroundTruthRule rule;
    ModelOracle oracle;
    ConceptLabels labels;
};

/// Truncated (3 sigma) isotropic Gaussian with peak `amplitude` at `center`.
RelevanceGrid gaussian_blob(ConceptId concept_id, std::uint32_t height, std::uint32_t width, Point center,
                            double amplitude, double sigma, const std::string& layer_id);

bool rule_holds(Relation relation, const Point& subject, const Point& object);

GroundTruthRule planted_rule(const GeneratorConfig& cfg);

/// Oracle: positive iff every planted concept carries at least `floor` total
/// |relevance| and the planted rule holds on their |relevance|-weighted
/// centroids. Distractors are ignored.
ModelOracle synthetic_oracle(const GeneratorConfig& cfg, double floor = 1e-3);

SyntheticSet generate(const GeneratorConfig& cfg);

/// expected_rule.json: the planted rule, concept labels and the generator
/// configuration (enough to rebuild the oracle).
void write_expected_rule(const GeneratorConfig& cfg, const std::filesystem::path& path);
GeneratorConfig read_generator_config(const std::filesystem::path& expected_rule_path);

}  // namespace corex
