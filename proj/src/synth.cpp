#include "corex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace corex {

using nlohmann::json;

namespace {

constexpr int kMaxShuffles = 1000;

std::string sample_name(std::size_t index, std::size_t total)
{
    const int digits = std::max(4, static_cast<int>(std::to_string(total > 0 ? total - 1 : 0).size()));
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%0*zu", digits, index);
    return buf;
}

Sign sign_of(double amplitude) { return amplitude < 0.0 ? Sign::neg : Sign::pos; }

}  // namespace

void GeneratorConfig::validate() const
{
    if (n_pos < 1 || n_neg < 1) throw Error(ErrorCode::config, "n_pos and n_neg must be at least 1");
    if (height < 1 || width < 1) throw Error(ErrorCode::config, "grid dimensions must be positive");
    if (planted.size() < 2) throw Error(ErrorCode::config, "at least two planted concepts are needed to violate a rule");
    if (!(blob_sigma > 0.0)) throw Error(ErrorCode::config, "blob_sigma must be positive");
    if (!(model_error_rate >= 0.0 && model_error_rate < 1.0))
        throw Error(ErrorCode::config, "model_error_rate must lie in [0, 1)");
    if (rule.subject >= planted.size() || rule.object >= planted.size() || rule.subject == rule.object)
        throw Error(ErrorCode::config, "planted rule must relate two distinct planted concepts");
    if (set_of(rule.relation) != RelationSet::simple_alignment || rule.relation == Relation::present)
        throw Error(ErrorCode::config, "planted rule must be above_of, below_of, left_of or right_of");
    std::vector<ConceptId> ids;
    for (const auto& p : planted) {
        if (p.amplitude == 0.0) throw Error(ErrorCode::config, "planted amplitude must be non-zero");
        ids.push_back(p.concept_id);
    }
    const auto extra = distractor_ids();
    ids.insert(ids.end(), extra.begin(), extra.end());
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw Error(ErrorCode::config, "planted concept ids must be unique");
    if (!rule_holds(rule.relation, planted[rule.subject].position, planted[rule.object].position))
        throw Error(ErrorCode::config, "planted rule does not hold on the canonical positions");
}

std::vector<ConceptId> GeneratorConfig::distractor_ids() const
{
    ConceptId next = 0;
    for (const auto& p : planted) next = std::max(next, p.concept_id + 1);
    std::vector<ConceptId> ids;
    for (std::uint32_t k = 0; k < distractor_concepts; ++k) ids.push_back(next + k);
    return ids;
}

ConceptLabels GeneratorConfig::labels() const
{
    ConceptLabels out;
    for (const auto& p : planted) out[p.concept_id] = p.label;
    for (ConceptId id : distractor_ids()) out[id] = "distractor" + std::to_string(id);
    return out;
}

RelevanceGrid gaussian_blob(ConceptId concept_id, std::uint32_t height, std::uint32_t width, Point center,
                            double amplitude, double sigma, const std::string& layer_id)
{
    RelevanceGrid g{concept_id, layer_id, height, width, std::vector<float>(std::size_t{height} * width, 0.0f)};
    const double reach2 = 9.0 * sigma * sigma;
    for (std::uint32_t y = 0; y < height; ++y)
        for (std::uint32_t x = 0; x < width; ++x) {
            const double dx = x - center.x, dy = y - center.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 <= reach2)
                g.values[std::size_t{y} * width + x] = static_cast<float>(amplitude * std::exp(-d2 / (2.0 * sigma * sigma)));
        }
    return g;
}

bool rule_holds(Relation relation, const Point& s, const Point& o)
{
    switch (relation) {
    case Relation::above_of: return s.y < o.y;
    case Relation::below_of: return s.y > o.y;
    case Relation::left_of: return s.x < o.x;
    case Relation::right_of: return s.x > o.x;
    default: throw Error(ErrorCode::config, "unsupported planted relation");
    }
}

GroundTruthRule planted_rule(const GeneratorConfig& cfg)
{
    const auto& s = cfg.planted[cfg.rule.subject];
    const auto& o = cfg.planted[cfg.rule.object];
    return {{Literal{cfg.rule.relation, {s.concept_id, sign_of(s.amplitude)}, SignedConcept{o.concept_id, sign_of(o.amplitude)}}}};
}

ModelOracle synthetic_oracle(const GeneratorConfig& cfg, double floor)
{
    std::vector<ConceptId> ids;
    for (const auto& p : cfg.planted) ids.push_back(p.concept_id);
    const std::size_t subject = cfg.rule.subject;
    const std::size_t object = cfg.rule.object;
    const Relation relation = cfg.rule.relation;

    ModelOracle oracle;
    oracle.thread_safe = true;
    oracle.classify = [ids, subject, object, relation, floor](const SampleRecord& sample) {
        std::vector<Point> centers;
        for (ConceptId id : ids) {
            const RelevanceGrid* grid = sample.find(id);
            if (!grid) return Label::negative;
            double mass = 0.0, sx = 0.0, sy = 0.0;
            for (std::uint32_t y = 0; y < grid->height; ++y)
                for (std::uint32_t x = 0; x < grid->width; ++x) {
                    const double w = std::abs(static_cast<double>(grid->at(x, y)));
                    mass += w;
                    sx += w * x;
                    sy += w * y;
                }
            if (mass < floor) return Label::negative;
            centers.push_back({sx / mass, sy / mass});
        }
        return rule_holds(relation, centers[subject], centers[object]) ? Label::positive : Label::negative;
    };
    return oracle;
}

SyntheticSet generate(const GeneratorConfig& cfg)
{
    cfg.validate();
    const std::size_t total = std::size_t{cfg.n_pos} + cfg.n_neg;
    const auto distractors = cfg.distractor_ids();
    const double margin = 3.0 * cfg.blob_sigma;
    // Hashing the seed first keeps nearby seeds from sharing per-sample streams.
    const std::uint64_t base = SplitMix64(cfg.seed).next();

    Dataset dataset;
    dataset.class_name = cfg.class_name;
    dataset.contrast_class_name = cfg.contrast_class_name;
    dataset.layer_id = cfg.layer_id;
    dataset.samples.resize(total);
    std::vector<int> failed(total, 0);

#pragma omp parallel for schedule(static)
    for (long li = 0; li < static_cast<long>(total); ++li) {
        const auto i = static_cast<std::size_t>(li);
        const bool positive = i < cfg.n_pos;
        SplitMix64 rng(base ^ static_cast<std::uint64_t>(i));

        const std::size_t k = cfg.planted.size();
        std::vector<Point> centers(k);
        bool ok = false;
        for (int attempt = 0; attempt < kMaxShuffles && !ok; ++attempt) {
            std::vector<std::size_t> slot(k);
            for (std::size_t j = 0; j < k; ++j) slot[j] = j;
            if (!positive)
                for (std::size_t j = k - 1; j > 0; --j)
                    std::swap(slot[j], slot[rng.below(static_cast<std::uint32_t>(j + 1))]);
            for (std::size_t j = 0; j < k; ++j) {
                const Point base = cfg.planted[slot[j]].position;
                centers[j] = {base.x + rng.uniform(-cfg.jitter, cfg.jitter), base.y + rng.uniform(-cfg.jitter, cfg.jitter)};
            }
            ok = rule_holds(cfg.rule.relation, centers[cfg.rule.subject], centers[cfg.rule.object]) == positive;
        }
        if (!ok) {
            failed[i] = 1;
            continue;
        }

        SampleRecord& s = dataset.samples[i];
        s.sample_id = sample_name(i, total);
        s.ground_truth = positive ? Label::positive : Label::negative;
        for (std::size_t j = 0; j < k; ++j) {
            const auto& p = cfg.planted[j];
            s.grids.push_back(
                gaussian_blob(p.concept_id, cfg.height, cfg.width, centers[j], p.amplitude, cfg.blob_sigma, cfg.layer_id));
        }
        for (std::size_t d = 0; d < distractors.size(); ++d) {
            const double lo_x = std::min(margin, (cfg.width - 1) / 2.0), hi_x = cfg.width - 1 - lo_x;
            const double lo_y = std::min(margin, (cfg.height - 1) / 2.0), hi_y = cfg.height - 1 - lo_y;
            const Point c{rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)};
            const double magnitude = std::max(0.1, cfg.distractor_amplitude - 0.1 * static_cast<double>(d));
            const double amplitude = rng.uniform() < 0.5 ? -magnitude : magnitude;
            s.grids.push_back(
                gaussian_blob(distractors[d], cfg.height, cfg.width, c, amplitude, cfg.blob_sigma, cfg.layer_id));
        }
        const bool flip = rng.uniform() < cfg.model_error_rate;
        s.model_truth = (positive != flip) ? Label::positive : Label::negative;
    }
    if (std::find(failed.begin(), failed.end(), 1) != failed.end())
        throw Error(ErrorCode::config, "could not place planted concepts so that the rule separates the classes");

    SyntheticSet out;
    out.dataset = canonical_order(std::move(dataset));
    out.rule = planted_rule(cfg);
    out.oracle = synthetic_oracle(cfg);
    out.labels = cfg.labels();
    return out;
}

void write_expected_rule(const GeneratorConfig& cfg, const std::filesystem::path& path)
{
    json planted = json::array();
    for (const auto& p : cfg.planted)
        planted.push_back({{"concept_id", p.concept_id},
                           {"x", p.position.x},
                           {"y", p.position.y},
                           {"amplitude", p.amplitude},
                           {"label", p.label}});
    json literals = json::array();
    for (const auto& lit : planted_rule(cfg).literals)
        literals.push_back({{"predicate", predicate_name(lit.predicate)},
                            {"subject", {{"concept_id", lit.subject.concept_id}, {"sign", to_string(lit.subject.sign)}}},
                            {"object", {{"concept_id", lit.object->concept_id}, {"sign", to_string(lit.object->sign)}}}});
    json labels = json::object();
    for (const auto& [id, name] : cfg.labels()) labels[std::to_string(id)] = name;

    Clause clause;
    clause.body = planted_rule(cfg).literals;
    json doc{{"literals", literals},
             {"text", render_clause(clause)},
             {"labels", labels},
             {"generator",
              {{"seed", cfg.seed},
               {"n_pos", cfg.n_pos},
               {"n_neg", cfg.n_neg},
               {"height", cfg.height},
               {"width", cfg.width},
               {"planted", planted},
               {"rule",
                {{"relation", predicate_name(cfg.rule.relation)}, {"subject", cfg.rule.subject}, {"object", cfg.rule.object}}},
               {"distractor_concepts", cfg.distractor_concepts},
               {"distractor_amplitude", cfg.distractor_amplitude},
               {"blob_sigma", cfg.blob_sigma},
               {"jitter", cfg.jitter},
               {"model_error_rate", cfg.model_error_rate},
               {"class_name", cfg.class_name},
               {"contrast_class_name", cfg.contrast_class_name},
               {"layer_id", cfg.layer_id}}}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    out << doc.dump(2) << "\n";
}

GeneratorConfig read_generator_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    GeneratorConfig cfg;
    try {
        const json doc = json::parse(in);
        const json& g = doc.at("generator");
        cfg.seed = g.at("seed").get<std::uint64_t>();
        cfg.n_pos = g.at("n_pos").get<std::uint32_t>();
        cfg.n_neg = g.at("n_neg").get<std::uint32_t>();
        cfg.height = g.at("height").get<std::uint32_t>();
        cfg.width = g.at("width").get<std::uint32_t>();
        cfg.planted.clear();
        for (const auto& p : g.at("planted"))
            cfg.planted.push_back({p.at("concept_id").get<ConceptId>(),
                                   {p.at("x").get<double>(), p.at("y").get<double>()},
                                   p.at("amplitude").get<double>(),
                                   p.at("label").get<std::string>()});
        const auto relation = relation_from_name(g.at("rule").at("relation").get<std::string>(), 3);
        if (!relation) throw Error(ErrorCode::format, "unknown planted relation in '" + path.string() + "'");
        cfg.rule = {*relation, g.at("rule").at("subject").get<std::size_t>(), g.at("rule").at("object").get<std::size_t>()};
        cfg.distractor_concepts = g.at("distractor_concepts").get<std::uint32_t>();
        cfg.distractor_amplitude = g.at("distractor_amplitude").get<double>();
        cfg.blob_sigma = g.at("blob_sigma").get<double>();
        cfg.jitter = g.at("jitter").get<double>();
        cfg.model_error_rate = g.at("model_error_rate").get<double>();
        cfg.class_name = g.at("class_name").get<std::string>();
        cfg.contrast_class_name = g.at("contrast_class_name").get<std::string>();
        cfg.layer_id = g.at("layer_id").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, "'" + path.string() + "': " + e.what());
    }
    cfg.validate();
    return cfg;
}

}  // namespace corex
