#include "corex/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

namespace corex {

namespace {

std::string compose(const std::string& message, const std::string& stage)
{
    return stage.empty() ? message : stage + ": " + message;
}

}  // namespace

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::duplicate_id: return "DuplicateId";
    case ErrorCode::io: return "IoError";
    case ErrorCode::format: return "FormatError";
    case ErrorCode::unknown_concept: return "UnknownConcept";
    case ErrorCode::inconsistent_theory: return "InconsistentTheory";
    case ErrorCode::disconnected: return "Disconnected";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::instance_mismatch: return "InstanceMismatch";
    case ErrorCode::render: return "RenderError";
    case ErrorCode::parse: return "ParseError";
    case ErrorCode::unknown_sample: return "UnknownSample";
    case ErrorCode::empty_positives: return "EmptyPositives";
    case ErrorCode::invalid_input: return "InvalidInput";
    case ErrorCode::oracle: return "OracleError";
    case ErrorCode::invalid_clause: return "InvalidClause";
    case ErrorCode::config: return "ConfigError";
    }
    return "Error";
}

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(message, stage)), code_(code), stage_(std::move(stage)), detail_(message)
{
}

Error Error::with_stage(std::string stage) const
{
    return Error(code_, detail_, std::move(stage));
}

std::string_view to_string(Label label)
{
    switch (label) {
    case Label::positive: return "positive";
    case Label::negative: return "negative";
    case Label::unknown: return "unknown";
    }
    return "unknown";
}

Label parse_label(std::string_view text)
{
    if (text == "positive") return Label::positive;
    if (text == "negative") return Label::negative;
    if (text == "unknown") return Label::unknown;
    throw Error(ErrorCode::format, "invalid label '" + std::string(text) + "'");
}

std::string_view to_string(Sign sign)
{
    switch (sign) {
    case Sign::pos: return "pos";
    case Sign::neg: return "neg";
    case Sign::null: return "null";
    }
    return "null";
}

Sign parse_sign(std::string_view text)
{
    if (text == "pos") return Sign::pos;
    if (text == "neg") return Sign::neg;
    if (text == "null") return Sign::null;
    throw Error(ErrorCode::format, "invalid sign '" + std::string(text) + "'");
}

const RelevanceGrid* SampleRecord::find(ConceptId concept_id) const
{
    auto it = std::find_if(grids.begin(), grids.end(),
                           [&](const RelevanceGrid& g) { return g.concept_id == concept_id; });
    return it == grids.end() ? nullptr : &*it;
}

const SampleRecord* Dataset::find(std::string_view sample_id) const
{
    auto it = std::lower_bound(samples.begin(), samples.end(), sample_id,
                               [](const SampleRecord& s, std::string_view id) { return s.sample_id < id; });
    if (it != samples.end() && it->sample_id == sample_id) return &*it;
    // Not canonical yet; fall back to a scan.
    for (const auto& s : samples)
        if (s.sample_id == sample_id) return &s;
    return nullptr;
}

Mask::Mask(std::uint32_t height, std::uint32_t width)
    : height_(height), width_(width), bits_(std::size_t{height} * width, 0)
{
}

bool Mask::test_signed(long x, long y) const
{
    if (x < 0 || y < 0 || x >= static_cast<long>(width_) || y >= static_cast<long>(height_)) return false;
    return test(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
}

std::size_t Mask::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BoundingBox Mask::bounds() const
{
    BoundingBox box{width_, height_, 0, 0};
    for (std::uint32_t y = 0; y < height_; ++y)
        for (std::uint32_t x = 0; x < width_; ++x)
            if (test(x, y)) {
                box.x0 = std::min(box.x0, x);
                box.y0 = std::min(box.y0, y);
                box.x1 = std::max(box.x1, x + 1);
                box.y1 = std::max(box.y1, y + 1);
            }
    if (box.x1 == 0) return {};
    return box;
}

Dataset canonical_order(Dataset dataset)
{
    std::sort(dataset.samples.begin(), dataset.samples.end(),
              [](const SampleRecord& a, const SampleRecord& b) { return a.sample_id < b.sample_id; });
    for (std::size_t i = 1; i < dataset.samples.size(); ++i)
        if (dataset.samples[i].sample_id == dataset.samples[i - 1].sample_id)
            throw Error(ErrorCode::duplicate_id, "duplicate sample id '" + dataset.samples[i].sample_id + "'");

    for (auto& sample : dataset.samples) {
        std::sort(sample.grids.begin(), sample.grids.end(),
                  [](const RelevanceGrid& a, const RelevanceGrid& b) { return a.concept_id < b.concept_id; });
        for (std::size_t i = 1; i < sample.grids.size(); ++i)
            if (sample.grids[i].concept_id == sample.grids[i - 1].concept_id)
                throw Error(ErrorCode::duplicate_id, "duplicate concept c" + std::to_string(sample.grids[i].concept_id) +
                                                         " in sample '" + sample.sample_id + "'");
    }
    return dataset;
}

std::string normalize_sample_id(std::string_view raw)
{
    std::string out;
    out.reserve(raw.size() + 2);
    for (char ch : raw) {
        auto c = static_cast<unsigned char>(ch);
        if (c >= 'A' && c <= 'Z') out.push_back(static_cast<char>(c - 'A' + 'a'));
        else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') out.push_back(static_cast<char>(c));
        else out.push_back('_');
    }
    if (out.empty() || out[0] < 'a' || out[0] > 'z') out.insert(0, "s_");
    return out;
}

bool is_valid_identifier(std::string_view id)
{
    if (id.empty() || id[0] < 'a' || id[0] > 'z') return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

void validate(const SampleRecord& sample)
{
    std::set<ConceptId> seen;
    for (const auto& grid : sample.grids) {
        if (grid.height == 0 || grid.width == 0)
            throw Error(ErrorCode::format, "grid c" + std::to_string(grid.concept_id) + " of '" + sample.sample_id +
                                               "' has a zero dimension");
        if (grid.values.size() != std::size_t{grid.height} * grid.width)
            throw Error(ErrorCode::format, "grid c" + std::to_string(grid.concept_id) + " of '" + sample.sample_id +
                                               "' has " + std::to_string(grid.values.size()) + " values, expected " +
                                               std::to_string(std::size_t{grid.height} * grid.width));
        if (!std::all_of(grid.values.begin(), grid.values.end(), [](float v) { return std::isfinite(v); }))
            throw Error(ErrorCode::format, "grid c" + std::to_string(grid.concept_id) + " of '" + sample.sample_id +
                                               "' holds a non-finite value");
        const auto& first = sample.grids.front();
        if (grid.height != first.height || grid.width != first.width)
            throw Error(ErrorCode::format, "grids of '" + sample.sample_id + "' disagree in shape");
        if (!seen.insert(grid.concept_id).second)
            throw Error(ErrorCode::duplicate_id, "duplicate concept c" + std::to_string(grid.concept_id) +
                                                     " in sample '" + sample.sample_id + "'");
    }
}

bool bit_identical(const Dataset& a, const Dataset& b)
{
    if (a.class_name != b.class_name || a.contrast_class_name != b.contrast_class_name || a.layer_id != b.layer_id ||
        a.samples.size() != b.samples.size())
        return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const auto& sa = a.samples[i];
        const auto& sb = b.samples[i];
        if (sa.sample_id != sb.sample_id || sa.ground_truth != sb.ground_truth || sa.model_truth != sb.model_truth ||
            sa.grids.size() != sb.grids.size())
            return false;
        for (std::size_t g = 0; g < sa.grids.size(); ++g) {
            const auto& ga = sa.grids[g];
            const auto& gb = sb.grids[g];
            if (ga.concept_id != gb.concept_id || ga.layer_id != gb.layer_id || ga.height != gb.height ||
                ga.width != gb.width || ga.values.size() != gb.values.size())
                return false;
            if (!ga.values.empty() &&
                std::memcmp(ga.values.data(), gb.values.data(), ga.values.size() * sizeof(float)) != 0)
                return false;
        }
    }
    return true;
}

}  // namespace corex
