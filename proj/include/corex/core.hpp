#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corex/error.hpp"

namespace corex {

using ConceptId = std::uint32_t;

enum class Label : std::uint8_t { positive, negative, unknown };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

enum class Sign : std::int8_t { neg = -1, null = 0, pos = 1 };

std::string_view to_string(Sign sign);
Sign parse_sign(std::string_view text);

/// One concept's relevance map for one sample, row-major, pixel (x, y) at
/// index y * width + x.
struct RelevanceGrid {
    ConceptId concept_id = 0;
    std::string layer_id;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::vector<float> values;

    float at(std::uint32_t x, std::uint32_t y) const { return values[std::size_t{y} * width + x]; }

    bool operator==(const RelevanceGrid&) const = default;
};

struct SampleRecord {
    std::string sample_id;
    Label ground_truth = Label::unknown;
    Label model_truth = Label::negative;
    std::vector<RelevanceGrid> grids;

    const RelevanceGrid* find(ConceptId concept_id) const;

    bool operator==(const SampleRecord&) const = default;
};

struct Dataset {
    std::vector<SampleRecord> samples;
    std::string class_name;
    std::string contrast_class_name;
    std::string layer_id;

    const SampleRecord* find(std::string_view sample_id) const;

    bool operator==(const Dataset&) const = default;
};

struct ConceptScore {
    ConceptId concept_id = 0;
    double total_relevance = 0.0;
    Sign sign = Sign::null;

    bool operator==(const ConceptScore&) const = default;
};

struct SignedConcept {
    ConceptId concept_id = 0;
    Sign sign = Sign::pos;

    auto operator<=>(const SignedConcept&) const = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

/// Integer lattice point. Pixel (x, y) occupies the unit cell with corners
/// (x, y) and (x + 1, y + 1).
struct Vertex {
    int x = 0;
    int y = 0;

    auto operator<=>(const Vertex&) const = default;
};

struct BoundingBox {
    std::uint32_t x0 = 0, y0 = 0;  // inclusive
    std::uint32_t x1 = 0, y1 = 0;  // exclusive

    bool empty() const { return x1 <= x0 || y1 <= y0; }
    bool operator==(const BoundingBox&) const = default;
};

/// Binary pixel mask over an H x W grid.
class Mask {
public:
    Mask() = default;
    Mask(std::uint32_t height, std::uint32_t width);

    std::uint32_t height() const { return height_; }
    std::uint32_t width() const { return width_; }

    bool test(std::uint32_t x, std::uint32_t y) const { return bits_[index(x, y)] != 0; }
    bool test_signed(long x, long y) const;  // false outside the grid
    void set(std::uint32_t x, std::uint32_t y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }

    std::size_t index(std::uint32_t x, std::uint32_t y) const { return std::size_t{y} * width_ + x; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    BoundingBox bounds() const;

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    bool operator==(const Mask&) const = default;

private:
    std::uint32_t height_ = 0;
    std::uint32_t width_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct ConceptRegion {
    ConceptId concept_id = 0;
    Sign sign = Sign::pos;
    Mask mask;
    std::vector<Vertex> boundary;
    Point centroid;

    SignedConcept signed_concept() const { return {concept_id, sign}; }

    bool operator==(const ConceptRegion&) const = default;
};

/// Sorts samples by id and grids by concept id. Throws duplicate_id on a
/// repeated sample id or a repeated concept within one sample.
Dataset canonical_order(Dataset dataset);

/// Lowercases and maps anything outside [a-z0-9_] to '_'; prefixes "s_" when
/// the result would not start with a lowercase letter.
std::string normalize_sample_id(std::string_view raw);
bool is_valid_identifier(std::string_view id);

/// Checks the per-grid and per-sample invariants, throwing format on failure.
void validate(const SampleRecord& sample);

/// Bitwise comparison of all relevance payloads (distinguishes -0.0 from 0.0).
bool bit_identical(const Dataset& a, const Dataset& b);

}  // namespace corex
