#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corex/core.hpp"

namespace corex {

/// Closed predicate vocabulary. `present` is the unary existence fact, written
/// as contains/2 in background knowledge; `contains` is the DE-9IM relation,
/// written as contains/3.
enum class Relation : std::uint8_t {
    present,
    above_of,
    below_of,
    left_of,
    right_of,
    center,
    middle_right,
    bottom_right,
    bottom_middle,
    bottom_left,
    middle_left,
    top_left,
    top_middle,
    top_right,
    disjoint,
    equals,
    touches,
    overlaps,
    covers,
    contains,
    covered_by,
    within,
    close_to,
    amid_x,
    amid_y,
};

inline constexpr std::size_t kRelationCount = 25;

std::string_view predicate_name(Relation r);
int arity(Relation r);  // 2 for present, 3 otherwise (sample argument included)
/// Lookup by predicate name and arity; nullopt when the pair is unknown.
std::optional<Relation> relation_from_name(std::string_view name, int arity);
/// Lookup for constraint strings: "name" or "name/arity". A bare "contains"
/// selects both arities.
std::vector<Relation> relations_matching(std::string_view spec);
std::string relation_key(Relation r);  // "name/arity"

enum class RelationSet : std::uint8_t { simple_alignment, compass_alignment, nine_intersection, distance, surrounding };

std::string_view to_string(RelationSet s);
RelationSet parse_relation_set(std::string_view text);
RelationSet set_of(Relation r);  // `present` reports simple_alignment; it is always emitted

struct RelationConfig {
    double close_range = 9.05;    // pixels
    double center_buffer = 4.53;  // pixels
    std::set<RelationSet> enabled_sets{RelationSet::simple_alignment, RelationSet::compass_alignment,
                                       RelationSet::nine_intersection, RelationSet::distance,
                                       RelationSet::surrounding};

    void validate() const;
    bool enabled(RelationSet s) const { return enabled_sets.contains(s); }

    /// Ranges as fractions of the image diagonal.
    static RelationConfig for_grid(std::uint32_t height, std::uint32_t width, double close_range_frac = 0.10,
                                   double center_buffer_frac = 0.05);
};

struct RelationFact {
    Relation name = Relation::present;
    SignedConcept subject;
    std::optional<SignedConcept> object;

    auto operator<=>(const RelationFact&) const = default;
};

using RelationSetResult = std::vector<Relation>;  // ascending enum order

RelationSetResult simple_alignment(const ConceptRegion& a, const ConceptRegion& b);
/// Relations saying where b lies as seen from a's centroid.
RelationSetResult compass_alignment(const ConceptRegion& a, const ConceptRegion& b, const RelationConfig& cfg);
RelationSetResult de9im(const ConceptRegion& a, const ConceptRegion& b);
bool close_to(const ConceptRegion& a, const ConceptRegion& b, const RelationConfig& cfg);
/// Whether b sits strictly between the two instances a1, a2 of one concept.
RelationSetResult surrounding(const ConceptRegion& a1, const ConceptRegion& a2, const ConceptRegion& b);

/// Compass sector (middle_right ... top_right) of the offset (dx, dy), y down.
Relation compass_sector(double dx, double dy);

/// Interior pixels: mask pixels whose four neighbours are all inside the mask
/// and the grid. Everything else in the mask is boundary.
Mask interior(const Mask& mask);

std::set<RelationFact> find_relations(const std::vector<ConceptRegion>& regions, const RelationConfig& cfg);

}  // namespace corex
