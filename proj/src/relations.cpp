#include "corex/relations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace corex {

namespace {

struct RelationInfo {
    Relation relation;
    std::string_view name;
    int arity;
    RelationSet set;
};

constexpr std::array<RelationInfo, kRelationCount> kRelations{{
    {Relation::present, "contains", 2, RelationSet::simple_alignment},
    {Relation::above_of, "above_of", 3, RelationSet::simple_alignment},
    {Relation::below_of, "below_of", 3, RelationSet::simple_alignment},
    {Relation::left_of, "left_of", 3, RelationSet::simple_alignment},
    {Relation::right_of, "right_of", 3, RelationSet::simple_alignment},
    {Relation::center, "center", 3, RelationSet::compass_alignment},
    {Relation::middle_right, "middle_right", 3, RelationSet::compass_alignment},
    {Relation::bottom_right, "bottom_right", 3, RelationSet::compass_alignment},
    {Relation::bottom_middle, "bottom_middle", 3, RelationSet::compass_alignment},
    {Relation::bottom_left, "bottom_left", 3, RelationSet::compass_alignment},
    {Relation::middle_left, "middle_left", 3, RelationSet::compass_alignment},
    {Relation::top_left, "top_left", 3, RelationSet::compass_alignment},
    {Relation::top_middle, "top_middle", 3, RelationSet::compass_alignment},
    {Relation::top_right, "top_right", 3, RelationSet::compass_alignment},
    {Relation::disjoint, "disjoint", 3, RelationSet::nine_intersection},
    {Relation::equals, "equals", 3, RelationSet::nine_intersection},
    {Relation::touches, "touches", 3, RelationSet::nine_intersection},
    {Relation::overlaps, "overlaps", 3, RelationSet::nine_intersection},
    {Relation::covers, "covers", 3, RelationSet::nine_intersection},
    {Relation::contains, "contains", 3, RelationSet::nine_intersection},
    {Relation::covered_by, "covered_by", 3, RelationSet::nine_intersection},
    {Relation::within, "within", 3, RelationSet::nine_intersection},
    {Relation::close_to, "close_to", 3, RelationSet::distance},
    {Relation::amid_x, "amid_x", 3, RelationSet::surrounding},
    {Relation::amid_y, "amid_y", 3, RelationSet::surrounding},
}};

const RelationInfo& info(Relation r)
{
    return kRelations[static_cast<std::size_t>(r)];
}

constexpr std::array<Relation, 8> kSectors{Relation::middle_right, Relation::bottom_right, Relation::bottom_middle,
                                           Relation::bottom_left,  Relation::middle_left,  Relation::top_left,
                                           Relation::top_middle,   Relation::top_right};

/// Per-region data shared by every pair the region takes part in.
struct Shape {
    const ConceptRegion* region;
    BoundingBox box;
    Mask inner;
    std::size_t area = 0;
    std::size_t inner_area = 0;
    std::vector<Vertex> pixels;
    std::vector<Vertex> rim;  // boundary pixels

    explicit Shape(const ConceptRegion& r) : region(&r), box(r.mask.bounds()), inner(interior(r.mask))
    {
        for (std::uint32_t y = box.y0; y < box.y1; ++y)
            for (std::uint32_t x = box.x0; x < box.x1; ++x) {
                if (!r.mask.test(x, y)) continue;
                pixels.push_back({static_cast<int>(x), static_cast<int>(y)});
                if (inner.test(x, y)) ++inner_area;
                else rim.push_back({static_cast<int>(x), static_cast<int>(y)});
            }
        area = pixels.size();
    }
};

void check_dims(const ConceptRegion& a, const ConceptRegion& b)
{
    if (a.mask.height() != b.mask.height() || a.mask.width() != b.mask.width())
        throw Error(ErrorCode::dimension_mismatch, "regions come from grids of different shape");
}

RelationSetResult simple_alignment_impl(const Point& a, const Point& b)
{
    RelationSetResult out;
    if (a.y < b.y) out.push_back(Relation::above_of);
    if (a.y > b.y) out.push_back(Relation::below_of);
    if (a.x < b.x) out.push_back(Relation::left_of);
    if (a.x > b.x) out.push_back(Relation::right_of);
    return out;
}

RelationSetResult compass_impl(const Shape& a, const Shape& b, const RelationConfig& cfg)
{
    const Point c = a.region->centroid;
    const double r2 = cfg.center_buffer * cfg.center_buffer;
    for (const auto& p : b.pixels) {
        const double dx = p.x - c.x, dy = p.y - c.y;
        if (dx * dx + dy * dy <= r2) return {Relation::center};
    }
    std::array<bool, kRelationCount> hit{};
    for (const auto& p : b.pixels) hit[static_cast<std::size_t>(compass_sector(p.x - c.x, p.y - c.y))] = true;
    RelationSetResult out;
    for (std::size_t i = 0; i < hit.size(); ++i)
        if (hit[i]) out.push_back(static_cast<Relation>(i));
    return out;
}

RelationSetResult de9im_impl(const Shape& a, const Shape& b)
{
    const Mask& ma = a.region->mask;
    const Mask& mb = b.region->mask;
    const std::uint32_t x0 = std::max(a.box.x0, b.box.x0), x1 = std::min(a.box.x1, b.box.x1);
    const std::uint32_t y0 = std::max(a.box.y0, b.box.y0), y1 = std::min(a.box.y1, b.box.y1);

    std::size_t shared = 0, b_in_inner_a = 0, a_in_inner_b = 0;
    bool inner_meets_inner = false, shared_touches_inner = false;
    for (std::uint32_t y = y0; y < y1; ++y)
        for (std::uint32_t x = x0; x < x1; ++x) {
            if (!ma.test(x, y) || !mb.test(x, y)) continue;
            ++shared;
            const bool ia = a.inner.test(x, y), ib = b.inner.test(x, y);
            b_in_inner_a += ia;
            a_in_inner_b += ib;
            inner_meets_inner |= ia && ib;
            shared_touches_inner |= ia || ib;
        }
    if (shared == 0) return {Relation::disjoint};

    const bool b_sub_a = shared == b.area;
    const bool a_sub_b = shared == a.area;
    RelationSetResult out;
    if (a_sub_b && b_sub_a) out.push_back(Relation::equals);
    if (!shared_touches_inner) out.push_back(Relation::touches);
    if (inner_meets_inner && !a_sub_b && !b_sub_a) out.push_back(Relation::overlaps);
    if (b_sub_a) out.push_back(Relation::covers);
    if (b_in_inner_a == b.area) out.push_back(Relation::contains);
    if (a_sub_b) out.push_back(Relation::covered_by);
    if (a_in_inner_b == a.area) out.push_back(Relation::within);
    return out;
}

bool close_impl(const Shape& a, const Shape& b, const RelationConfig& cfg)
{
    const double r2 = cfg.close_range * cfg.close_range;
    // Gap between bounding boxes bounds the pixel distance from below.
    auto gap = [](std::uint32_t lo0, std::uint32_t hi0, std::uint32_t lo1, std::uint32_t hi1) -> double {
        if (hi0 <= lo1) return static_cast<double>(lo1) - (hi0 - 1);
        if (hi1 <= lo0) return static_cast<double>(lo0) - (hi1 - 1);
        return 0.0;
    };
    const double gx = gap(a.box.x0, a.box.x1, b.box.x0, b.box.x1);
    const double gy = gap(a.box.y0, a.box.y1, b.box.y0, b.box.y1);
    if (gx * gx + gy * gy >= r2) return false;

    // A closest pair always lies on the two rims unless the masks overlap.
    for (const auto& p : a.pixels)
        if (b.region->mask.test(static_cast<std::uint32_t>(p.x), static_cast<std::uint32_t>(p.y))) return true;
    for (const auto& p : a.rim)
        for (const auto& q : b.rim) {
            const double dx = p.x - q.x, dy = p.y - q.y;
            if (dx * dx + dy * dy < r2) return true;
        }
    return false;
}

RelationSetResult surrounding_impl(const Point& a1, const Point& a2, const Point& b)
{
    RelationSetResult out;
    if (std::min(a1.x, a2.x) < b.x && b.x < std::max(a1.x, a2.x)) out.push_back(Relation::amid_x);
    if (std::min(a1.y, a2.y) < b.y && b.y < std::max(a1.y, a2.y)) out.push_back(Relation::amid_y);
    return out;
}

}  // namespace

std::string_view predicate_name(Relation r) { return info(r).name; }
int arity(Relation r) { return info(r).arity; }
RelationSet set_of(Relation r) { return info(r).set; }

std::string relation_key(Relation r)
{
    return std::string(info(r).name) + "/" + std::to_string(info(r).arity);
}

std::optional<Relation> relation_from_name(std::string_view name, int ar)
{
    for (const auto& i : kRelations)
        if (i.name == name && i.arity == ar) return i.relation;
    return std::nullopt;
}

std::vector<Relation> relations_matching(std::string_view spec)
{
    std::vector<Relation> out;
    const auto slash = spec.find('/');
    const std::string_view name = spec.substr(0, slash);
    int ar = 0;
    if (slash != std::string_view::npos) {
        const auto digits = spec.substr(slash + 1);
        if (digits == "2") ar = 2;
        else if (digits == "3") ar = 3;
        else throw Error(ErrorCode::config, "bad relation arity in '" + std::string(spec) + "'");
    }
    for (const auto& i : kRelations)
        if (i.name == name && (ar == 0 || i.arity == ar)) out.push_back(i.relation);
    if (out.empty()) throw Error(ErrorCode::config, "unknown relation '" + std::string(spec) + "'");
    return out;
}

std::string_view to_string(RelationSet s)
{
    switch (s) {
    case RelationSet::simple_alignment: return "SimpleAlignment";
    case RelationSet::compass_alignment: return "CompassAlignment";
    case RelationSet::nine_intersection: return "NineIntersectionModel";
    case RelationSet::distance: return "Distance";
    case RelationSet::surrounding: return "Surrounding";
    }
    return "";
}

RelationSet parse_relation_set(std::string_view text)
{
    for (auto s : {RelationSet::simple_alignment, RelationSet::compass_alignment, RelationSet::nine_intersection,
                   RelationSet::distance, RelationSet::surrounding})
        if (to_string(s) == text) return s;
    throw Error(ErrorCode::config, "unknown relation set '" + std::string(text) + "'");
}

void RelationConfig::validate() const
{
    if (!(close_range > 0.0)) throw Error(ErrorCode::config, "close_range must be positive");
    if (!(center_buffer > 0.0)) throw Error(ErrorCode::config, "center_buffer must be positive");
}

RelationConfig RelationConfig::for_grid(std::uint32_t height, std::uint32_t width, double close_range_frac,
                                        double center_buffer_frac)
{
    const double diagonal = std::hypot(static_cast<double>(height), static_cast<double>(width));
    RelationConfig cfg;
    cfg.close_range = close_range_frac * diagonal;
    cfg.center_buffer = center_buffer_frac * diagonal;
    return cfg;
}

Relation compass_sector(double dx, double dy)
{
    constexpr double eighth = std::numbers::pi / 8.0;
    const double theta = std::atan2(dy, dx);  // (-pi, pi], 0 = +x, pi/2 = down
    auto k = static_cast<long>(std::floor((theta + eighth) / (2.0 * eighth)));
    k = ((k % 8) + 8) % 8;
    return kSectors[static_cast<std::size_t>(k)];
}

Mask interior(const Mask& mask)
{
    Mask inner(mask.height(), mask.width());
    for (std::uint32_t y = 0; y < mask.height(); ++y)
        for (std::uint32_t x = 0; x < mask.width(); ++x) {
            if (!mask.test(x, y)) continue;
            const long lx = x, ly = y;
            if (mask.test_signed(lx - 1, ly) && mask.test_signed(lx + 1, ly) && mask.test_signed(lx, ly - 1) &&
                mask.test_signed(lx, ly + 1))
                inner.set(x, y);
        }
    return inner;
}

RelationSetResult simple_alignment(const ConceptRegion& a, const ConceptRegion& b)
{
    return simple_alignment_impl(a.centroid, b.centroid);
}

RelationSetResult compass_alignment(const ConceptRegion& a, const ConceptRegion& b, const RelationConfig& cfg)
{
    return compass_impl(Shape(a), Shape(b), cfg);
}

RelationSetResult de9im(const ConceptRegion& a, const ConceptRegion& b)
{
    check_dims(a, b);
    return de9im_impl(Shape(a), Shape(b));
}

bool close_to(const ConceptRegion& a, const ConceptRegion& b, const RelationConfig& cfg)
{
    check_dims(a, b);
    return close_impl(Shape(a), Shape(b), cfg);
}

RelationSetResult surrounding(const ConceptRegion& a1, const ConceptRegion& a2, const ConceptRegion& b)
{
    if (a1.concept_id != a2.concept_id)
        throw Error(ErrorCode::instance_mismatch, "surrounding needs two instances of one concept, got c" +
                                                      std::to_string(a1.concept_id) + " and c" +
                                                      std::to_string(a2.concept_id));
    return surrounding_impl(a1.centroid, a2.centroid, b.centroid);
}

std::set<RelationFact> find_relations(const std::vector<ConceptRegion>& regions, const RelationConfig& cfg)
{
    std::set<RelationFact> facts;
    std::vector<Shape> shapes;
    shapes.reserve(regions.size());
    for (const auto& r : regions) {
        facts.insert({Relation::present, r.signed_concept(), std::nullopt});
        shapes.emplace_back(r);
    }

    auto emit = [&](const RelationSetResult& rs, const ConceptRegion& a, const ConceptRegion& b) {
        for (Relation r : rs) facts.insert({r, a.signed_concept(), b.signed_concept()});
    };

    for (std::size_t i = 0; i < regions.size(); ++i) {
        for (std::size_t j = 0; j < regions.size(); ++j) {
            const auto& a = regions[i];
            const auto& b = regions[j];
            if (a.concept_id == b.concept_id) continue;
            check_dims(a, b);
            if (cfg.enabled(RelationSet::simple_alignment)) emit(simple_alignment_impl(a.centroid, b.centroid), a, b);
            if (cfg.enabled(RelationSet::compass_alignment)) emit(compass_impl(shapes[i], shapes[j], cfg), a, b);
            if (cfg.enabled(RelationSet::nine_intersection)) emit(de9im_impl(shapes[i], shapes[j]), a, b);
            if (cfg.enabled(RelationSet::distance) && close_impl(shapes[i], shapes[j], cfg))
                emit({Relation::close_to}, a, b);
        }
    }

    if (cfg.enabled(RelationSet::surrounding)) {
        std::map<ConceptId, std::vector<std::size_t>> instances;
        for (std::size_t i = 0; i < regions.size(); ++i) instances[regions[i].concept_id].push_back(i);
        for (const auto& [concept_id, idx] : instances) {
            if (idx.size() != 2) continue;
            const auto& a1 = regions[idx[0]];
            const auto& a2 = regions[idx[1]];
            for (const auto& b : regions)
                if (b.concept_id != concept_id)
                    emit(surrounding_impl(a1.centroid, a2.centroid, b.centroid), a1, b);
        }
    }
    return facts;
}

}  // namespace corex
