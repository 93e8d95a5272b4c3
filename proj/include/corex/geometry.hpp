#pragma once

#include <vector>

#include "corex/core.hpp"

namespace corex {

struct LocalizeConfig {
    double pixel_threshold = 0.3;  // fraction of the grid's max signed relevance
    std::uint32_t min_component_px = 4;
    std::uint32_t max_instances = 2;

    void validate() const;
};

/// 8-connected components of `mask`, each as its own mask, in discovery
/// (row-major first pixel) order.
std::vector<Mask> connected_components(const Mask& mask);

/// Signed regions of one concept: pixels where sign * value reaches
/// pixel_threshold of the signed maximum, split into 8-connected components,
/// largest first.
std::vector<ConceptRegion> localize(const RelevanceGrid& grid, Sign sign, const LocalizeConfig& cfg);

Point centroid(const Mask& mask);
inline Point centroid(const ConceptRegion& region) { return centroid(region.mask); }

/// Outer contour of one 8-connected component on the pixel-corner lattice,
/// holes filled. Starts at the top-left corner of the first row-major pixel
/// and runs with positive shoelace area (x right, y down). Diagonal pinch
/// points appear twice.
std::vector<Vertex> trace_boundary(const Mask& mask);

/// Signed shoelace area.
double polygon_area(const std::vector<Vertex>& polygon);

/// `mask` with every background pixel not 4-reachable from outside set.
Mask fill_holes(const Mask& mask);

}  // namespace corex
