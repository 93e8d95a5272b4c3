#include "corex/geometry.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <utility>

namespace corex {

void LocalizeConfig::validate() const
{
    if (!(pixel_threshold > 0.0 && pixel_threshold <= 1.0))
        throw Error(ErrorCode::config, "pixel_threshold must lie in (0, 1]");
    if (min_component_px < 1) throw Error(ErrorCode::config, "min_component_px must be at least 1");
    if (max_instances < 1) throw Error(ErrorCode::config, "max_instances must be at least 1");
}

std::vector<Mask> connected_components(const Mask& mask)
{
    const std::uint32_t h = mask.height();
    const std::uint32_t w = mask.width();
    std::vector<std::uint8_t> seen(mask.bits().size(), 0);
    std::vector<Mask> components;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack;

    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            if (!mask.test(x, y) || seen[mask.index(x, y)]) continue;
            Mask component(h, w);
            stack.assign(1, {x, y});
            seen[mask.index(x, y)] = 1;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                component.set(cx, cy);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const long nx = static_cast<long>(cx) + dx;
                        const long ny = static_cast<long>(cy) + dy;
                        if (!mask.test_signed(nx, ny)) continue;
                        const auto ux = static_cast<std::uint32_t>(nx);
                        const auto uy = static_cast<std::uint32_t>(ny);
                        if (seen[mask.index(ux, uy)]) continue;
                        seen[mask.index(ux, uy)] = 1;
                        stack.emplace_back(ux, uy);
                    }
            }
            components.push_back(std::move(component));
        }
    }
    return components;
}

Point centroid(const Mask& mask)
{
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::uint32_t y = 0; y < mask.height(); ++y)
        for (std::uint32_t x = 0; x < mask.width(); ++x)
            if (mask.test(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) throw Error(ErrorCode::invalid_input, "centroid of an empty mask");
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

Mask fill_holes(const Mask& mask)
{
    const long h = mask.height();
    const long w = mask.width();
    // Flood the background 4-connected from a one-pixel frame around the grid.
    const long ph = h + 2, pw = w + 2;
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(ph * pw), 0);
    std::vector<std::pair<long, long>> stack{{0, 0}};
    outside[0] = 1;
    constexpr std::array<std::pair<int, int>, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        for (auto [dx, dy] : steps) {
            const long nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= pw || ny >= ph) continue;
            auto& cell = outside[static_cast<std::size_t>(ny * pw + nx)];
            if (cell || mask.test_signed(nx - 1, ny - 1)) continue;
            cell = 1;
            stack.emplace_back(nx, ny);
        }
    }
    Mask filled(mask.height(), mask.width());
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x)
            if (!outside[static_cast<std::size_t>((y + 1) * pw + (x + 1))])
                filled.set(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
    return filled;
}

std::vector<Vertex> trace_boundary(const Mask& mask)
{
    const auto components = connected_components(mask);
    if (components.empty()) throw Error(ErrorCode::invalid_input, "trace_boundary on an empty mask");
    if (components.size() > 1)
        throw Error(ErrorCode::disconnected,
                    "mask has " + std::to_string(components.size()) + " 8-connected components");

    const Mask filled = fill_holes(mask);
    const auto in = [&](long x, long y) { return filled.test_signed(x, y); };

    // Directed unit edges keep the region on the walker's right (screen
    // orientation); a pinch vertex has two outgoing edges.
    std::map<Vertex, std::vector<Vertex>> outgoing;  // start -> directions
    std::size_t edge_count = 0;
    std::optional<Vertex> start;
    for (long y = 0; y < static_cast<long>(filled.height()); ++y)
        for (long x = 0; x < static_cast<long>(filled.width()); ++x) {
            if (!in(x, y)) continue;
            const int ix = static_cast<int>(x), iy = static_cast<int>(y);
            if (!start) start = Vertex{ix, iy};
            if (!in(x, y - 1)) outgoing[{ix, iy}].push_back({1, 0}), ++edge_count;
            if (!in(x + 1, y)) outgoing[{ix + 1, iy}].push_back({0, 1}), ++edge_count;
            if (!in(x, y + 1)) outgoing[{ix + 1, iy + 1}].push_back({-1, 0}), ++edge_count;
            if (!in(x - 1, y)) outgoing[{ix, iy + 1}].push_back({0, -1}), ++edge_count;
        }

    std::vector<Vertex> polygon;
    Vertex at = *start;
    Vertex heading{0, -1};  // arrive at the start corner travelling up the left edge
    std::size_t used = 0;
    while (true) {
        auto& options = outgoing[at];
        if (options.empty()) break;
        // Prefer the screen-left turn, then straight, then right: this keeps
        // diagonally adjacent pixels inside one outline.
        const Vertex left{heading.y, -heading.x};
        const Vertex right{-heading.y, heading.x};
        auto pick = options.end();
        for (const Vertex& want : {left, heading, right}) {
            pick = std::find(options.begin(), options.end(), want);
            if (pick != options.end()) break;
        }
        if (pick == options.end()) pick = options.begin();
        const Vertex dir = *pick;
        options.erase(pick);
        if (dir != heading) polygon.push_back(at);
        heading = dir;
        at = {at.x + dir.x, at.y + dir.y};
        ++used;
    }
    if (used != edge_count)
        throw Error(ErrorCode::disconnected, "outer contour does not close over a single component");
    return polygon;
}

double polygon_area(const std::vector<Vertex>& polygon)
{
    long twice = 0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % polygon.size()];
        twice += static_cast<long>(a.x) * b.y - static_cast<long>(b.x) * a.y;
    }
    return static_cast<double>(twice) / 2.0;
}

std::vector<ConceptRegion> localize(const RelevanceGrid& grid, Sign sign, const LocalizeConfig& cfg)
{
    if (sign == Sign::null) throw Error(ErrorCode::invalid_input, "localize needs a pos or neg sign");
    const double s = sign == Sign::pos ? 1.0 : -1.0;
    double peak = 0.0;
    for (float v : grid.values) peak = std::max(peak, s * v);
    if (peak <= 0.0) return {};

    const double cut = cfg.pixel_threshold * peak;
    Mask mask(grid.height, grid.width);
    for (std::uint32_t y = 0; y < grid.height; ++y)
        for (std::uint32_t x = 0; x < grid.width; ++x) {
            const double v = s * grid.at(x, y);
            if (v >= cut && v > 0.0) mask.set(x, y);
        }

    auto components = connected_components(mask);
    std::erase_if(components, [&](const Mask& m) { return m.count() < cfg.min_component_px; });
    // Discovery order is by first row-major pixel, so a stable sort on size
    // realizes the (size desc, top-left index asc) order.
    std::vector<std::pair<std::size_t, Mask>> sized;
    sized.reserve(components.size());
    for (auto& m : components) sized.emplace_back(m.count(), std::move(m));
    std::stable_sort(sized.begin(), sized.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (sized.size() > cfg.max_instances) sized.resize(cfg.max_instances);

    std::vector<ConceptRegion> regions;
    regions.reserve(sized.size());
    for (auto& [size, m] : sized) {
        ConceptRegion r;
        r.concept_id = grid.concept_id;
        r.sign = sign;
        r.boundary = trace_boundary(m);
        r.centroid = centroid(m);
        r.mask = std::move(m);
        regions.push_back(std::move(r));
    }
    return regions;
}

}  // namespace corex
