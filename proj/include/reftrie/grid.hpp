#pragma once

#include <cstdint>

#include "reftrie/core.hpp"

namespace reftrie {

// Square region split into a level x level grid of cells with side
// cell_size. level is always a power of two so cell ids interleave cleanly.
struct GridConfig {
    Point origin;               // lower-left corner of the region
    double side_u = 0.0;        // side length of the square region
    std::uint32_t level = 1;    // cells per axis, 2^bits_per_axis
    std::uint32_t bits_per_axis = 0;
    double cell_size = 0.0;     // side_u / level
    double slack = 0.0;         // half cell diagonal: sqrt(2) * cell_size / 2

    std::uint64_t cell_count() const {
        return static_cast<std::uint64_t>(level) * level;
    }
};

inline constexpr double kDefaultPaddingFraction = 0.001;

// Derives the grid from a data bounding box and a requested cell size.
// The region side is the larger bbox extent plus padding on each side; the
// per-axis cell count is rounded up to a power of two, which shrinks the
// effective cell size to at most requested_delta.
inline GridConfig build_grid(BBox bbox, double requested_delta,
                             double padding_fraction = kDefaultPaddingFraction) {
    if (!(requested_delta > 0.0))
        throw ConfigError("grid: requested delta must be positive");
    if (bbox.empty()) throw ConfigError("grid: empty bounding box");

    // Degenerate axes (all points equal or collinear) get the requested
    // delta as extent so the region stays two-dimensional.
    if (bbox.width() <= 0.0) {
        bbox.min_x -= requested_delta / 2.0;
        bbox.max_x += requested_delta / 2.0;
    }
    if (bbox.height() <= 0.0) {
        bbox.min_y -= requested_delta / 2.0;
        bbox.max_y += requested_delta / 2.0;
    }

    const double raw = std::max(bbox.width(), bbox.height());
    const double pad = raw * padding_fraction;

    GridConfig grid;
    grid.origin = Point{bbox.min_x - pad, bbox.min_y - pad};
    grid.side_u = raw + 2.0 * pad;

    grid.level = 1;
    grid.bits_per_axis = 0;
    while (grid.side_u / grid.level > requested_delta) {
        if (grid.level >= (1u << 30))
            throw ConfigError("grid: requested delta too small for region");
        grid.level <<= 1;
        ++grid.bits_per_axis;
    }
    grid.cell_size = grid.side_u / grid.level;
    grid.slack = std::sqrt(2.0) * grid.cell_size / 2.0;
    return grid;
}

}  // namespace reftrie
