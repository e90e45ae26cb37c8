#pragma once

#include <algorithm>
#include <cstdint>

#include "reftrie/core.hpp"
#include "reftrie/grid.hpp"

namespace reftrie {

// Interleaved cell id: for bits_per_axis = p the value has 2p bits, pairs
// ordered most significant first, column bit before row bit in each pair.
using ZValue = std::uint64_t;

struct CellCoords {
    std::uint32_t col = 0;
    std::uint32_t row = 0;
};

inline ZValue interleave(std::uint32_t col, std::uint32_t row,
                         std::uint32_t bits_per_axis) {
    ZValue z = 0;
    for (std::uint32_t i = 0; i < bits_per_axis; ++i) {
        const std::uint32_t shift = bits_per_axis - 1 - i;
        z = (z << 1) | ((col >> shift) & 1u);
        z = (z << 1) | ((row >> shift) & 1u);
    }
    return z;
}

inline CellCoords deinterleave(ZValue z, std::uint32_t bits_per_axis) {
    CellCoords c;
    for (std::uint32_t i = 0; i < bits_per_axis; ++i) {
        const std::uint32_t shift = 2 * (bits_per_axis - 1 - i);
        c.col = (c.col << 1) | static_cast<std::uint32_t>((z >> (shift + 1)) & 1u);
        c.row = (c.row << 1) | static_cast<std::uint32_t>((z >> shift) & 1u);
    }
    return c;
}

// Cell containing a point. Points outside the region clamp to edge cells;
// only query trajectories can be out of region, and the bounds never depend
// on where a query point lands.
inline ZValue cell_of(const Point& p, const GridConfig& grid) {
    const auto clamp_axis = [&](double v, double lo) {
        double idx = std::floor((v - lo) / grid.cell_size);
        if (!(idx > 0.0)) idx = 0.0;  // negatives and NaN land in cell 0
        const double hi = static_cast<double>(grid.level - 1);
        if (idx > hi) idx = hi;
        return static_cast<std::uint32_t>(idx);
    };
    return interleave(clamp_axis(p.x, grid.origin.x), clamp_axis(p.y, grid.origin.y),
                      grid.bits_per_axis);
}

// Center of the cell, the point that stands in for every sample in it.
inline Point reference_point(ZValue z, const GridConfig& grid) {
    if (z >= grid.cell_count())
        throw InternalError("zorder: cell id out of range");
    const CellCoords c = deinterleave(z, grid.bits_per_axis);
    return Point{grid.origin.x + (c.col + 0.5) * grid.cell_size,
                 grid.origin.y + (c.row + 0.5) * grid.cell_size};
}

// Minimum distance from a point to the closed square of a cell; zero when
// the point lies inside or on the boundary.
inline double min_dist_point_cell(const Point& q, ZValue cell,
                                  const GridConfig& grid) {
    if (cell >= grid.cell_count())
        throw InternalError("zorder: cell id out of range");
    const CellCoords c = deinterleave(cell, grid.bits_per_axis);
    const double x0 = grid.origin.x + c.col * grid.cell_size;
    const double y0 = grid.origin.y + c.row * grid.cell_size;
    const double dx = std::max({x0 - q.x, q.x - (x0 + grid.cell_size), 0.0});
    const double dy = std::max({y0 - q.y, q.y - (y0 + grid.cell_size), 0.0});
    return std::sqrt(dx * dx + dy * dy);
}

// A trajectory snapped onto the grid. Order-sensitive measures keep one
// z-value per sample point, duplicates included, so the snapped form has the
// same length as the source. Hausdorff keeps a duplicate-free set in
// ascending z order.
struct ReferenceTrajectory {
    TrajectoryId source_id = 0;
    Measure form = Measure::hausdorff;
    std::vector<ZValue> zvals;

    std::size_t size() const { return zvals.size(); }
};

inline ReferenceTrajectory to_reference(const Trajectory& traj,
                                        const GridConfig& grid, Measure measure) {
    ReferenceTrajectory ref;
    ref.source_id = traj.id;
    ref.form = measure;
    ref.zvals.reserve(traj.points.size());
    for (const Point& p : traj.points) ref.zvals.push_back(cell_of(p, grid));
    if (!order_sensitive(measure)) {
        std::sort(ref.zvals.begin(), ref.zvals.end());
        ref.zvals.erase(std::unique(ref.zvals.begin(), ref.zvals.end()),
                        ref.zvals.end());
    }
    return ref;
}

inline std::vector<Point> reference_points(const ReferenceTrajectory& ref,
                                           const GridConfig& grid) {
    std::vector<Point> pts;
    pts.reserve(ref.zvals.size());
    for (ZValue z : ref.zvals) pts.push_back(reference_point(z, grid));
    return pts;
}

}  // namespace reftrie
