#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "reftrie/core.hpp"
#include "reftrie/zorder.hpp"

namespace reftrie {

namespace detail {
inline void require_non_empty(std::span<const Point> a, std::span<const Point> b) {
    if (a.empty() || b.empty())
        throw InputError("distance: empty trajectory");
}
}  // namespace detail

// Hausdorff distance: max of the two directed max-min point distances.
inline double hausdorff(std::span<const Point> a, std::span<const Point> b) {
    detail::require_non_empty(a, b);
    double result = 0.0;
    for (const Point& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& q : b) best = std::min(best, euclid(p, q));
        result = std::max(result, best);
    }
    for (const Point& q : b) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& p : a) best = std::min(best, euclid(p, q));
        result = std::max(result, best);
    }
    return result;
}

// Discrete Frechet distance by full dynamic programming, one rolling column.
inline double frechet(std::span<const Point> a, std::span<const Point> b) {
    detail::require_non_empty(a, b);
    const std::size_t m = a.size();
    std::vector<double> col(m);
    col[0] = euclid(a[0], b[0]);
    for (std::size_t i = 1; i < m; ++i)
        col[i] = std::max(col[i - 1], euclid(a[i], b[0]));
    for (std::size_t j = 1; j < b.size(); ++j) {
        double diag = col[0];
        col[0] = std::max(col[0], euclid(a[0], b[j]));
        for (std::size_t i = 1; i < m; ++i) {
            const double prev = col[i];
            col[i] = std::max(euclid(a[i], b[j]),
                              std::min({diag, col[i - 1], prev}));
            diag = prev;
        }
    }
    return col[m - 1];
}

// Dynamic time warping by full dynamic programming, one rolling column.
inline double dtw(std::span<const Point> a, std::span<const Point> b) {
    detail::require_non_empty(a, b);
    const std::size_t m = a.size();
    std::vector<double> col(m);
    col[0] = euclid(a[0], b[0]);
    for (std::size_t i = 1; i < m; ++i)
        col[i] = col[i - 1] + euclid(a[i], b[0]);
    for (std::size_t j = 1; j < b.size(); ++j) {
        double diag = col[0];
        col[0] += euclid(a[0], b[j]);
        for (std::size_t i = 1; i < m; ++i) {
            const double prev = col[i];
            col[i] = euclid(a[i], b[j]) + std::min({diag, col[i - 1], prev});
            diag = prev;
        }
    }
    return col[m - 1];
}

inline double trajectory_distance(Measure measure, std::span<const Point> a,
                                  std::span<const Point> b) {
    switch (measure) {
        case Measure::hausdorff: return hausdorff(a, b);
        case Measure::frechet: return frechet(a, b);
        case Measure::dtw: return dtw(a, b);
    }
    throw InternalError("distance: unknown measure");
}

inline double trajectory_distance(Measure measure, const Trajectory& a,
                                  const Trajectory& b) {
    return trajectory_distance(measure, std::span<const Point>(a.points),
                               std::span<const Point>(b.points));
}

// Bounds produced when a search entry is extended by one reference point.
// lb_o prunes subtrees; dist_to_ref is the distance between the query and
// the reference prefix so far, the raw material of the leaf-level bound.
struct BoundPair {
    double lb_o = 0.0;
    double dist_to_ref = 0.0;
};

// Per-query-point running row minima plus the running maximum over column
// minima. One column is appended per reference point visited.
struct HausdorffState {
    std::vector<double> row_min;  // r[i], min distance of query point i to any
                                  // reference point seen so far
    double col_max = 0.0;         // c_max, max over per-column minima
    std::uint32_t len = 0;        // reference points consumed

    explicit HausdorffState(std::size_t query_len = 0)
        : row_min(query_len, std::numeric_limits<double>::infinity()) {}
};

inline BoundPair extend_hausdorff(HausdorffState& state,
                                  std::span<const Point> query,
                                  const Point& ref_point, double slack) {
    double col_min = std::numeric_limits<double>::infinity();
    double row_max = 0.0;
    for (std::size_t i = 0; i < query.size(); ++i) {
        const double d = euclid(query[i], ref_point);
        state.row_min[i] = std::min(state.row_min[i], d);
        col_min = std::min(col_min, d);
        row_max = std::max(row_max, state.row_min[i]);
    }
    state.col_max = std::max(state.col_max, col_min);
    ++state.len;
    return BoundPair{std::max(state.col_max - slack, 0.0),
                     std::max(row_max, state.col_max)};
}

// Last DP column for the order-sensitive measures, extended one reference
// point at a time. col_min is the minimum of the newest column.
struct OrderedDPState {
    std::vector<double> col;  // f[0..m-1] for the newest reference point
    double col_min = std::numeric_limits<double>::infinity();
    std::uint32_t len = 0;    // reference points consumed

    explicit OrderedDPState(std::size_t query_len = 0) : col(query_len, 0.0) {}
};

inline BoundPair extend_frechet(OrderedDPState& state,
                                std::span<const Point> query,
                                const Point& ref_point, double slack) {
    const std::size_t m = query.size();
    if (state.len == 0) {
        state.col[0] = euclid(query[0], ref_point);
        for (std::size_t i = 1; i < m; ++i)
            state.col[i] = std::max(state.col[i - 1], euclid(query[i], ref_point));
    } else {
        double diag = state.col[0];
        state.col[0] = std::max(state.col[0], euclid(query[0], ref_point));
        for (std::size_t i = 1; i < m; ++i) {
            const double prev = state.col[i];
            state.col[i] = std::max(euclid(query[i], ref_point),
                                    std::min({diag, state.col[i - 1], prev}));
            diag = prev;
        }
    }
    state.col_min = *std::min_element(state.col.begin(), state.col.end());
    ++state.len;
    return BoundPair{std::max(state.col_min - slack, 0.0), state.col.back()};
}

// DTW columns use the minimum distance from the query point to the cell
// square rather than the distance to the cell center: without the triangle
// inequality only the point-to-cell floor is a safe lower bound.
inline BoundPair extend_dtw(OrderedDPState& state, std::span<const Point> query,
                            ZValue cell, const GridConfig& grid) {
    const std::size_t m = query.size();
    if (state.len == 0) {
        state.col[0] = min_dist_point_cell(query[0], cell, grid);
        for (std::size_t i = 1; i < m; ++i)
            state.col[i] = state.col[i - 1] + min_dist_point_cell(query[i], cell, grid);
    } else {
        double diag = state.col[0];
        state.col[0] += min_dist_point_cell(query[0], cell, grid);
        for (std::size_t i = 1; i < m; ++i) {
            const double prev = state.col[i];
            state.col[i] = min_dist_point_cell(query[i], cell, grid) +
                           std::min({diag, state.col[i - 1], prev});
            diag = prev;
        }
    }
    state.col_min = *std::min_element(state.col.begin(), state.col.end());
    ++state.len;
    return BoundPair{state.col_min, state.col.back()};
}

}  // namespace reftrie
