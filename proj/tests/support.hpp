#pragma once

// Test-only helpers: independent brute-force oracles (full matrices instead
// of the library's rolling columns) and shared fixture data.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "reftrie/core.hpp"
#include "reftrie/grid.hpp"
#include "reftrie/zorder.hpp"

namespace testsupport {

using reftrie::GridConfig;
using reftrie::Measure;
using reftrie::Point;
using reftrie::Trajectory;

inline double dist(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Full pairwise distance matrix, row-major, m rows (a) by n columns (b).
inline std::vector<std::vector<double>> distance_matrix(std::span<const Point> a,
                                                        std::span<const Point> b) {
    std::vector<std::vector<double>> d(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) d[i][j] = dist(a[i], b[j]);
    return d;
}

inline double oracle_hausdorff(std::span<const Point> a, std::span<const Point> b) {
    const auto d = distance_matrix(a, b);
    double h = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        h = std::max(h, *std::min_element(d[i].begin(), d[i].end()));
    for (std::size_t j = 0; j < b.size(); ++j) {
        double best = d[0][j];
        for (std::size_t i = 1; i < a.size(); ++i) best = std::min(best, d[i][j]);
        h = std::max(h, best);
    }
    return h;
}

// Full coupling matrix for the discrete Frechet distance over an arbitrary
// per-pair cost matrix.
inline std::vector<std::vector<double>> frechet_matrix(
    const std::vector<std::vector<double>>& cost) {
    const std::size_t m = cost.size(), n = cost[0].size();
    std::vector<std::vector<double>> f(m, std::vector<double>(n));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == 0 && j == 0)
                f[i][j] = cost[0][0];
            else if (i == 0)
                f[i][j] = std::max(f[0][j - 1], cost[i][j]);
            else if (j == 0)
                f[i][j] = std::max(f[i - 1][0], cost[i][j]);
            else
                f[i][j] = std::max(
                    cost[i][j],
                    std::min({f[i - 1][j - 1], f[i - 1][j], f[i][j - 1]}));
        }
    return f;
}

inline std::vector<std::vector<double>> dtw_matrix(
    const std::vector<std::vector<double>>& cost) {
    const std::size_t m = cost.size(), n = cost[0].size();
    std::vector<std::vector<double>> f(m, std::vector<double>(n));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == 0 && j == 0)
                f[i][j] = cost[0][0];
            else if (i == 0)
                f[i][j] = f[0][j - 1] + cost[i][j];
            else if (j == 0)
                f[i][j] = f[i - 1][0] + cost[i][j];
            else
                f[i][j] = cost[i][j] +
                          std::min({f[i - 1][j - 1], f[i - 1][j], f[i][j - 1]});
        }
    return f;
}

inline double oracle_frechet(std::span<const Point> a, std::span<const Point> b) {
    return frechet_matrix(distance_matrix(a, b)).back().back();
}

inline double oracle_dtw(std::span<const Point> a, std::span<const Point> b) {
    return dtw_matrix(distance_matrix(a, b)).back().back();
}

inline double oracle_distance(Measure m, std::span<const Point> a,
                              std::span<const Point> b) {
    switch (m) {
        case Measure::hausdorff: return oracle_hausdorff(a, b);
        case Measure::frechet: return oracle_frechet(a, b);
        case Measure::dtw: return oracle_dtw(a, b);
    }
    return 0.0;
}

// Cost matrix of point-to-cell minimum distances, for the DTW bound.
inline std::vector<std::vector<double>> cell_cost_matrix(
    std::span<const Point> q, std::span<const reftrie::ZValue> cells,
    const GridConfig& grid) {
    std::vector<std::vector<double>> cost(q.size(),
                                          std::vector<double>(cells.size()));
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = 0; j < cells.size(); ++j)
            cost[i][j] = reftrie::min_dist_point_cell(q[i], cells[j], grid);
    return cost;
}

struct OracleHit {
    reftrie::TrajectoryId id;
    double distance;
};

inline std::vector<OracleHit> oracle_top_k(std::span<const Trajectory> dataset,
                                           const Trajectory& q, std::size_t k,
                                           Measure measure) {
    std::vector<OracleHit> all;
    all.reserve(dataset.size());
    for (const Trajectory& t : dataset)
        all.push_back(OracleHit{t.id, oracle_distance(measure, q.points, t.points)});
    std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

// Five trajectories plus a query laid out on an 8x8 unit grid, every sample
// sitting at a cell center. The canonical small fixture for goldens.
inline std::vector<Trajectory> demo_dataset() {
    return {
        Trajectory{1, {{0.5, 7.5}, {2.5, 7.5}, {6.5, 7.5}, {6.5, 4.5}}},
        Trajectory{2, {{1.5, 0.5}, {2.5, 0.5}, {2.5, 4.5}, {4.5, 4.5}}},
        Trajectory{3, {{4.5, 0.5}, {7.5, 0.5}, {7.5, 2.5}, {4.5, 2.5}, {4.5, 1.5}}},
        Trajectory{4, {{0.5, 7.5}, {2.5, 7.5}, {5.5, 7.5}, {5.5, 3.5}}},
        Trajectory{5, {{1.5, 0.5}, {2.5, 0.5}, {2.5, 5.5}, {0.5, 5.5}, {0.5, 2.5}}},
    };
}

inline Trajectory demo_query() {
    return Trajectory{100, {{0.5, 6.5}, {2.5, 6.5}, {4.5, 6.5}}};
}

// The demo grid: 8x8 cells of side 1 over [0,8]^2, no padding.
inline GridConfig demo_grid() {
    reftrie::BBox box;
    box.min_x = 0.0;
    box.min_y = 0.0;
    box.max_x = 8.0;
    box.max_y = 8.0;
    return reftrie::build_grid(box, 1.0, 0.0);
}

struct TestRng {
    std::mt19937_64 rng;
    explicit TestRng(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(rng() % n);
    }
    Point point(double lo, double hi) {
        const double x = uniform(lo, hi);
        const double y = uniform(lo, hi);
        return Point{x, y};
    }
    Trajectory trajectory(reftrie::TrajectoryId id, std::size_t min_len,
                          std::size_t max_len, double lo, double hi) {
        Trajectory t;
        t.id = id;
        const std::size_t len = min_len + below(max_len - min_len + 1);
        Point p = point(lo, hi);
        t.points.push_back(p);
        const double step = (hi - lo) / 40.0;
        for (std::size_t i = 1; i < len; ++i) {
            p.x += uniform(-step, step);
            p.y += uniform(-step, step);
            t.points.push_back(p);
        }
        return t;
    }
    std::vector<Trajectory> dataset(std::size_t n, std::size_t min_len,
                                    std::size_t max_len, double lo, double hi) {
        std::vector<Trajectory> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(trajectory(i, min_len, max_len, lo, hi));
        return out;
    }
};

}  // namespace testsupport
