#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace reftrie {

// Error taxonomy: configuration (bad parameters), input (bad data),
// format (bad bytes on disk), internal (broken invariant).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline bool finite(const Point& p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
}

inline double euclid(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

using TrajectoryId = std::uint64_t;

struct Trajectory {
    TrajectoryId id = 0;
    std::vector<Point> points;

    std::size_t size() const { return points.size(); }
};

struct BBox {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();

    void expand(const Point& p) {
        if (p.x < min_x) min_x = p.x;
        if (p.y < min_y) min_y = p.y;
        if (p.x > max_x) max_x = p.x;
        if (p.y > max_y) max_y = p.y;
    }

    bool empty() const { return min_x > max_x || min_y > max_y; }
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
};

template <typename Range>
BBox bbox_of(const Range& trajectories) {
    BBox box;
    for (const auto& t : trajectories)
        for (const auto& p : t.points) box.expand(p);
    return box;
}

enum class Measure : std::uint8_t { hausdorff = 0, frechet = 1, dtw = 2 };

// Hausdorff and discrete Frechet satisfy the triangle inequality; DTW does
// not, so pivot pruning is disabled for it.
constexpr bool is_metric(Measure m) { return m != Measure::dtw; }

// Hausdorff compares point sets; the other measures compare sequences.
constexpr bool order_sensitive(Measure m) { return m != Measure::hausdorff; }

inline const char* measure_name(Measure m) {
    switch (m) {
        case Measure::hausdorff: return "hausdorff";
        case Measure::frechet: return "frechet";
        case Measure::dtw: return "dtw";
    }
    return "?";
}

inline Measure measure_from_name(const std::string& name) {
    if (name == "hausdorff") return Measure::hausdorff;
    if (name == "frechet") return Measure::frechet;
    if (name == "dtw") return Measure::dtw;
    throw ConfigError("unknown measure: " + name);
}

}  // namespace reftrie
