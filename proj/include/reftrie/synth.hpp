#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "reftrie/binio.hpp"
#include "reftrie/core.hpp"

namespace reftrie {

// Clustered random-walk workload: trajectories start near one of a set of
// cluster centers and wander with small gaussian steps. Dense clusters make
// pruning behavior observable at desk scale.
struct GenOptions {
    std::uint32_t clusters = 50;
    std::uint32_t per_cluster = 100;
    std::uint32_t min_len = 10;
    std::uint32_t max_len = 50;
    double region = 100.0;          // cluster centers drawn in [0, region]^2
    double cluster_spread = 2.0;    // start point scatter around the center
    double step = 0.5;              // random walk step scale
    std::uint64_t seed = 0;
};

namespace detail {

struct SynthRng {
    std::mt19937_64 rng;
    bool have_spare = false;
    double spare = 0.0;

    explicit SynthRng(std::uint64_t seed) : rng(seed) {}

    double uniform01() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }

    // Box-Muller; std::normal_distribution is not pinned across standard
    // libraries and generated files must be reproducible.
    double gaussian() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare = r * std::sin(a);
        have_spare = true;
        return r * std::cos(a);
    }

    std::uint64_t below(std::uint64_t n) { return bounded_rand(rng(), n); }
};

}  // namespace detail

inline std::vector<Trajectory> generate_clustered(const GenOptions& opt) {
    if (opt.clusters == 0 || opt.per_cluster == 0)
        throw ConfigError("generator: cluster counts must be positive");
    if (opt.min_len < 2 || opt.max_len < opt.min_len)
        throw ConfigError("generator: need 2 <= min_len <= max_len");

    detail::SynthRng rng(opt.seed);
    std::vector<Point> centers;
    centers.reserve(opt.clusters);
    for (std::uint32_t c = 0; c < opt.clusters; ++c)
        centers.push_back(Point{rng.uniform01() * opt.region,
                                rng.uniform01() * opt.region});

    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(opt.clusters) * opt.per_cluster);
    TrajectoryId next_id = 0;
    for (std::uint32_t c = 0; c < opt.clusters; ++c) {
        for (std::uint32_t t = 0; t < opt.per_cluster; ++t) {
            const std::uint64_t len =
                opt.min_len + rng.below(opt.max_len - opt.min_len + 1);
            Trajectory traj;
            traj.id = next_id++;
            traj.points.reserve(len);
            Point p{centers[c].x + rng.gaussian() * opt.cluster_spread,
                    centers[c].y + rng.gaussian() * opt.cluster_spread};
            traj.points.push_back(p);
            for (std::uint64_t i = 1; i < len; ++i) {
                p.x += rng.gaussian() * opt.step;
                p.y += rng.gaussian() * opt.step;
                traj.points.push_back(p);
            }
            out.push_back(std::move(traj));
        }
    }
    return out;
}

}  // namespace reftrie
