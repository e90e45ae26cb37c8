#pragma once

#include <map>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "reftrie/binio.hpp"
#include "reftrie/core.hpp"
#include "reftrie/zorder.hpp"

namespace reftrie {

struct ClusterAssignment {
    std::unordered_map<TrajectoryId, std::uint32_t> cluster_of;
    std::uint32_t granularity = 0;  // grid bits per axis the clustering used
    std::uint32_t cluster_count = 0;
};

struct PartitionAssignment {
    std::unordered_map<TrajectoryId, std::uint32_t> partition_of;
    std::vector<std::uint32_t> sizes;
};

namespace detail {

// Duplicate-free cell sequence of a trajectory at a coarsened grid level,
// first occurrence order. Coarsening drops the last column/row bit pair.
inline std::vector<ZValue> coarse_signature(std::span<const ZValue> fine_cells,
                                            std::uint32_t drop_pairs) {
    std::vector<ZValue> sig;
    for (ZValue z : fine_cells) {
        const ZValue coarse = z >> (2 * drop_pairs);
        bool seen = false;
        for (ZValue s : sig)
            if (s == coarse) {
                seen = true;
                break;
            }
        if (!seen) sig.push_back(coarse);
    }
    return sig;
}

}  // namespace detail

// Groups trajectories whose coarsened grid signatures coincide, enlarging
// the cell size until the cluster count drops to the target (or a single
// cluster at the coarsest level).
inline ClusterAssignment cluster_by_coarsening(std::span<const Trajectory> dataset,
                                               const GridConfig& grid,
                                               std::size_t target) {
    if (target < 1) throw ConfigError("clustering: target must be at least 1");

    std::vector<std::vector<ZValue>> fine(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        fine[i].reserve(dataset[i].points.size());
        for (const Point& p : dataset[i].points)
            fine[i].push_back(cell_of(p, grid));
    }

    for (std::uint32_t level = grid.bits_per_axis;; --level) {
        const std::uint32_t drop = grid.bits_per_axis - level;
        std::map<std::vector<ZValue>, std::uint32_t> clusters;
        std::vector<std::uint32_t> assigned(dataset.size());
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const auto sig = detail::coarse_signature(fine[i], drop);
            auto [it, inserted] = clusters.try_emplace(
                sig, static_cast<std::uint32_t>(clusters.size()));
            assigned[i] = it->second;
        }
        if (clusters.size() <= target || level == 0) {
            ClusterAssignment out;
            out.granularity = level;
            out.cluster_count = static_cast<std::uint32_t>(clusters.size());
            out.cluster_of.reserve(dataset.size());
            for (std::size_t i = 0; i < dataset.size(); ++i)
                out.cluster_of.emplace(dataset[i].id, assigned[i]);
            return out;
        }
    }
}

namespace detail {

inline std::vector<TrajectoryId> cluster_sorted_ids(
    std::span<const Trajectory> dataset, const ClusterAssignment& clusters) {
    std::vector<std::pair<std::uint32_t, TrajectoryId>> order;
    order.reserve(dataset.size());
    for (const Trajectory& t : dataset) {
        auto it = clusters.cluster_of.find(t.id);
        if (it == clusters.cluster_of.end())
            throw InputError("partition: trajectory missing from clustering");
        order.emplace_back(it->second, t.id);
    }
    std::sort(order.begin(), order.end());
    std::vector<TrajectoryId> ids;
    ids.reserve(order.size());
    for (const auto& [c, id] : order) ids.push_back(id);
    return ids;
}

inline PartitionAssignment round_robin(std::span<const TrajectoryId> ids,
                                       std::uint32_t n_partitions) {
    PartitionAssignment out;
    out.sizes.assign(n_partitions, 0);
    out.partition_of.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto p = static_cast<std::uint32_t>(i % n_partitions);
        out.partition_of.emplace(ids[i], p);
        ++out.sizes[p];
    }
    return out;
}

}  // namespace detail

// Spreads every cluster across all partitions: sort by (cluster id,
// trajectory id), then deal round-robin. Partitions end up with near-equal
// sizes and similar composition.
inline PartitionAssignment partition_heterogeneous(std::span<const Trajectory> dataset,
                                                   const ClusterAssignment& clusters,
                                                   std::uint32_t n_partitions) {
    if (n_partitions < 1) throw ConfigError("partition: need at least one partition");
    const auto ids = detail::cluster_sorted_ids(dataset, clusters);
    return detail::round_robin(ids, n_partitions);
}

// Baseline that keeps whole clusters together, spilling into the next
// partition once a partition reaches ceil(N / N_G) trajectories.
inline PartitionAssignment partition_homogeneous(std::span<const Trajectory> dataset,
                                                 const ClusterAssignment& clusters,
                                                 std::uint32_t n_partitions) {
    if (n_partitions < 1) throw ConfigError("partition: need at least one partition");
    const auto ids = detail::cluster_sorted_ids(dataset, clusters);
    const std::size_t capacity = (ids.size() + n_partitions - 1) / n_partitions;
    PartitionAssignment out;
    out.sizes.assign(n_partitions, 0);
    out.partition_of.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto p = static_cast<std::uint32_t>(
            std::min<std::size_t>(i / capacity, n_partitions - 1));
        out.partition_of.emplace(ids[i], p);
        ++out.sizes[p];
    }
    return out;
}

// Baseline that shuffles and deals round-robin; balanced but blind to
// similarity.
inline PartitionAssignment partition_random(std::span<const Trajectory> dataset,
                                            std::uint32_t n_partitions,
                                            std::uint64_t seed) {
    if (n_partitions < 1) throw ConfigError("partition: need at least one partition");
    std::vector<TrajectoryId> ids;
    ids.reserve(dataset.size());
    for (const Trajectory& t : dataset) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1], ids[detail::bounded_rand(rng(), i)]);
    return detail::round_robin(ids, n_partitions);
}

}  // namespace reftrie
