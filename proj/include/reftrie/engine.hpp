#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "reftrie/core.hpp"
#include "reftrie/distance.hpp"
#include "reftrie/grid.hpp"
#include "reftrie/partition.hpp"
#include "reftrie/search.hpp"
#include "reftrie/succinct.hpp"
#include "reftrie/trie.hpp"
#include "reftrie/zorder.hpp"

namespace reftrie {

enum class Strategy : std::uint8_t { hetero = 0, homo = 1, random = 2 };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::hetero: return "hetero";
        case Strategy::homo: return "homo";
        case Strategy::random: return "random";
    }
    return "?";
}

inline Strategy strategy_from_name(const std::string& name) {
    if (name == "hetero") return Strategy::hetero;
    if (name == "homo") return Strategy::homo;
    if (name == "random") return Strategy::random;
    throw ConfigError("unknown strategy: " + name);
}

struct BuildOptions {
    Measure measure = Measure::hausdorff;
    double delta = 1.0;
    std::uint32_t partitions = 64;
    std::uint32_t pivot_count = 5;
    std::uint32_t pivot_groups = 10;
    Strategy strategy = Strategy::hetero;
    bool optimize_trie = false;
    std::uint64_t seed = 0;
    std::uint8_t dense_levels = kDefaultDenseLevels;
    double padding_fraction = kDefaultPaddingFraction;
    std::optional<BBox> region_override;  // pins the grid for golden setups
};

struct PartitionedIndex {
    GridConfig grid;
    Measure measure = Measure::hausdorff;
    BuildOptions options;
    PivotSet pivots;
    PartitionAssignment assignment;
    std::vector<Trie> shards;
    std::vector<Trajectory> dataset;  // sorted by id
    MemberLookup lookup;

    const Trajectory& trajectory(TrajectoryId id) const {
        auto it = lookup.find(id);
        if (it == lookup.end())
            throw InputError("index: unknown trajectory id " + std::to_string(id));
        return *it->second;
    }
};

struct QueryResult {
    std::vector<SearchHit> hits;
    SearchStats stats;
    double elapsed_seconds = 0.0;
};

namespace detail {

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t workers = std::min<std::size_t>(std::max(hw, 1u), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Builds the full queryable artifact: grid, global pivots, partition
// assignment, and one annotated trie per partition. Shards build in
// parallel; everything is deterministic for a fixed seed.
inline PartitionedIndex build_index(std::vector<Trajectory> dataset,
                                    const BuildOptions& options) {
    if (dataset.empty()) throw InputError("build: empty dataset");
    if (options.partitions < 1)
        throw ConfigError("build: need at least one partition");

    std::sort(dataset.begin(), dataset.end(),
              [](const Trajectory& a, const Trajectory& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < dataset.size(); ++i)
        if (dataset[i].id == dataset[i - 1].id)
            throw InputError("build: duplicate trajectory id " +
                             std::to_string(dataset[i].id));
    for (const Trajectory& t : dataset)
        if (t.points.empty())
            throw InputError("build: trajectory " + std::to_string(t.id) +
                             " has no points");

    PartitionedIndex index;
    index.options = options;
    index.measure = options.measure;
    const BBox box =
        options.region_override ? *options.region_override : bbox_of(dataset);
    index.grid = build_grid(box, options.delta, options.padding_fraction);

    if (is_metric(options.measure) && options.pivot_count > 0)
        index.pivots = select_pivots(dataset, options.pivot_count,
                                     options.pivot_groups, options.measure,
                                     options.seed);

    switch (options.strategy) {
        case Strategy::hetero: {
            const auto clusters = cluster_by_coarsening(
                dataset, index.grid,
                std::max<std::size_t>(1, dataset.size() / options.partitions));
            index.assignment =
                partition_heterogeneous(dataset, clusters, options.partitions);
            break;
        }
        case Strategy::homo: {
            const auto clusters = cluster_by_coarsening(
                dataset, index.grid,
                std::max<std::size_t>(1, dataset.size() / options.partitions));
            index.assignment =
                partition_homogeneous(dataset, clusters, options.partitions);
            break;
        }
        case Strategy::random:
            index.assignment =
                partition_random(dataset, options.partitions, options.seed);
            break;
    }

    index.dataset = std::move(dataset);
    index.lookup = make_member_lookup(index.dataset);

    std::vector<std::vector<const Trajectory*>> members(options.partitions);
    for (const Trajectory& t : index.dataset) {
        auto it = index.assignment.partition_of.find(t.id);
        if (it == index.assignment.partition_of.end())
            throw InternalError("build: trajectory left unassigned");
        members[it->second].push_back(&t);
    }

    index.shards.resize(options.partitions);
    detail::parallel_for(options.partitions, [&](std::size_t shard) {
        if (members[shard].empty()) {
            index.shards[shard] = Trie(index.grid, options.measure);
            return;
        }
        std::vector<ReferenceTrajectory> refs;
        refs.reserve(members[shard].size());
        for (const Trajectory* t : members[shard])
            refs.push_back(to_reference(*t, index.grid, options.measure));
        Trie trie = (options.measure == Measure::hausdorff && options.optimize_trie)
                        ? build_optimized_trie(refs, index.grid)
                        : build_trie(refs, index.grid, options.measure);
        annotate(trie, index.pivots, index.lookup);
        index.shards[shard] = std::move(trie);
    });
    return index;
}

namespace detail {

inline std::vector<SearchHit> merge_top_k(
    std::vector<std::vector<SearchHit>>& per_shard, std::size_t k) {
    std::vector<SearchHit> all;
    for (auto& hits : per_shard)
        all.insert(all.end(), hits.begin(), hits.end());
    std::sort(all.begin(), all.end(), hit_less);
    if (all.size() > k) all.resize(k);
    return all;
}

}  // namespace detail

// Fans the query out to every shard, then merges the per-shard top-k lists
// into the global answer under (distance, id) order.
inline QueryResult query(const PartitionedIndex& index, const Trajectory& q,
                         std::size_t k) {
    if (k < 1) throw InputError("query: k must be at least 1");
    if (q.points.empty()) throw InputError("query: empty query trajectory");
    const auto start = std::chrono::steady_clock::now();

    const std::vector<double> d_qp =
        is_metric(index.measure) && !index.pivots.empty()
            ? query_pivot_distances(q, index.pivots, index.measure)
            : std::vector<double>{};

    std::vector<std::vector<SearchHit>> per_shard(index.shards.size());
    std::vector<SearchStats> per_stats(index.shards.size());
    detail::parallel_for(index.shards.size(), [&](std::size_t shard) {
        if (index.shards[shard].root().is_leaf()) return;  // empty shard
        per_shard[shard] = top_k_search(index.shards[shard], q, k, d_qp,
                                        index.lookup, &per_stats[shard]);
    });

    QueryResult result;
    result.hits = detail::merge_top_k(per_shard, k);
    for (const SearchStats& s : per_stats) result.stats += s;
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

// Brute-force scan over the whole dataset; the ground truth every indexed
// query must reproduce.
inline QueryResult linear_scan(std::span<const Trajectory> dataset,
                               const Trajectory& q, std::size_t k,
                               Measure measure) {
    if (k < 1) throw InputError("scan: k must be at least 1");
    if (q.points.empty()) throw InputError("scan: empty query trajectory");
    const auto start = std::chrono::steady_clock::now();

    std::vector<SearchHit> hits(dataset.size());
    detail::parallel_for(dataset.size(), [&](std::size_t i) {
        hits[i] = SearchHit{dataset[i].id,
                            trajectory_distance(measure, q, dataset[i])};
    });
    std::sort(hits.begin(), hits.end(), hit_less);
    if (hits.size() > k) hits.resize(k);

    QueryResult result;
    result.hits = std::move(hits);
    result.stats.exact_distances = dataset.size();
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

struct BenchRow {
    TrajectoryId query_id = 0;
    std::size_t repeats = 0;
    double mean_seconds = 0.0;
    double min_seconds = 0.0;
    double max_seconds = 0.0;
    double scan_seconds = 0.0;
    double speedup = 0.0;  // scan time over mean indexed time
    SearchStats stats;     // from the last repeat
    std::vector<SearchHit> hits;
};

inline std::vector<BenchRow> bench(const PartitionedIndex& index,
                                   std::span<const Trajectory> queries,
                                   std::size_t k, std::size_t repeats) {
    if (queries.empty()) throw InputError("bench: no queries");
    if (repeats < 1) throw ConfigError("bench: repeats must be at least 1");
    std::vector<BenchRow> rows;
    rows.reserve(queries.size());
    for (const Trajectory& q : queries) {
        BenchRow row;
        row.query_id = q.id;
        row.repeats = repeats;
        row.min_seconds = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < repeats; ++r) {
            const QueryResult res = query(index, q, k);
            row.mean_seconds += res.elapsed_seconds;
            row.min_seconds = std::min(row.min_seconds, res.elapsed_seconds);
            row.max_seconds = std::max(row.max_seconds, res.elapsed_seconds);
            if (r + 1 == repeats) {
                row.stats = res.stats;
                row.hits = res.hits;
            }
        }
        row.mean_seconds /= static_cast<double>(repeats);
        row.scan_seconds =
            linear_scan(index.dataset, q, k, index.measure).elapsed_seconds;
        row.speedup =
            row.mean_seconds > 0.0 ? row.scan_seconds / row.mean_seconds : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace reftrie
