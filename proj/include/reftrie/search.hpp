#pragma once

#include <queue>
#include <span>
#include <vector>

#include "reftrie/core.hpp"
#include "reftrie/distance.hpp"
#include "reftrie/trie.hpp"

namespace reftrie {

struct SearchStats {
    std::uint64_t nodes_visited = 0;
    std::uint64_t nodes_pruned = 0;
    std::uint64_t leaves_evaluated = 0;
    std::uint64_t exact_distances = 0;

    SearchStats& operator+=(const SearchStats& o) {
        nodes_visited += o.nodes_visited;
        nodes_pruned += o.nodes_pruned;
        leaves_evaluated += o.leaves_evaluated;
        exact_distances += o.exact_distances;
        return *this;
    }
};

struct SearchHit {
    TrajectoryId id = 0;
    double distance = 0.0;
};

inline bool hit_less(const SearchHit& a, const SearchHit& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
}

// Keeps the k best (distance, id) pairs seen so far; the worst of them is
// the pruning threshold d_k once the heap is full.
class ResultHeap {
   public:
    explicit ResultHeap(std::size_t k) : k_(k) {}

    void offer(TrajectoryId id, double distance) {
        const SearchHit hit{id, distance};
        if (entries_.size() < k_) {
            entries_.push_back(hit);
            std::push_heap(entries_.begin(), entries_.end(), hit_less);
        } else if (hit_less(hit, entries_.front())) {
            std::pop_heap(entries_.begin(), entries_.end(), hit_less);
            entries_.back() = hit;
            std::push_heap(entries_.begin(), entries_.end(), hit_less);
        }
    }

    double kth_distance() const {
        return entries_.size() < k_ ? std::numeric_limits<double>::infinity()
                                    : entries_.front().distance;
    }

    std::vector<SearchHit> sorted() const {
        std::vector<SearchHit> out = entries_;
        std::sort(out.begin(), out.end(), hit_less);
        return out;
    }

   private:
    std::size_t k_;
    std::vector<SearchHit> entries_;  // max-heap, worst on top
};

// Distances from the query to every global pivot, computed once per query
// and shared by all partitions.
inline std::vector<double> query_pivot_distances(const Trajectory& query,
                                                 const PivotSet& pivots,
                                                 Measure measure) {
    std::vector<double> d_qp;
    d_qp.reserve(pivots.size());
    for (const Trajectory& p : pivots.pivots)
        d_qp.push_back(trajectory_distance(measure, query, p));
    return d_qp;
}

// Two-sided triangle-inequality bound through the pivots. The slack absorbs
// the drift between a member trajectory and the reference the ranges were
// measured against.
inline double pivot_lb(std::span<const double> d_qp, std::span<const HrRange> hr,
                       double slack, Measure measure) {
    if (!is_metric(measure))
        throw ConfigError("pivot bound: measure has no triangle inequality");
    if (d_qp.size() != hr.size())
        throw InternalError("pivot bound: range count mismatch");
    double best = 0.0;
    for (std::size_t i = 0; i < hr.size(); ++i) {
        best = std::max(best, d_qp[i] - hr[i].max - slack);
        best = std::max(best, hr[i].min - d_qp[i] - slack);
    }
    return best;
}

// One step of the incremental Hausdorff bound computation: fold the new
// reference point into the row minima and column maximum.
struct CompLbResult {
    double lb_o = 0.0;
    double dist_to_ref = 0.0;  // D_H(query, reference prefix)
};

inline CompLbResult comp_lb(std::span<const Point> query, const Point& ref_point,
                            HausdorffState& state, double slack) {
    const BoundPair bp = extend_hausdorff(state, query, ref_point, slack);
    return CompLbResult{bp.lb_o, bp.dist_to_ref};
}

inline double two_side_bound(double dist_to_ref, double d_max) {
    return std::max(dist_to_ref - d_max, 0.0);
}

namespace detail {

struct HausdorffSearchPolicy {
    using State = HausdorffState;
    static State init(std::size_t query_len) { return State(query_len); }
    static BoundPair extend(State& s, std::span<const Point> q, const Trie& trie,
                            ZValue label) {
        return extend_hausdorff(s, q, reference_point(label, trie.grid()),
                                trie.grid().slack);
    }
    static double leaf_bound(double dist_to_ref, double d_max, double) {
        return std::max(dist_to_ref - d_max, 0.0);
    }
    static double exact(std::span<const Point> q, const Trajectory& t) {
        return hausdorff(q, t.points);
    }
};

struct FrechetSearchPolicy {
    using State = OrderedDPState;
    static State init(std::size_t query_len) { return State(query_len); }
    static BoundPair extend(State& s, std::span<const Point> q, const Trie& trie,
                            ZValue label) {
        return extend_frechet(s, q, reference_point(label, trie.grid()),
                              trie.grid().slack);
    }
    static double leaf_bound(double dist_to_ref, double, double slack) {
        return std::max(dist_to_ref - slack, 0.0);
    }
    static double exact(std::span<const Point> q, const Trajectory& t) {
        return frechet(q, t.points);
    }
};

struct DtwSearchPolicy {
    using State = OrderedDPState;
    static State init(std::size_t query_len) { return State(query_len); }
    static BoundPair extend(State& s, std::span<const Point> q, const Trie& trie,
                            ZValue label) {
        return extend_dtw(s, q, label, trie.grid());
    }
    static double leaf_bound(double dist_to_ref, double, double) {
        return dist_to_ref;  // the point-to-cell matrix is already a floor
    }
    static double exact(std::span<const Point> q, const Trajectory& t) {
        return dtw(q, t.points);
    }
};

template <typename Policy>
std::vector<SearchHit> top_k_impl(const Trie& trie, const Trajectory& query,
                                  std::size_t k, std::span<const double> d_qp,
                                  const MemberLookup& members, SearchStats* stats,
                                  std::vector<double>* popped_keys) {
    using State = typename Policy::State;
    struct Entry {
        double key;
        std::uint64_t seq;
        const TrieNode* node;
        double lb_o;
        double dist_to_ref;
        State state;
    };
    struct EntryOrder {
        bool operator()(const Entry& a, const Entry& b) const {
            return a.key != b.key ? a.key > b.key : a.seq > b.seq;
        }
    };

    const std::span<const Point> q(query.points);
    const Measure measure = trie.measure();
    const bool use_pivots = is_metric(measure) && !d_qp.empty();
    const double slack = trie.grid().slack;

    SearchStats local;
    ResultHeap heap(k);
    std::priority_queue<Entry, std::vector<Entry>, EntryOrder> queue;
    std::uint64_t seq = 0;
    queue.push(Entry{0.0, seq++, &trie.root(), 0.0, 0.0, Policy::init(q.size())});

    State scratch = Policy::init(q.size());
    while (!queue.empty()) {
        const Entry& top = queue.top();
        const double d_k = heap.kth_distance();
        if (top.key > d_k) {
            // ascending pop keys: everything still queued is at least as far
            local.nodes_pruned += queue.size();
            break;
        }
        Entry entry{top.key, top.seq, top.node, top.lb_o, top.dist_to_ref,
                    std::move(const_cast<Entry&>(top).state)};
        queue.pop();
        ++local.nodes_visited;
        if (popped_keys) popped_keys->push_back(entry.key);

        if (entry.node->is_leaf()) {
            ++local.leaves_evaluated;
            for (TrajectoryId tid : entry.node->tids) {
                auto it = members.find(tid);
                if (it == members.end())
                    throw InternalError("search: leaf references unknown trajectory");
                heap.offer(tid, Policy::exact(q, *it->second));
                ++local.exact_distances;
            }
            continue;
        }

        for (const auto& child : entry.node->children) {
            double lb_o, dist_to_ref;
            bool internal_child = !child->is_leaf();
            if (child->label >= trie.terminator()) {
                // terminator leaf: same reference as its parent
                lb_o = entry.lb_o;
                dist_to_ref = entry.dist_to_ref;
            } else {
                scratch = entry.state;
                const BoundPair bp = Policy::extend(scratch, q, trie, child->label);
                lb_o = bp.lb_o;
                dist_to_ref = bp.dist_to_ref;
            }
            double key = lb_o;
            if (!internal_child)
                key = std::max(key,
                               Policy::leaf_bound(dist_to_ref, child->d_max, slack));
            if (use_pivots && !child->hr.empty())
                key = std::max(key, pivot_lb(d_qp, child->hr, slack, measure));
            if (key > heap.kth_distance()) {
                ++local.nodes_pruned;
                continue;
            }
            Entry next{key, seq++, child.get(), lb_o, dist_to_ref,
                       Policy::init(0)};
            if (internal_child && child->label < trie.terminator())
                next.state = std::move(scratch);
            queue.push(std::move(next));
        }
    }

    if (stats) *stats += local;
    return heap.sorted();
}

}  // namespace detail

// Exact top-k over one trie: best-first traversal in ascending bound order,
// stopping as soon as the next bound exceeds the current k-th distance.
inline std::vector<SearchHit> top_k_search(const Trie& trie, const Trajectory& query,
                                           std::size_t k, const PivotSet& pivots,
                                           const MemberLookup& members,
                                           SearchStats* stats = nullptr,
                                           std::vector<double>* popped_keys = nullptr) {
    if (k < 1) throw InputError("search: k must be at least 1");
    if (query.points.empty()) throw InputError("search: empty query");
    const std::vector<double> d_qp =
        is_metric(trie.measure())
            ? query_pivot_distances(query, pivots, trie.measure())
            : std::vector<double>{};
    switch (trie.measure()) {
        case Measure::hausdorff:
            return detail::top_k_impl<detail::HausdorffSearchPolicy>(
                trie, query, k, d_qp, members, stats, popped_keys);
        case Measure::frechet:
            return detail::top_k_impl<detail::FrechetSearchPolicy>(
                trie, query, k, d_qp, members, stats, popped_keys);
        case Measure::dtw:
            return detail::top_k_impl<detail::DtwSearchPolicy>(
                trie, query, k, d_qp, members, stats, popped_keys);
    }
    throw InternalError("search: unknown measure");
}

// Same, with the query-to-pivot distances precomputed by the caller so that
// one query fans out to many partitions without recomputing them.
inline std::vector<SearchHit> top_k_search(const Trie& trie, const Trajectory& query,
                                           std::size_t k,
                                           std::span<const double> d_qp,
                                           const MemberLookup& members,
                                           SearchStats* stats = nullptr,
                                           std::vector<double>* popped_keys = nullptr) {
    if (k < 1) throw InputError("search: k must be at least 1");
    if (query.points.empty()) throw InputError("search: empty query");
    switch (trie.measure()) {
        case Measure::hausdorff:
            return detail::top_k_impl<detail::HausdorffSearchPolicy>(
                trie, query, k, d_qp, members, stats, popped_keys);
        case Measure::frechet:
            return detail::top_k_impl<detail::FrechetSearchPolicy>(
                trie, query, k, d_qp, members, stats, popped_keys);
        case Measure::dtw:
            return detail::top_k_impl<detail::DtwSearchPolicy>(
                trie, query, k, d_qp, members, stats, popped_keys);
    }
    throw InternalError("search: unknown measure");
}

}  // namespace reftrie
