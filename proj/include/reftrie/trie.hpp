#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "reftrie/binio.hpp"
#include "reftrie/core.hpp"
#include "reftrie/distance.hpp"
#include "reftrie/grid.hpp"
#include "reftrie/zorder.hpp"

namespace reftrie {

// Distance range from the reference trajectories below a node to one pivot.
struct HrRange {
    double min = 0.0;
    double max = 0.0;
};

struct TrieNode {
    ZValue label = 0;  // cell id, or the terminator sentinel (cell_count)
    std::vector<std::unique_ptr<TrieNode>> children;  // ascending by label
    std::vector<TrajectoryId> tids;  // leaf only
    double d_max = 0.0;              // leaf only: max D(member, reference)
    std::vector<HrRange> hr;         // one range per pivot

    bool is_leaf() const { return children.empty(); }

    TrieNode* find_child(ZValue z) const {
        auto it = std::lower_bound(
            children.begin(), children.end(), z,
            [](const std::unique_ptr<TrieNode>& n, ZValue v) { return n->label < v; });
        return (it != children.end() && (*it)->label == z) ? it->get() : nullptr;
    }

    TrieNode* add_child(ZValue z) {
        auto it = std::lower_bound(
            children.begin(), children.end(), z,
            [](const std::unique_ptr<TrieNode>& n, ZValue v) { return n->label < v; });
        auto node = std::make_unique<TrieNode>();
        node->label = z;
        return children.insert(it, std::move(node))->get();
    }
};

// Trie over reference trajectories for one partition. Internal node labels
// spell the reference prefix; each inserted reference ends at exactly one
// leaf carrying the member trajectory ids.
class Trie {
   public:
    Trie() : root_(std::make_unique<TrieNode>()) {}
    Trie(GridConfig grid, Measure measure)
        : grid_(grid), measure_(measure), root_(std::make_unique<TrieNode>()) {
        root_->label = terminator();
    }

    const GridConfig& grid() const { return grid_; }
    Measure measure() const { return measure_; }
    TrieNode& root() { return *root_; }
    const TrieNode& root() const { return *root_; }

    // One past the valid cell range; stands in for the end-of-reference mark
    // appended when one reference is a proper prefix of another.
    ZValue terminator() const { return grid_.cell_count(); }

    std::size_t node_count() const {  // excluding the root
        std::size_t n = 0;
        walk(*root_, [&](const TrieNode&) { ++n; });
        return n - 1;
    }

    template <typename Fn>
    void walk(const TrieNode& node, Fn&& fn) const {
        fn(node);
        for (const auto& c : node.children) walk(*c, fn);
    }

   private:
    GridConfig grid_;
    Measure measure_ = Measure::hausdorff;
    std::unique_ptr<TrieNode> root_;

    friend Trie build_trie(std::span<const ReferenceTrajectory>, const GridConfig&,
                           Measure);
    friend class OptimizedTrieBuilder;
    friend class SuccinctCodec;
};

namespace detail {

// A reference ends at `node`. If the node already has children the id moves
// to a terminator child so that every reference still ends at a leaf.
inline void attach_tid(TrieNode& node, TrajectoryId tid, ZValue terminator) {
    if (node.children.empty()) {
        node.tids.push_back(tid);
        return;
    }
    TrieNode* term = node.find_child(terminator);
    if (!term) term = node.add_child(terminator);
    term->tids.push_back(tid);
}

// A node that used to be the end of some reference gains a real child; its
// ids migrate to a terminator child.
inline void migrate_tids(TrieNode& node, ZValue terminator) {
    if (node.tids.empty() || node.label == terminator) return;
    TrieNode* term = node.find_child(terminator);
    if (!term) term = node.add_child(terminator);
    term->tids.insert(term->tids.end(), node.tids.begin(), node.tids.end());
    node.tids.clear();
}

}  // namespace detail

inline Trie build_trie(std::span<const ReferenceTrajectory> refs,
                       const GridConfig& grid, Measure measure) {
    if (refs.empty()) throw InputError("trie: no reference trajectories");
    Trie trie(grid, measure);
    const ZValue term = trie.terminator();
    for (const ReferenceTrajectory& ref : refs) {
        if (ref.form != measure)
            throw InputError("trie: reference built for a different measure");
        if (ref.zvals.empty()) throw InputError("trie: empty reference");
        TrieNode* node = trie.root_.get();
        for (ZValue z : ref.zvals) {
            TrieNode* child = node->find_child(z);
            if (!child) {
                detail::migrate_tids(*node, term);
                child = node->add_child(z);
            }
            node = child;
        }
        detail::attach_tid(*node, ref.source_id, term);
    }
    return trie;
}

// Sorted (z-value, count) pairs over a collection of z-value sets; the
// frequency array the greedy builder picks children from.
using ZFrequency = std::vector<std::pair<ZValue, std::uint32_t>>;

inline ZFrequency zvalue_frequencies(std::span<const ReferenceTrajectory> refs) {
    std::vector<ZValue> all;
    for (const auto& r : refs)
        all.insert(all.end(), r.zvals.begin(), r.zvals.end());
    std::sort(all.begin(), all.end());
    ZFrequency freq;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        freq.emplace_back(all[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return freq;
}

struct GreedyCounters {
    std::uint64_t set_element_visits = 0;  // z-values scanned building counts
    std::uint64_t freq_array_scans = 0;    // entries scanned picking maxima
};

// Greedy per-level hitting-set construction for order-free (Hausdorff)
// references: the most frequent remaining z-value becomes the next child,
// every set containing it descends into that subtree with the value removed,
// and the child's frequency counts are subtracted from the parent's instead
// of recounting the remainder. Ties break toward the smaller z-value.
class OptimizedTrieBuilder {
   public:
    explicit OptimizedTrieBuilder(GreedyCounters* counters) : counters_(counters) {}

    Trie build(std::span<const ReferenceTrajectory> refs, const GridConfig& grid) {
        if (refs.empty()) throw InputError("trie: no reference trajectories");
        std::vector<SetState> sets;
        sets.reserve(refs.size());
        for (const auto& r : refs) {
            if (r.form != Measure::hausdorff)
                throw InputError("trie: greedy build needs order-free references");
            if (r.zvals.empty()) throw InputError("trie: empty reference");
            sets.push_back(SetState{r.source_id, r.zvals});
        }
        Trie trie(grid, Measure::hausdorff);
        ZFrequency freq = count(sets);
        build_level(trie, *trie.root_, std::move(sets), std::move(freq));
        return trie;
    }

   private:
    struct SetState {
        TrajectoryId tid;
        std::vector<ZValue> remaining;  // ascending, duplicate-free
    };

    ZFrequency count(const std::vector<SetState>& sets) {
        std::vector<ZValue> all;
        for (const auto& s : sets) {
            all.insert(all.end(), s.remaining.begin(), s.remaining.end());
            if (counters_) counters_->set_element_visits += s.remaining.size();
        }
        std::sort(all.begin(), all.end());
        ZFrequency freq;
        for (std::size_t i = 0; i < all.size();) {
            std::size_t j = i;
            while (j < all.size() && all[j] == all[i]) ++j;
            freq.emplace_back(all[i], static_cast<std::uint32_t>(j - i));
            i = j;
        }
        return freq;
    }

    static void subtract(ZFrequency& from, const ZFrequency& sub) {
        ZFrequency out;
        out.reserve(from.size());
        std::size_t i = 0, j = 0;
        while (i < from.size()) {
            if (j < sub.size() && sub[j].first == from[i].first) {
                const std::uint32_t left = from[i].second - sub[j].second;
                if (left > 0) out.emplace_back(from[i].first, left);
                ++i;
                ++j;
            } else {
                out.push_back(from[i]);
                ++i;
            }
        }
        from = std::move(out);
    }

    void build_level(Trie& trie, TrieNode& parent, std::vector<SetState> sets,
                     ZFrequency freq) {
        // Sets with nothing left end here.
        std::vector<SetState> live;
        live.reserve(sets.size());
        for (auto& s : sets) {
            if (s.remaining.empty())
                detail::attach_tid(parent, s.tid, trie.terminator());
            else
                live.push_back(std::move(s));
        }

        while (!live.empty()) {
            // Most frequent remaining z-value; entries are in ascending z
            // order, so the strict comparison keeps the smallest on ties.
            std::size_t best = 0;
            for (std::size_t i = 1; i < freq.size(); ++i)
                if (freq[i].second > freq[best].second) best = i;
            if (counters_) counters_->freq_array_scans += freq.size();
            const ZValue pick = freq[best].first;

            std::vector<SetState> covered;
            std::vector<SetState> rest;
            for (auto& s : live) {
                auto it = std::lower_bound(s.remaining.begin(), s.remaining.end(), pick);
                if (it != s.remaining.end() && *it == pick) {
                    s.remaining.erase(it);
                    covered.push_back(std::move(s));
                } else {
                    rest.push_back(std::move(s));
                }
            }

            // Counts for the covered sets, with the picked value itself put
            // back so the subtraction removes its full parent count.
            ZFrequency covered_freq = count(covered);
            {
                auto it = std::lower_bound(
                    covered_freq.begin(), covered_freq.end(), pick,
                    [](const auto& e, ZValue v) { return e.first < v; });
                if (it != covered_freq.end() && it->first == pick)
                    it->second += static_cast<std::uint32_t>(covered.size());
                else
                    covered_freq.insert(it,
                                        {pick, static_cast<std::uint32_t>(covered.size())});
            }
            subtract(freq, covered_freq);
            {
                auto it = std::lower_bound(
                    covered_freq.begin(), covered_freq.end(), pick,
                    [](const auto& e, ZValue v) { return e.first < v; });
                if (it != covered_freq.end() && it->first == pick) {
                    it->second -= static_cast<std::uint32_t>(covered.size());
                    if (it->second == 0) covered_freq.erase(it);
                }
            }

            detail::migrate_tids(parent, trie.terminator());
            TrieNode* child = parent.add_child(pick);
            build_level(trie, *child, std::move(covered), std::move(covered_freq));
            live = std::move(rest);
        }
    }

    GreedyCounters* counters_;
};

inline Trie build_optimized_trie(std::span<const ReferenceTrajectory> refs,
                                 const GridConfig& grid,
                                 GreedyCounters* counters = nullptr) {
    return OptimizedTrieBuilder(counters).build(refs, grid);
}

// Global pivot trajectories with the pairwise-distance score of the winning
// sample group.
struct PivotSet {
    std::vector<Trajectory> pivots;
    double score = 0.0;

    bool empty() const { return pivots.empty(); }
    std::size_t size() const { return pivots.size(); }
};

struct PivotSelectionTrace {
    std::vector<std::vector<std::size_t>> groups;  // dataset indices sampled
    std::vector<double> scores;
};

inline double pairwise_distance_sum(std::span<const Trajectory> group,
                                    Measure measure) {
    double sum = 0.0;
    for (std::size_t i = 0; i < group.size(); ++i)
        for (std::size_t j = i + 1; j < group.size(); ++j)
            sum += trajectory_distance(measure, group[i], group[j]);
    return sum;
}

// Samples `groups` random subsets of n_pivots trajectories and keeps the one
// whose pairwise distance sum is largest.
inline PivotSet select_pivots(std::span<const Trajectory> dataset,
                              std::uint32_t n_pivots, std::uint32_t groups,
                              Measure measure, std::uint64_t seed,
                              PivotSelectionTrace* trace = nullptr) {
    if (!is_metric(measure))
        throw ConfigError("pivots: measure has no triangle inequality");
    if (n_pivots > dataset.size())
        throw ConfigError("pivots: more pivots requested than trajectories");
    if (n_pivots == 0 || groups == 0)
        throw ConfigError("pivots: pivot count and group count must be positive");

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(dataset.size());
    PivotSet best;
    double best_score = -1.0;
    for (std::uint32_t g = 0; g < groups; ++g) {
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::vector<Trajectory> group;
        std::vector<std::size_t> picked;
        group.reserve(n_pivots);
        for (std::uint32_t j = 0; j < n_pivots; ++j) {
            const std::size_t pos =
                j + detail::bounded_rand(rng(), idx.size() - j);
            std::swap(idx[j], idx[pos]);
            picked.push_back(idx[j]);
            group.push_back(dataset[idx[j]]);
        }
        const double score = pairwise_distance_sum(group, measure);
        if (trace) {
            trace->groups.push_back(picked);
            trace->scores.push_back(score);
        }
        if (score > best_score) {
            best_score = score;
            best.pivots = std::move(group);
            best.score = score;
        }
    }
    return best;
}

using MemberLookup = std::unordered_map<TrajectoryId, const Trajectory*>;

inline MemberLookup make_member_lookup(std::span<const Trajectory> dataset) {
    MemberLookup lookup;
    lookup.reserve(dataset.size());
    for (const Trajectory& t : dataset) lookup.emplace(t.id, &t);
    return lookup;
}

namespace detail {

struct AnnotateContext {
    const Trie* trie;
    const PivotSet* pivots;
    const MemberLookup* members;
    std::vector<Point> path;
};

inline void annotate_node(AnnotateContext& ctx, TrieNode& node) {
    const bool real_cell = node.label < ctx.trie->terminator();
    if (real_cell)
        ctx.path.push_back(reference_point(node.label, ctx.trie->grid()));

    if (node.is_leaf()) {
        const std::span<const Point> ref(ctx.path);
        node.d_max = 0.0;
        for (TrajectoryId tid : node.tids) {
            auto it = ctx.members->find(tid);
            if (it == ctx.members->end())
                throw InternalError("annotate: leaf references unknown trajectory");
            node.d_max = std::max(
                node.d_max, trajectory_distance(ctx.trie->measure(),
                                                std::span<const Point>(it->second->points),
                                                ref));
        }
        node.hr.resize(ctx.pivots->size());
        for (std::size_t i = 0; i < ctx.pivots->size(); ++i) {
            const double d = trajectory_distance(
                ctx.trie->measure(), ref,
                std::span<const Point>(ctx.pivots->pivots[i].points));
            node.hr[i] = HrRange{d, d};
        }
    } else {
        for (auto& child : node.children) annotate_node(ctx, *child);
        node.hr.assign(ctx.pivots->size(),
                       HrRange{std::numeric_limits<double>::infinity(), 0.0});
        for (const auto& child : node.children)
            for (std::size_t i = 0; i < node.hr.size(); ++i) {
                node.hr[i].min = std::min(node.hr[i].min, child->hr[i].min);
                node.hr[i].max = std::max(node.hr[i].max, child->hr[i].max);
            }
    }

    if (real_cell) ctx.path.pop_back();
}

}  // namespace detail

// Bottom-up annotation pass: every leaf gets its pivot distances and the max
// distance from its members to the leaf reference; internal nodes get merged
// pivot ranges over their descendants.
inline void annotate(Trie& trie, const PivotSet& pivots, const MemberLookup& members) {
    if (!pivots.empty() && !is_metric(trie.measure()))
        throw ConfigError("annotate: pivots are unusable without a metric");
    detail::AnnotateContext ctx{&trie, &pivots, &members, {}};
    detail::annotate_node(ctx, trie.root());
}

inline bool equal_structure(const TrieNode& a, const TrieNode& b) {
    if (a.label != b.label || a.tids != b.tids || a.d_max != b.d_max)
        return false;
    if (a.hr.size() != b.hr.size()) return false;
    for (std::size_t i = 0; i < a.hr.size(); ++i)
        if (a.hr[i].min != b.hr[i].min || a.hr[i].max != b.hr[i].max)
            return false;
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!equal_structure(*a.children[i], *b.children[i])) return false;
    return true;
}

inline bool equal_structure(const Trie& a, const Trie& b) {
    return a.measure() == b.measure() && a.grid().level == b.grid().level &&
           equal_structure(a.root(), b.root());
}

}  // namespace reftrie
