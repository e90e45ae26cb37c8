#pragma once

// Test-only instrumentation: walks an annotated trie with the incremental
// bound machinery and checks every bound against exact distances computed
// for all descendant members, including the subtrees a real search would
// prune.

#include <limits>
#include <span>
#include <string>

#include "reftrie/search.hpp"
#include "reftrie/trie.hpp"

namespace testsupport {

struct AuditResult {
    std::uint64_t nodes = 0;
    std::uint64_t leaf_pairs = 0;  // (query, member) pairs checked
    std::uint64_t violations = 0;
    std::string first_violation;
};

namespace audit_detail {

inline void flag(AuditResult& out, const std::string& what) {
    ++out.violations;
    if (out.first_violation.empty()) out.first_violation = what;
}

template <typename Policy>
double walk(const reftrie::Trie& trie, const reftrie::TrieNode& node,
            const reftrie::Trajectory& q, const typename Policy::State& state,
            double lb_o, double dist_to_ref, double parent_lb_o,
            std::span<const double> d_qp, const reftrie::MemberLookup& members,
            double tol, AuditResult& out) {
    ++out.nodes;
    const double slack = trie.grid().slack;

    double min_exact = std::numeric_limits<double>::infinity();
    double min_leaf_exact = std::numeric_limits<double>::infinity();
    if (!node.tids.empty()) {
        for (reftrie::TrajectoryId tid : node.tids) {
            const double d = Policy::exact(q.points, *members.at(tid));
            min_leaf_exact = std::min(min_leaf_exact, d);
            ++out.leaf_pairs;
        }
        min_exact = min_leaf_exact;
    }
    for (const auto& child : node.children) {
        double c_lb_o = lb_o, c_dist = dist_to_ref;
        typename Policy::State child_state = state;
        if (child->label < trie.terminator()) {
            const reftrie::BoundPair bp =
                Policy::extend(child_state, q.points, trie, child->label);
            c_lb_o = bp.lb_o;
            c_dist = bp.dist_to_ref;
        }
        min_exact = std::min(
            min_exact, walk<Policy>(trie, *child, q, child_state, c_lb_o, c_dist,
                                    lb_o, d_qp, members, tol, out));
    }

    if (lb_o > min_exact + tol) flag(out, "one-side bound above exact distance");
    if (lb_o + 1e-12 < parent_lb_o)
        flag(out, "one-side bound decreased along a path");
    if (!d_qp.empty() && !node.hr.empty()) {
        const double lb_p =
            reftrie::pivot_lb(d_qp, node.hr, slack, trie.measure());
        if (lb_p > min_exact + tol) flag(out, "pivot bound above exact distance");
    }
    if (!node.tids.empty()) {
        const double lb_t = Policy::leaf_bound(dist_to_ref, node.d_max, slack);
        if (lb_t > min_leaf_exact + tol)
            flag(out, "two-side bound above exact distance");
    }
    return min_exact;
}

}  // namespace audit_detail

inline AuditResult audit_bounds(const reftrie::Trie& trie,
                                const reftrie::Trajectory& q,
                                const reftrie::PivotSet& pivots,
                                const reftrie::MemberLookup& members,
                                double tol = 1e-9) {
    AuditResult out;
    const std::vector<double> d_qp =
        reftrie::is_metric(trie.measure()) && !pivots.empty()
            ? reftrie::query_pivot_distances(q, pivots, trie.measure())
            : std::vector<double>{};
    const auto run = [&](auto policy) {
        using Policy = decltype(policy);
        typename Policy::State root_state = Policy::init(q.points.size());
        for (const auto& child : trie.root().children) {
            typename Policy::State state = root_state;
            double lb_o = 0.0, dist = 0.0;
            if (child->label < trie.terminator()) {
                const reftrie::BoundPair bp =
                    Policy::extend(state, q.points, trie, child->label);
                lb_o = bp.lb_o;
                dist = bp.dist_to_ref;
            }
            audit_detail::walk<Policy>(trie, *child, q, state, lb_o, dist, 0.0,
                                       d_qp, members, tol, out);
        }
    };
    switch (trie.measure()) {
        case reftrie::Measure::hausdorff:
            run(reftrie::detail::HausdorffSearchPolicy{});
            break;
        case reftrie::Measure::frechet:
            run(reftrie::detail::FrechetSearchPolicy{});
            break;
        case reftrie::Measure::dtw:
            run(reftrie::detail::DtwSearchPolicy{});
            break;
    }
    return out;
}

}  // namespace testsupport
