#include <doctest.h>

#include "audit.hpp"
#include "reftrie/search.hpp"
#include "support.hpp"

using namespace reftrie;
namespace ts = testsupport;

namespace {

Trie demo_trie(Measure measure, bool optimize, const PivotSet& pivots,
               const MemberLookup& lookup) {
    const GridConfig g = ts::demo_grid();
    std::vector<ReferenceTrajectory> refs;
    for (const auto& t : ts::demo_dataset())
        refs.push_back(to_reference(t, g, measure));
    Trie trie = optimize ? build_optimized_trie(refs, g)
                         : build_trie(refs, g, measure);
    annotate(trie, pivots, lookup);
    return trie;
}

}  // namespace

TEST_CASE("incremental bound computation on the demo pair") {
    const GridConfig g = ts::demo_grid();
    const auto data = ts::demo_dataset();
    const auto q = ts::demo_query();

    HausdorffState state(q.points.size());
    CHECK(std::max(state.col_max - g.slack, 0.0) == 0.0);  // before any point

    // trajectory 1 sits at cell centers, so its reference points are its own
    // samples and the final two-side bound is exact
    CompLbResult r{};
    const auto ref = to_reference(data[0], g, Measure::hausdorff);
    for (ZValue z : ref.zvals)
        r = comp_lb(q.points, reference_point(z, g), state, g.slack);
    CHECK(r.lb_o == doctest::Approx(2.1213203435596424).epsilon(1e-9));
    CHECK(r.dist_to_ref == doctest::Approx(2.8284271247461903).epsilon(1e-9));
    CHECK(two_side_bound(r.dist_to_ref, 0.0) ==
          doctest::Approx(2.8284271247461903).epsilon(1e-9));
}

TEST_CASE("pivot bound") {
    const std::vector<double> d_qp{3.0, 10.0};

    SUBCASE("degenerate ranges collapse to zero") {
        const std::vector<HrRange> hr{{3.0, 3.0}, {10.0, 10.0}};
        CHECK(pivot_lb(d_qp, hr, 0.5, Measure::hausdorff) == 0.0);
    }
    SUBCASE("far query side") {
        const std::vector<HrRange> hr{{0.0, 1.0}, {0.0, 2.0}};
        // 10 - 2 - 0.5 through the second pivot
        CHECK(pivot_lb(d_qp, hr, 0.5, Measure::frechet) == doctest::Approx(7.5));
    }
    SUBCASE("far node side") {
        const std::vector<HrRange> hr{{9.0, 12.0}, {10.0, 11.0}};
        // 9 - 3 - 0.5 through the first pivot
        CHECK(pivot_lb(d_qp, hr, 0.5, Measure::hausdorff) == doctest::Approx(5.5));
    }
    SUBCASE("rejected without a metric") {
        const std::vector<HrRange> hr{{0.0, 1.0}, {0.0, 1.0}};
        CHECK_THROWS_AS(pivot_lb(d_qp, hr, 0.5, Measure::dtw), ConfigError);
    }
}

TEST_CASE("top-k on the demo index") {
    const auto data = ts::demo_dataset();
    const auto lookup = make_member_lookup(data);
    const auto q = ts::demo_query();

    for (const bool optimize : {false, true}) {
        const Trie trie = demo_trie(Measure::hausdorff, optimize, PivotSet{}, lookup);
        const auto hits = top_k_search(trie, q, 2, PivotSet{}, lookup);
        REQUIRE(hits.size() == 2);
        CHECK(hits[0].id == 1);
        CHECK(hits[0].distance == doctest::Approx(2.83).epsilon(0.01));
        CHECK(hits[1].id == 4);
        CHECK(hits[1].distance == doctest::Approx(3.16).epsilon(0.01));
    }
}

TEST_CASE("k covering the dataset returns the full ranking") {
    const auto data = ts::demo_dataset();
    const auto lookup = make_member_lookup(data);
    const Trie trie = demo_trie(Measure::frechet, false, PivotSet{}, lookup);
    const auto hits = top_k_search(trie, ts::demo_query(), 64, PivotSet{}, lookup);
    REQUIRE(hits.size() == data.size());
    for (std::size_t i = 1; i < hits.size(); ++i)
        CHECK(hits[i - 1].distance <= hits[i].distance);
}

TEST_CASE("search errors") {
    const auto data = ts::demo_dataset();
    const auto lookup = make_member_lookup(data);
    const Trie trie = demo_trie(Measure::hausdorff, false, PivotSet{}, lookup);
    CHECK_THROWS_AS(top_k_search(trie, ts::demo_query(), 0, PivotSet{}, lookup),
                    InputError);
    CHECK_THROWS_AS(top_k_search(trie, Trajectory{1, {}}, 1, PivotSet{}, lookup),
                    InputError);
}

TEST_CASE("search matches the brute-force oracle") {
    ts::TestRng rng(67);
    const auto dataset = rng.dataset(200, 2, 16, 0.0, 40.0);
    const auto lookup = make_member_lookup(dataset);
    BBox box = bbox_of(dataset);
    const GridConfig g = build_grid(box, 1.0);

    for (const Measure measure :
         {Measure::hausdorff, Measure::frechet, Measure::dtw}) {
        const PivotSet pivots =
            is_metric(measure) ? select_pivots(dataset, 5, 10, measure, 77)
                               : PivotSet{};
        std::vector<ReferenceTrajectory> refs;
        for (const auto& t : dataset) refs.push_back(to_reference(t, g, measure));
        Trie trie = (measure == Measure::hausdorff)
                        ? build_optimized_trie(refs, g)
                        : build_trie(refs, g, measure);
        annotate(trie, pivots, lookup);

        for (int qi = 0; qi < 6; ++qi) {
            const auto q = rng.trajectory(1000 + qi, 2, 16, 0.0, 40.0);
            for (const std::size_t k : {std::size_t{1}, std::size_t{5},
                                        std::size_t{10}}) {
                SearchStats stats;
                const auto hits = top_k_search(trie, q, k, pivots, lookup, &stats);
                const auto expected = ts::oracle_top_k(dataset, q, k, measure);
                REQUIRE(hits.size() == expected.size());
                for (std::size_t i = 0; i < hits.size(); ++i) {
                    CHECK(hits[i].id == expected[i].id);
                    CHECK(hits[i].distance ==
                          doctest::Approx(expected[i].distance).epsilon(1e-9));
                }
                CHECK(stats.exact_distances <= dataset.size());
            }
        }
    }
}

TEST_CASE("popped keys never decrease") {
    ts::TestRng rng(71);
    const auto dataset = rng.dataset(80, 2, 12, 0.0, 20.0);
    const auto lookup = make_member_lookup(dataset);
    BBox box = bbox_of(dataset);
    const GridConfig g = build_grid(box, 0.8);

    for (const Measure measure :
         {Measure::hausdorff, Measure::frechet, Measure::dtw}) {
        std::vector<ReferenceTrajectory> refs;
        for (const auto& t : dataset) refs.push_back(to_reference(t, g, measure));
        Trie trie = build_trie(refs, g, measure);
        const PivotSet pivots = is_metric(measure)
                                    ? select_pivots(dataset, 3, 5, measure, 7)
                                    : PivotSet{};
        annotate(trie, pivots, lookup);
        const auto q = rng.trajectory(999, 2, 10, 0.0, 20.0);
        std::vector<double> keys;
        top_k_search(trie, q, 5, pivots, lookup, nullptr, &keys);
        for (std::size_t i = 1; i < keys.size(); ++i)
            CHECK(keys[i] >= keys[i - 1] - 1e-12);
    }
}

TEST_CASE("an exhaustive bound audit finds no violations") {
    ts::TestRng rng(73);
    const auto dataset = rng.dataset(60, 2, 12, 0.0, 25.0);
    const auto lookup = make_member_lookup(dataset);
    BBox box = bbox_of(dataset);
    const GridConfig g = build_grid(box, 1.0);

    for (const Measure measure :
         {Measure::hausdorff, Measure::frechet, Measure::dtw}) {
        const PivotSet pivots = is_metric(measure)
                                    ? select_pivots(dataset, 4, 8, measure, 21)
                                    : PivotSet{};
        std::vector<ReferenceTrajectory> refs;
        for (const auto& t : dataset) refs.push_back(to_reference(t, g, measure));
        Trie trie = build_trie(refs, g, measure);
        annotate(trie, pivots, lookup);

        for (int qi = 0; qi < 4; ++qi) {
            const auto q = rng.trajectory(500 + qi, 2, 12, 0.0, 25.0);
            const auto audit = ts::audit_bounds(trie, q, pivots, lookup);
            INFO(audit.first_violation);
            CHECK(audit.violations == 0);
            CHECK(audit.leaf_pairs == dataset.size());
        }
    }
}
