#include <doctest.h>

#include "reftrie/core.hpp"
#include "reftrie/grid.hpp"
#include "reftrie/zorder.hpp"
#include "support.hpp"

using namespace reftrie;

TEST_CASE("euclid basics") {
    CHECK(euclid({0, 0}, {3, 4}) == doctest::Approx(5.0));
    CHECK(euclid({1.5, 0.5}, {1.5, 0.5}) == 0.0);
    // the binding pair of the demo query against trajectory 1
    CHECK(euclid({6.5, 4.5}, {4.5, 6.5}) ==
          doctest::Approx(2.8284271247461903).epsilon(1e-12));
    CHECK(euclid({1, 2}, {-3, 7}) == doctest::Approx(euclid({-3, 7}, {1, 2})));
}

TEST_CASE("build_grid goldens") {
    BBox box{0, 0, 8, 8};

    SUBCASE("unit grid over the demo region") {
        const GridConfig g = build_grid(box, 1.0, 0.0);
        CHECK(g.side_u == 8.0);
        CHECK(g.level == 8);
        CHECK(g.bits_per_axis == 3);
        CHECK(g.cell_size == 1.0);
        CHECK(g.origin.x == 0.0);
        CHECK(g.origin.y == 0.0);
        CHECK(g.slack == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    }
    SUBCASE("coarsest grid is a single cell") {
        const GridConfig g = build_grid(box, 8.0, 0.0);
        CHECK(g.level == 1);
        CHECK(g.cell_size == 8.0);
    }
    SUBCASE("cell count rounds up to a power of two") {
        BBox big{0, 0, 10, 10};
        const GridConfig g = build_grid(big, 0.15, 0.0);
        CHECK(g.level == 128);
        CHECK(g.cell_size == doctest::Approx(0.078125).epsilon(1e-15));
    }
}

TEST_CASE("build_grid padding and degenerate boxes") {
    BBox box{0, 0, 8, 8};
    const GridConfig g = build_grid(box, 1.0);
    CHECK(g.origin.x < 0.0);
    CHECK(g.side_u > 8.0);
    CHECK(g.cell_size <= 1.0);

    BBox point_box{3, 3, 3, 3};
    const GridConfig d = build_grid(point_box, 0.5, 0.0);
    CHECK(d.side_u == 0.5);
    CHECK(d.level == 1);

    BBox line_box{0, 2, 4, 2};  // zero height
    const GridConfig l = build_grid(line_box, 1.0, 0.0);
    CHECK(l.side_u == 4.0);
    CHECK(l.level == 4);
}

TEST_CASE("build_grid errors and determinism") {
    BBox box{0, 0, 8, 8};
    CHECK_THROWS_AS(build_grid(box, 0.0), ConfigError);
    CHECK_THROWS_AS(build_grid(box, -1.0), ConfigError);

    const GridConfig a = build_grid(box, 0.3);
    const GridConfig b = build_grid(box, 0.3);
    CHECK(a.origin.x == b.origin.x);
    CHECK(a.side_u == b.side_u);
    CHECK(a.level == b.level);
    CHECK(a.cell_size == b.cell_size);
}

TEST_CASE("grid invariants over random boxes") {
    testsupport::TestRng rng(7);
    for (int i = 0; i < 100; ++i) {
        BBox box;
        box.expand(rng.point(-50, 50));
        box.expand(rng.point(-50, 50));
        const double delta = rng.uniform(0.01, 10.0);
        const GridConfig g = build_grid(box, delta);
        CHECK(g.cell_size <= delta);
        CHECK(g.cell_size * g.level == g.side_u);
        CHECK(std::abs(g.slack - std::sqrt(2.0) * g.cell_size / 2.0) <= 1e-12);
        CHECK((g.level & (g.level - 1)) == 0);
    }
}

TEST_CASE("min_dist_point_cell") {
    const GridConfig g = testsupport::demo_grid();
    const ZValue origin_cell = 0;  // square [0,1] x [0,1]

    CHECK(min_dist_point_cell({0.5, 0.5}, origin_cell, g) == 0.0);
    CHECK(min_dist_point_cell({1.0, 1.0}, origin_cell, g) == 0.0);  // boundary
    CHECK(min_dist_point_cell({3, 3}, origin_cell, g) ==
          doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
    CHECK(min_dist_point_cell({0.5, 3}, origin_cell, g) == doctest::Approx(2.0));
    CHECK_THROWS_AS(min_dist_point_cell({0, 0}, g.cell_count(), g), InternalError);
}

TEST_CASE("cell distance sandwiches the center distance") {
    const GridConfig g = testsupport::demo_grid();
    testsupport::TestRng rng(13);
    for (int i = 0; i < 500; ++i) {
        const Point q = rng.point(-2, 10);
        const ZValue c = static_cast<ZValue>(rng.below(g.cell_count()));
        const double lo = min_dist_point_cell(q, c, g);
        const double center = euclid(q, reference_point(c, g));
        CHECK(lo <= center + 1e-12);
        CHECK(center <= lo + 2.0 * g.slack + 1e-12);
    }
}
