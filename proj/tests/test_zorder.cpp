#include <doctest.h>

#include <algorithm>
#include <random>

#include "reftrie/zorder.hpp"
#include "support.hpp"

using namespace reftrie;

TEST_CASE("interleave goldens") {
    CHECK(interleave(0b010, 0b101, 3) == 0b011001);
    CHECK(interleave(0, 0, 3) == 0);
    CHECK(interleave(0, 0, 0) == 0);
    CHECK(interleave(0b100, 0b110, 3) == 0b110100);
}

TEST_CASE("exhaustive round trip up to 6 bits per axis") {
    for (std::uint32_t p = 0; p <= 6; ++p) {
        const std::uint32_t side = 1u << p;
        for (std::uint32_t col = 0; col < side; ++col)
            for (std::uint32_t row = 0; row < side; ++row) {
                const ZValue z = interleave(col, row, p);
                CHECK(z < static_cast<ZValue>(side) * side);
                const CellCoords c = deinterleave(z, p);
                REQUIRE(c.col == col);
                REQUIRE(c.row == row);
            }
    }
}

TEST_CASE("cell_of and reference_point on the demo grid") {
    const GridConfig g = testsupport::demo_grid();

    CHECK(cell_of({2.5, 0.5}, g) == 0b001000);
    CHECK(cell_of({0.5, 2.5}, g) == 0b000100);
    CHECK(cell_of({0.0, 0.0}, g) == 0);

    const Point p1 = reference_point(0b001000, g);
    CHECK(p1.x == doctest::Approx(2.5));
    CHECK(p1.y == doctest::Approx(0.5));
    const Point p0 = reference_point(0, g);
    CHECK(p0.x == doctest::Approx(0.5));
    CHECK(p0.y == doctest::Approx(0.5));
    const Point p2 = reference_point(0b011001, g);
    CHECK(p2.x == doctest::Approx(2.5));
    CHECK(p2.y == doctest::Approx(5.5));

    CHECK_THROWS_AS(reference_point(g.cell_count(), g), InternalError);

    // out-of-region points clamp to edge cells
    CHECK(cell_of({-5.0, -5.0}, g) == 0);
    CHECK(cell_of({100.0, 0.2}, g) == interleave(7, 0, 3));
}

TEST_CASE("to_reference forms") {
    const GridConfig g = testsupport::demo_grid();
    const auto dataset = testsupport::demo_dataset();

    SUBCASE("order-free form deduplicates into ascending order") {
        const auto& t5 = dataset[4];
        const ReferenceTrajectory ref = to_reference(t5, g, Measure::hausdorff);
        const std::vector<ZValue> expected{0b000010, 0b000100, 0b001000,
                                           0b010001, 0b011001};
        CHECK(ref.zvals == expected);
    }
    SUBCASE("order-sensitive form keeps one cell per point") {
        const Trajectory q = testsupport::demo_query();
        const ReferenceTrajectory ref = to_reference(q, g, Measure::frechet);
        const std::vector<ZValue> expected{0b010100, 0b011100, 0b110100};
        CHECK(ref.zvals == expected);

        Trajectory dup{9, {{0.5, 0.5}, {0.6, 0.6}, {2.5, 0.5}}};
        const ReferenceTrajectory r2 = to_reference(dup, g, Measure::dtw);
        CHECK(r2.zvals.size() == dup.points.size());
        CHECK(r2.zvals[0] == r2.zvals[1]);
    }
    SUBCASE("single point trajectory becomes a singleton set") {
        Trajectory one{7, {{3.3, 3.3}}};
        const ReferenceTrajectory ref = to_reference(one, g, Measure::hausdorff);
        CHECK(ref.zvals.size() == 1);
    }
}

TEST_CASE("every in-region point is within half a diagonal of its center") {
    const GridConfig g = testsupport::demo_grid();
    testsupport::TestRng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const Point p = rng.point(0.0, 8.0);
        const Point center = reference_point(cell_of(p, g), g);
        CHECK(euclid(p, center) <= g.slack + 1e-9);
    }
}

TEST_CASE("order-free reference is permutation invariant") {
    const GridConfig g = testsupport::demo_grid();
    testsupport::TestRng rng(19);
    for (int i = 0; i < 50; ++i) {
        Trajectory t = rng.trajectory(0, 3, 12, 0.0, 8.0);
        const auto ref = to_reference(t, g, Measure::hausdorff);
        std::mt19937_64 shuffler(i);
        for (std::size_t j = t.points.size(); j > 1; --j)
            std::swap(t.points[j - 1], t.points[shuffler() % j]);
        const auto shuffled = to_reference(t, g, Measure::hausdorff);
        CHECK(ref.zvals == shuffled.zvals);
    }
}
