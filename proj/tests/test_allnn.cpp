#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rnnq/allnn.hpp"
#include "rnnq/errors.hpp"
#include "rnnq/oracle.hpp"

using namespace rnnq;

TEST_CASE("two points on a line") {
    const PointSet p(1, {0, 1});
    const auto balls = all_nearest_neighbors(p);
    REQUIRE(balls.size() == 2);
    CHECK(balls[0] == EmptyBall{0, 1, 1.0});
    CHECK(balls[1] == EmptyBall{1, 0, 1.0});
}

TEST_CASE("three points on a line") {
    const PointSet p(1, {0, 1, 3});
    const auto balls = all_nearest_neighbors(p);
    CHECK(balls[0].r_sq == 1);
    CHECK(balls[1].r_sq == 1);
    CHECK(balls[2].r_sq == 4);
    CHECK(balls[2].nn == 1);
    CHECK(balls[1].nn == 0);  // tie between 0 and 2 goes to the smaller index
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(all_nearest_neighbors(PointSet(2, {1, 2})), InvalidInput);
    try {
        all_nearest_neighbors(PointSet(2, {0, 0, 5, 5, 1, 1, 5, 5}));
        FAIL("expected DuplicatePoints");
    } catch (const DuplicatePoints& e) {
        CHECK(e.first() == 1);
        CHECK(e.second() == 3);
    }
}

TEST_CASE("matches the quadratic oracle bit-exactly on the corpus") {
    for (corpus::Distribution dist : corpus::all_distributions()) {
        for (int d = 1; d <= 4; ++d) {
            for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                CAPTURE(corpus::to_string(dist));
                CAPTURE(d);
                CAPTURE(seed);
                const auto [pts, t] = normalize(d, corpus::generate(dist, 500, d, seed));
                const auto fast = all_nearest_neighbors(pts);
                const auto serial = all_nearest_neighbors_serial(pts);
                const auto slow = oracle::allnn_brute_force(pts);
                CHECK(fast == slow);
                CHECK(serial == slow);
            }
        }
    }
}

TEST_CASE("radius is the minimum over other points") {
    const auto [pts, t] = normalize(2, corpus::generate(corpus::Distribution::Gaussian, 300, 2, 9));
    const auto balls = all_nearest_neighbors(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double best = INFINITY;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (j != i) best = std::min(best, dist_sq(pts[i], pts[j]));
        }
        CHECK(balls[i].r_sq == best);
        CHECK(dist_sq(pts[i], pts[balls[i].nn]) == best);
    }
}

TEST_CASE("kd partition shape") {
    const PointSet one(2, {1, 1});
    const KdPartition k1(one);
    CHECK(k1.leaf_count() == 1);

    const PointSet two(2, {0, 0, 1, 1});
    const KdPartition k2(two);
    CHECK(k2.leaf_count() == 2);
    CHECK(k2.node_count() == 3);
}

TEST_CASE("kd partition holds every point and answers like a linear scan") {
    const auto [pts, t] = normalize(3, corpus::generate(corpus::Distribution::Uniform, 1000, 3, 4));
    for (int leaf : {1, 8}) {
        const KdPartition kd(pts, leaf);
        std::vector<PointIndex> all;
        for (const auto& l : kd.leaves()) all.insert(all.end(), l.begin(), l.end());
        std::sort(all.begin(), all.end());
        REQUIRE(all.size() == pts.size());
        for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

        for (std::size_t i = 0; i < pts.size(); ++i) {
            NearestResult scan;
            for (std::size_t j = 0; j < pts.size(); ++j) {
                if (j == i) continue;
                const double dj = dist_sq(pts[i], pts[j]);
                if (dj < scan.dist_sq) scan = {static_cast<PointIndex>(j), dj};
            }
            const NearestResult got = kd.nearest(pts[i], static_cast<PointIndex>(i));
            CHECK(got.index == scan.index);
            CHECK(got.dist_sq == scan.dist_sq);
        }
    }
}
