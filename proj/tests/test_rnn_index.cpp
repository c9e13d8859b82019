#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rnnq/errors.hpp"
#include "rnnq/oracle.hpp"
#include "rnnq/rnn_index.hpp"

using namespace rnnq;

namespace {

QtBox box(int level, std::initializer_list<Key> anchor) {
    QtBox b;
    b.level = level;
    int j = 0;
    for (Key a : anchor) b.anchor[j++] = a;
    return b;
}

bool has_box(const std::vector<QtBox>& v, const QtBox& b) { return std::find(v.begin(), v.end(), b) != v.end(); }

}  // namespace

TEST_CASE("boxes_for_ball examples") {
    const double c1[] = {0.0};
    const auto one = boxes_for_ball(c1, 0.09);
    REQUIRE(one.size() == 2);
    CHECK(has_box(one, box(1, {0})));
    CHECK(has_box(one, box(1, {1})));

    const double c2[] = {0.1, 0.1};
    const auto four = boxes_for_ball(c2, 0.09);
    CHECK(four.size() == 4);
    for (Key a : {0, 1}) {
        for (Key b : {0, 1}) CHECK(has_box(four, box(1, {a, b})));
    }

    // Centered in a level-7 cell (side 1/64 in [2r, 4r)) and clear of its faces.
    const double c3[] = {box(7, {9, 20}).lower(0) + 1.0 / 128, box(7, {9, 20}).lower(1) + 1.0 / 128};
    const double r = 0.006;
    const auto single = boxes_for_ball(c3, r * r);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == box(7, {9, 20}));
}

TEST_CASE("boxes_for_ball covers sampled points of the ball") {
    // Sample the closed ball and check the holding box is returned.
    std::size_t sampled = 0;
    corpus::Rng rng(99);
    for (int t = 0; t < 2000; ++t) {
        const int d = 1 + t % 3;
        double c[3];
        for (int j = 0; j < d; ++j) c[j] = rng.uniform(-0.4, 0.4);
        const double r = std::exp2(rng.uniform(-20, -2));
        const auto boxes = boxes_for_ball(std::span<const double>(c, d), r * r);
        CHECK(boxes.size() >= 1);
        CHECK(boxes.size() <= (1u << d));
        for (const QtBox& b : boxes) CHECK(b.level == level_for_radius_sq(r * r));
        for (int k = 0; k < 20; ++k) {
            double y[3];
            double norm = 0;
            for (int j = 0; j < d; ++j) norm += (y[j] = rng.normal()) * y[j];
            for (int j = 0; j < d; ++j) y[j] = c[j] + y[j] / std::sqrt(norm) * r * rng.uniform();
            if (dist_sq(std::span<const double>(y, d), std::span<const double>(c, d)) > r * r) continue;
            const GridKey g = grid_key(std::span<const double>(y, d));
            const bool found = std::any_of(boxes.begin(), boxes.end(), [&](const QtBox& b) { return b.contains(g, d); });
            CHECK(found);
            ++sampled;
        }
    }
    CHECK(sampled > 1000);
}

TEST_CASE("two points on a line") {
    const auto idx = RnnIndex::build(1, {0, 1});
    REQUIRE(idx.balls().size() == 2);
    const double r_sq = idx.balls()[0].r_sq;
    CHECK(r_sq == idx.balls()[1].r_sq);
    CHECK(std::sqrt(r_sq) == doctest::Approx(0.5));
    const int level = level_for_radius_sq(r_sq);
    for (PointIndex i = 0; i < 2; ++i) {
        bool stored = false;
        for (NodeId id = 0; id < idx.tree().size(); ++id) {
            const auto own = idx.owners(id);
            if (std::find(own.begin(), own.end(), i) != own.end()) {
                stored = true;
                CHECK(idx.tree().node(id).cell.level == level);
            }
        }
        CHECK(stored);
    }
    const double q0[] = {0.0};
    CHECK(idx.query(q0) == std::vector<PointIndex>{0, 1});
    const double far[] = {100.0};
    CHECK(idx.query(far).empty());
}

TEST_CASE("square corners") {
    const auto idx = RnnIndex::build(2, {0, 0, 1, 0, 0, 1, 1, 1});
    for (const EmptyBall& b : idx.balls()) CHECK(b.r_sq == idx.balls()[0].r_sq);
    const double center[] = {0.5, 0.5};
    CHECK(idx.query(center) == std::vector<PointIndex>{0, 1, 2, 3});
    CHECK(oracle::candidate_semantics_check(idx).passed());
}

TEST_CASE("single point") {
    const auto idx = RnnIndex::build(3, {1, 2, 3});
    const auto s = idx.stats();
    CHECK(s.nodes == 1);
    CHECK(s.total_candidates == 0);
    const double q[] = {1e9, -4, 0};
    CHECK(idx.query(q) == std::vector<PointIndex>{0});
    CHECK(oracle::candidate_semantics_check(idx).passed());
}

TEST_CASE("build errors") {
    CHECK_THROWS_AS(RnnIndex::build(2, {0, 0, 1, 1, 0, 0}), DuplicatePoints);
    CHECK_THROWS_AS(RnnIndex::build(1, {0, 1e-15, 1}), SpreadTooLarge);
    CHECK_THROWS_AS(RnnIndex::build(9, std::vector<double>(18, 0.0)), InvalidInput);
    CHECK_THROWS_AS(RnnIndex::build(2, {0, NAN, 1, 1}), InvalidInput);
}

TEST_CASE("root list holds exactly the points with r > 1/2") {
    const auto idx = RnnIndex::build(2, corpus::generate(corpus::Distribution::Uniform, 3, 2, 5));
    std::vector<PointIndex> want;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx.balls()[i].r_sq > 0.25) want.push_back(static_cast<PointIndex>(i));
    }
    const auto root = idx.candidates(0);
    CHECK(std::vector<PointIndex>(root.begin(), root.end()) == want);
}

TEST_CASE("queries match the oracle on the corpus") {
    for (corpus::Distribution dist : corpus::all_distributions()) {
        for (int d = 1; d <= 3; ++d) {
            for (std::size_t n : {2, 7, 150}) {
                CAPTURE(corpus::to_string(dist));
                CAPTURE(d);
                CAPTURE(n);
                const auto idx = RnnIndex::build(d, corpus::generate(dist, n, d, n + d));
                const auto probes = oracle::probe_queries(idx.points(), idx.balls(), 200, 3);
                for (std::size_t k = 0; k < 200; ++k) {
                    const auto y = std::span<const double>(probes).subspan(k * d, d);
                    CHECK(idx.query_normalized(y) == oracle::rnn_brute_force(idx.points(), y));
                }
                CHECK(oracle::candidate_semantics_check(idx).passed());
            }
        }
    }
}

TEST_CASE("data points are reverse nearest neighbors of their own location") {
    const auto raw = corpus::generate(corpus::Distribution::Grid, 200, 2, 1);
    const auto idx = RnnIndex::build(2, raw);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto res = idx.query(std::span<const double>(raw).subspan(i * 2, 2));
        CHECK(std::binary_search(res.begin(), res.end(), static_cast<PointIndex>(i)));
        // Points whose nearest neighbor is i are also there.
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (j != i && dist_sq(idx.points()[j], idx.points()[i]) == idx.balls()[j].r_sq) {
                CHECK(std::binary_search(res.begin(), res.end(), static_cast<PointIndex>(j)));
            }
        }
    }
}

TEST_CASE("parallel and serial batches agree") {
    const auto raw = corpus::generate(corpus::Distribution::Gaussian, 2000, 2, 8);
    const auto idx = RnnIndex::build(2, raw);
    corpus::Rng rng(4);
    std::vector<double> qs(4000);
    for (double& v : qs) v = rng.uniform(-10, 1010);
    const auto a = query_batch(idx, qs);
    const auto b = query_batch_serial(idx, qs);
    CHECK(a == b);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto y = idx.transform().apply(std::span<const double>(qs).subspan(k * 2, 2));
        CHECK(a[k] == oracle::rnn_brute_force(idx.points(), idx.balls(), y));
    }
}

TEST_CASE("stats") {
    const auto idx = RnnIndex::build(2, corpus::generate(corpus::Distribution::Uniform, 1000, 2, 2));
    const IndexStats s = idx.stats();
    CHECK(s.points == 1000);
    CHECK(s.nodes == idx.tree().size());
    CHECK(s.ordinary_internal + s.ordinary_leaves + s.compressed == s.nodes);
    CHECK(s.max_candidates <= candidate_bound(2));
    CHECK(s.nodes <= 4 * 4 * 1000 + 1);
    CHECK(s.finger_depth <= 2 * std::log2(static_cast<double>(s.nodes)) + 4);
    CHECK(s.memory_bytes > 0);
}

TEST_CASE("bounds") {
    CHECK(candidate_bound(1) == 20);
    CHECK(candidate_bound(2) == 450);
    CHECK(answer_bound(1) == 10);
    CHECK(answer_bound(2) == 50);
    CHECK(answer_bound(3) == 250);
}

TEST_CASE("serialization round trip is byte exact") {
    for (std::size_t n : {1, 2, 500}) {
        const auto idx = RnnIndex::build(3, corpus::generate(corpus::Distribution::TwoScale, n, 3, 6));
        const auto bytes = idx.serialize();
        const auto back = RnnIndex::deserialize(bytes);
        CHECK(back.serialize() == bytes);
        CHECK(RnnIndex::build(3, corpus::generate(corpus::Distribution::TwoScale, n, 3, 6)).serialize() == bytes);
        const double q[] = {0.3, 0.4, 0.5};
        CHECK(back.query(q) == idx.query(q));
    }
}

TEST_CASE("deserialize rejects damaged images") {
    const auto bytes = RnnIndex::build(2, corpus::generate(corpus::Distribution::Uniform, 50, 2, 1)).serialize();
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(RnnIndex::deserialize(bad), FormatError);
    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(RnnIndex::deserialize(bad), FormatError);
    for (std::size_t cut : {std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
        CHECK_THROWS_AS(RnnIndex::deserialize(std::span(bytes).first(cut)), FormatError);
    }
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(RnnIndex::deserialize(bad), FormatError);
    // Flipping bytes never crashes; it either throws FormatError or yields some index.
    corpus::Rng rng(77);
    for (int t = 0; t < 300; ++t) {
        bad = bytes;
        bad[rng.below(bad.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
        try {
            RnnIndex::deserialize(bad);
        } catch (const FormatError&) {
        }
    }
}
