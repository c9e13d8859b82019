#pragma once

// Reverse-nearest-neighbor index: empty balls of all points, a compressed
// quadtree over their h-boxes (boxes of side in [2r, 4r) meeting the ball),
// and per-node candidate lists L(v) = points whose ball meets the cell and
// whose radius exceeds a quarter of the cell side. A query locates the leaf
// holding q and filters that leaf's list with the closed-ball test.

#include <cstdint>
#include <span>
#include <vector>

#include "rnnq/allnn.hpp"
#include "rnnq/geometry.hpp"
#include "rnnq/quadtree.hpp"

namespace rnnq {

inline constexpr std::uint32_t kFormatVersion = 1;

/// Quadtree boxes of side in [2r, 4r) that can hold a point of the closed
/// ball, either exactly or through dist_sq rounding. One or two per axis;
/// product boxes the ball cannot touch are dropped with ball_box_overlap.
/// Throws SpreadTooLarge when the level exceeds kKeyBits - 2.
std::vector<QtBox> boxes_for_ball(std::span<const double> center, double r_sq);

/// Upper bound on |L(v)| for any ordinary node: ceil(2 sqrt d)^d * 2 * 5^d.
std::size_t candidate_bound(int dim);

/// Upper bound on the number of reverse nearest neighbors of any query: 2 * 5^d.
std::size_t answer_bound(int dim);

struct IndexStats {
    std::size_t points = 0;
    int dim = 0;
    std::size_t nodes = 0;
    std::size_t ordinary_internal = 0;
    std::size_t ordinary_leaves = 0;
    std::size_t compressed = 0;
    std::size_t marked = 0;
    std::size_t stored_owners = 0;
    std::size_t total_candidates = 0;
    std::size_t max_candidates = 0;
    double mean_candidates = 0.0;
    int tree_depth = 0;
    int finger_depth = 0;
    std::size_t memory_bytes = 0;
};

struct QueryTrace {
    bool outside_root = false;
    NodeId leaf = kNoNode;
    int finger_visits = 0;
    std::size_t candidates_examined = 0;
};

class RnnIndex {
public:
    RnnIndex() = default;

    /// Builds the index over `points` (row-major, `dim` coordinates each).
    /// Throws InvalidInput, DuplicatePoints or SpreadTooLarge.
    static RnnIndex build(int dim, const std::vector<double>& points);

    int dim() const noexcept { return points_.dim(); }
    std::size_t size() const noexcept { return points_.size(); }
    const Transform& transform() const noexcept { return transform_; }
    const PointSet& points() const noexcept { return points_; }
    const std::vector<EmptyBall>& balls() const noexcept { return balls_; }
    const CompressedQuadtree& tree() const noexcept { return tree_; }
    const FingerTree& finger() const noexcept { return finger_; }

    /// Points whose h-box is exactly the cell of `id`.
    std::span<const PointIndex> owners(NodeId id) const;
    /// L(id), ascending.
    std::span<const PointIndex> candidates(NodeId id) const;

    /// Reverse nearest neighbors of `q` (original coordinates), ascending.
    std::vector<PointIndex> query(std::span<const double> q) const;
    /// Same, for a point already in normalized coordinates.
    std::vector<PointIndex> query_normalized(std::span<const double> y,
                                             QueryTrace* trace = nullptr) const;

    IndexStats stats() const;

    /// Versioned little-endian binary image; deterministic for a given index.
    std::vector<std::uint8_t> serialize() const;
    /// Throws FormatError on malformed input.
    static RnnIndex deserialize(std::span<const std::uint8_t> bytes);

    /// Overwrites L(id). Only for fault-injection in checks.
    void replace_candidates_for_testing(NodeId id, std::vector<PointIndex> list);

private:
    void propagate_candidates();

    Transform transform_;
    PointSet points_;
    std::vector<EmptyBall> balls_;
    CompressedQuadtree tree_;
    FingerTree finger_;
    // CSR per node
    std::vector<std::uint64_t> owner_offsets_;
    std::vector<PointIndex> owner_items_;
    std::vector<std::uint64_t> cand_offsets_;
    std::vector<PointIndex> cand_items_;
};

/// Answers a batch of original-coordinate queries (row-major) on OpenMP
/// workers; results are in input order.
std::vector<std::vector<PointIndex>> query_batch(const RnnIndex& index,
                                                 std::span<const double> queries);

/// Single-threaded reference path of query_batch.
std::vector<std::vector<PointIndex>> query_batch_serial(const RnnIndex& index,
                                                        std::span<const double> queries);

}  // namespace rnnq
