#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rnnq/geometry.hpp"

namespace rnnq {

using PointIndex = std::uint32_t;

/// Largest closed ball centered at `owner` with no other input point inside.
struct EmptyBall {
    PointIndex owner = 0;
    PointIndex nn = 0;
    double r_sq = 0.0;

    bool operator==(const EmptyBall&) const = default;
};

struct NearestResult {
    PointIndex index = std::numeric_limits<PointIndex>::max();
    double dist_sq = std::numeric_limits<double>::infinity();
};

/// Median-split hierarchical partition with exact pruned nearest-neighbor
/// search. Pruning compares bounding-box lower bounds computed through the
/// same rounding steps as dist_sq, so it never discards an exact minimum or
/// a lower-index tie.
class KdPartition {
public:
    explicit KdPartition(const PointSet& points, int leaf_size = 1);

    /// Nearest input point to `q` other than `exclude`; ties go to the smaller index.
    NearestResult nearest(std::span<const double> q,
                          PointIndex exclude = std::numeric_limits<PointIndex>::max()) const;

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t leaf_count() const noexcept;
    /// Point indices stored in each leaf, leaves in tree order.
    std::vector<std::vector<PointIndex>> leaves() const;

private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    double lower_bound(std::int32_t node, std::span<const double> q) const;
    void search(std::int32_t node, std::span<const double> q, PointIndex exclude,
                NearestResult& best) const;

    const PointSet* points_;
    int dim_;
    int leaf_size_;
    std::vector<PointIndex> order_;
    std::vector<Node> nodes_;
    std::vector<double> box_lo_;
    std::vector<double> box_hi_;
};

/// Exact nearest other point and squared empty-ball radius for every point.
/// Per-point searches run on OpenMP workers. Throws DuplicatePoints (lowest
/// offending owner) or InvalidInput for n < 2.
std::vector<EmptyBall> all_nearest_neighbors(const PointSet& points);

/// Single-threaded reference path of all_nearest_neighbors.
std::vector<EmptyBall> all_nearest_neighbors_serial(const PointSet& points);

}  // namespace rnnq
