#include "rnnq/allnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rnnq/errors.hpp"

namespace rnnq {

KdPartition::KdPartition(const PointSet& points, int leaf_size)
    : points_(&points), dim_(points.dim()), leaf_size_(std::max(leaf_size, 1)) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), PointIndex{0});
    if (!order_.empty()) {
        nodes_.reserve(2 * order_.size() / leaf_size_ + 1);
        build(0, static_cast<std::uint32_t>(order_.size()));
    }
}

std::int32_t KdPartition::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end, -1, -1});
    box_lo_.resize(nodes_.size() * dim_, INFINITY);
    box_hi_.resize(nodes_.size() * dim_, -INFINITY);

    double* lo = &box_lo_[id * dim_];
    double* hi = &box_hi_[id * dim_];
    for (std::uint32_t i = begin; i < end; ++i) {
        const auto p = (*points_)[order_[i]];
        for (int j = 0; j < dim_; ++j) {
            lo[j] = std::min(lo[j], p[j]);
            hi[j] = std::max(hi[j], p[j]);
        }
    }
    if (end - begin <= static_cast<std::uint32_t>(leaf_size_)) return id;

    int axis = 0;
    for (int j = 1; j < dim_; ++j) {
        if (hi[j] - lo[j] > hi[axis] - lo[axis]) axis = j;
    }
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](PointIndex a, PointIndex b) {
                         const double ca = (*points_)[a][axis];
                         const double cb = (*points_)[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

std::size_t KdPartition::leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.left < 0; }));
}

std::vector<std::vector<PointIndex>> KdPartition::leaves() const {
    std::vector<std::vector<PointIndex>> out;
    for (const Node& n : nodes_) {
        if (n.left < 0) out.emplace_back(order_.begin() + n.begin, order_.begin() + n.end);
    }
    return out;
}

double KdPartition::lower_bound(std::int32_t node, std::span<const double> q) const {
    const double* lo = &box_lo_[node * dim_];
    const double* hi = &box_hi_[node * dim_];
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) {
        const double c = std::clamp(q[j], lo[j], hi[j]);
        const double t = q[j] - c;
        s += t * t;
    }
    return s;
}

void KdPartition::search(std::int32_t node, std::span<const double> q, PointIndex exclude,
                         NearestResult& best) const {
    const Node& n = nodes_[node];
    if (n.left < 0) {
        for (std::uint32_t i = n.begin; i < n.end; ++i) {
            const PointIndex idx = order_[i];
            if (idx == exclude) continue;
            const double d = dist_sq(q, (*points_)[idx]);
            if (d < best.dist_sq || (d == best.dist_sq && idx < best.index)) {
                best = {idx, d};
            }
        }
        return;
    }
    std::int32_t first = n.left;
    std::int32_t second = n.right;
    double lb_first = lower_bound(first, q);
    double lb_second = lower_bound(second, q);
    if (lb_second < lb_first) {
        std::swap(first, second);
        std::swap(lb_first, lb_second);
    }
    // Equal bounds must still be visited: they may hold a lower-index tie.
    if (lb_first <= best.dist_sq) search(first, q, exclude, best);
    if (lb_second <= best.dist_sq) search(second, q, exclude, best);
}

NearestResult KdPartition::nearest(std::span<const double> q, PointIndex exclude) const {
    NearestResult best;
    if (!nodes_.empty()) search(0, q, exclude, best);
    return best;
}

namespace {

void require_pairs(const PointSet& points) {
    if (points.size() < 2) {
        throw InvalidInput("all-nearest-neighbors needs at least two points");
    }
}

void reject_duplicates(const std::vector<EmptyBall>& balls) {
    for (const EmptyBall& b : balls) {
        if (b.r_sq == 0.0) {
            throw DuplicatePoints(std::min(b.owner, b.nn), std::max(b.owner, b.nn));
        }
    }
}

}  // namespace

std::vector<EmptyBall> all_nearest_neighbors(const PointSet& points) {
    require_pairs(points);
    const KdPartition kd(points);
    const auto n = static_cast<std::int64_t>(points.size());
    std::vector<EmptyBall> balls(points.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto owner = static_cast<PointIndex>(i);
        const NearestResult r = kd.nearest(points[owner], owner);
        balls[i] = {owner, r.index, r.dist_sq};
    }
    reject_duplicates(balls);
    return balls;
}

std::vector<EmptyBall> all_nearest_neighbors_serial(const PointSet& points) {
    require_pairs(points);
    const KdPartition kd(points);
    std::vector<EmptyBall> balls(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto owner = static_cast<PointIndex>(i);
        const NearestResult r = kd.nearest(points[owner], owner);
        balls[i] = {owner, r.index, r.dist_sq};
    }
    reject_duplicates(balls);
    return balls;
}

}  // namespace rnnq
