#include "rnnq/rnn_index.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "rnnq/errors.hpp"
#include "rnnq/exact.hpp"

namespace rnnq {

namespace {

// Radius slack covering both the rounding of sqrt and the rounding inside dist_sq.
constexpr double kReachSlack = 0x1p-45;
constexpr double kFilterSlack = 0x1p-40;

// Exact squared distance from `c` to the coordinate `edge` compared with r_sq,
// decided in floating point when far from tangency.
int sq_gap_sign(double c, double edge, double r_sq) {
    const double t = edge - c;
    const double g = t * t;
    if (g < r_sq * (1.0 - kFilterSlack)) return -1;
    if (g > r_sq * (1.0 + kFilterSlack)) return 1;
    return exact::compare_sq_diff(edge, c, r_sq);
}

// Can any coordinate in [.., edge) (edge excluded) be within r of c on this axis?
bool reaches_below(double c, double edge, double r_sq) {
    const double x = std::nextafter(edge, -INFINITY);
    const double t = x - c;
    if (t * t <= r_sq) return true;
    return sq_gap_sign(c, edge, r_sq) < 0;
}

// Can any coordinate in [edge, ..) be within r of c on this axis?
bool reaches_above(double c, double edge, double r_sq) {
    const double t = edge - c;
    if (t * t <= r_sq) return true;
    return sq_gap_sign(c, edge, r_sq) <= 0;
}

double step_out(double v, double toward, int ulps) {
    for (int i = 0; i < ulps; ++i) v = std::nextafter(v, toward);
    return v;
}

}  // namespace

std::vector<QtBox> boxes_for_ball(std::span<const double> center, double r_sq) {
    const int dim = static_cast<int>(center.size());
    const int level = level_for_radius_sq(r_sq);
    const int shift = kKeyBits - level;
    const double reach = std::sqrt(r_sq) * (1.0 + kReachSlack);

    std::array<Key, kMaxDim> lo{}, hi{};
    for (int j = 0; j < dim; ++j) {
        const double c = center[j];
        Key a = coord_key(step_out(c - reach, -INFINITY, 2)) >> shift;
        Key b = coord_key(step_out(c + reach, INFINITY, 2)) >> shift;
        const Key own = coord_key(c) >> shift;
        const auto edge = [level](Key cell) {
            return std::ldexp(static_cast<double>(cell), 1 - level) - 1.0;
        };
        while (a < own && !reaches_below(c, edge(a + 1), r_sq)) ++a;
        while (b > own && !reaches_above(c, edge(b), r_sq)) --b;
        lo[j] = a;
        hi[j] = b;
    }

    std::vector<QtBox> out;
    QtBox box;
    box.level = level;
    for (int j = 0; j < dim; ++j) box.anchor[j] = lo[j];
    for (;;) {
        if (ball_box_overlap(center, r_sq, box)) out.push_back(box);
        int j = 0;
        while (j < dim && box.anchor[j] == hi[j]) {
            box.anchor[j] = lo[j];
            ++j;
        }
        if (j == dim) break;
        ++box.anchor[j];
    }
    return out;
}

std::size_t candidate_bound(int dim) {
    const auto cover = static_cast<std::size_t>(std::ceil(2.0 * std::sqrt(static_cast<double>(dim))));
    std::size_t bound = 2;
    for (int i = 0; i < dim; ++i) bound *= cover * 5;
    return bound;
}

std::size_t answer_bound(int dim) {
    std::size_t bound = 2;
    for (int i = 0; i < dim; ++i) bound *= 5;
    return bound;
}

RnnIndex RnnIndex::build(int dim, const std::vector<double>& coords) {
    RnnIndex idx;
    auto [points, transform] = normalize(dim, coords);
    idx.points_ = std::move(points);
    idx.transform_ = std::move(transform);
    const std::size_t n = idx.points_.size();

    std::vector<QtBox> boxes{root_box()};
    std::vector<std::vector<QtBox>> per_ball;
    if (n >= 2) {
        idx.balls_ = all_nearest_neighbors(idx.points_);
        // Level errors surface here, in index order, before the parallel pass.
        for (const EmptyBall& b : idx.balls_) level_for_radius_sq(b.r_sq);

        per_ball.resize(n);
        const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 256)
        for (std::int64_t i = 0; i < count; ++i) {
            per_ball[i] = boxes_for_ball(idx.points_[i], idx.balls_[i].r_sq);
        }
        for (const auto& list : per_ball) boxes.insert(boxes.end(), list.begin(), list.end());
    }

    idx.tree_ = CompressedQuadtree::build(dim, boxes);

    std::vector<std::pair<NodeId, PointIndex>> stored;
    for (std::size_t i = 0; i < per_ball.size(); ++i) {
        for (const QtBox& b : per_ball[i]) {
            stored.emplace_back(*idx.tree_.find_marked(b), static_cast<PointIndex>(i));
        }
    }
    std::sort(stored.begin(), stored.end());
    idx.owner_offsets_.assign(idx.tree_.size() + 1, 0);
    idx.owner_items_.reserve(stored.size());
    for (const auto& [node, point] : stored) {
        ++idx.owner_offsets_[node + 1];
        idx.owner_items_.push_back(point);
    }
    for (std::size_t i = 1; i < idx.owner_offsets_.size(); ++i) {
        idx.owner_offsets_[i] += idx.owner_offsets_[i - 1];
    }

    idx.propagate_candidates();
    idx.finger_ = FingerTree::build(idx.tree_);
    return idx;
}

void RnnIndex::propagate_candidates() {
    const std::size_t m = tree_.size();
    cand_offsets_.assign(1, 0);
    cand_items_.clear();
    std::vector<PointIndex> list;
    // Parents precede children in the arena.
    for (NodeId id = 0; id < m; ++id) {
        const QtNode& node = tree_.node(id);
        const auto own = owners(id);
        list.assign(own.begin(), own.end());
        if (node.parent != kNoNode) {
            const std::uint64_t begin = cand_offsets_[node.parent];
            const std::uint64_t end = cand_offsets_[node.parent + 1];
            for (std::uint64_t k = begin; k < end; ++k) {
                const PointIndex i = cand_items_[k];
                if (node.kind == NodeKind::Compressed ||
                    ball_box_overlap(points_[i], balls_[i].r_sq, node.cell)) {
                    list.push_back(i);
                }
            }
        }
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        cand_items_.insert(cand_items_.end(), list.begin(), list.end());
        cand_offsets_.push_back(cand_items_.size());
    }
}

std::span<const PointIndex> RnnIndex::owners(NodeId id) const {
    return std::span(owner_items_).subspan(owner_offsets_[id], owner_offsets_[id + 1] - owner_offsets_[id]);
}

std::span<const PointIndex> RnnIndex::candidates(NodeId id) const {
    return std::span(cand_items_).subspan(cand_offsets_[id], cand_offsets_[id + 1] - cand_offsets_[id]);
}

std::vector<PointIndex> RnnIndex::query(std::span<const double> q) const {
    std::array<double, kMaxDim> y{};
    const auto ys = std::span(y).first(static_cast<std::size_t>(dim()));
    transform_.apply(q, ys);
    return query_normalized(ys);
}

std::vector<PointIndex> RnnIndex::query_normalized(std::span<const double> y, QueryTrace* trace) const {
    std::vector<PointIndex> out;
    if (size() == 1) {
        // The lone point's nearest neighbor in P + {q} is always q.
        out.push_back(0);
        return out;
    }
    if (!in_root_cell(y)) {
        if (trace) trace->outside_root = true;
        return out;
    }
    int visits = 0;
    const NodeId leaf = finger_.locate(tree_, grid_key(y), &visits);
    const auto list = candidates(leaf);
    for (PointIndex i : list) {
        if (dist_sq(y, points_[i]) <= balls_[i].r_sq) out.push_back(i);
    }
    if (trace) {
        trace->leaf = leaf;
        trace->finger_visits = visits;
        trace->candidates_examined = list.size();
    }
    return out;
}

IndexStats RnnIndex::stats() const {
    IndexStats s;
    s.points = size();
    s.dim = dim();
    s.nodes = tree_.size();
    for (NodeId id = 0; id < tree_.size(); ++id) {
        const QtNode& v = tree_.node(id);
        if (v.kind == NodeKind::Compressed) {
            ++s.compressed;
        } else if (v.is_leaf()) {
            ++s.ordinary_leaves;
        } else {
            ++s.ordinary_internal;
        }
        if (v.marked) ++s.marked;
        s.max_candidates = std::max(s.max_candidates, candidates(id).size());
    }
    s.stored_owners = owner_items_.size();
    s.total_candidates = cand_items_.size();
    s.mean_candidates = s.nodes ? static_cast<double>(s.total_candidates) / s.nodes : 0.0;
    s.tree_depth = tree_.depth();
    s.finger_depth = finger_.depth();
    s.memory_bytes = points_.coords().size() * sizeof(double) + balls_.size() * sizeof(EmptyBall) +
                     tree_.size() * sizeof(QtNode) + finger_.nodes().size() * sizeof(FingerNode) +
                     finger_.links().size() * sizeof(std::int32_t) +
                     (owner_offsets_.size() + cand_offsets_.size()) * sizeof(std::uint64_t) +
                     (owner_items_.size() + cand_items_.size()) * sizeof(PointIndex);
    return s;
}

void RnnIndex::replace_candidates_for_testing(NodeId id, std::vector<PointIndex> list) {
    std::vector<PointIndex> items;
    std::vector<std::uint64_t> offsets{0};
    for (NodeId v = 0; v < tree_.size(); ++v) {
        if (v == id) {
            items.insert(items.end(), list.begin(), list.end());
        } else {
            const auto cur = candidates(v);
            items.insert(items.end(), cur.begin(), cur.end());
        }
        offsets.push_back(items.size());
    }
    cand_items_ = std::move(items);
    cand_offsets_ = std::move(offsets);
}

std::vector<std::vector<PointIndex>> query_batch(const RnnIndex& index, std::span<const double> queries) {
    const auto d = static_cast<std::size_t>(index.dim());
    const auto count = static_cast<std::int64_t>(queries.size() / d);
    std::vector<std::vector<PointIndex>> out(count);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
        out[i] = index.query(queries.subspan(i * d, d));
    }
    return out;
}

std::vector<std::vector<PointIndex>> query_batch_serial(const RnnIndex& index,
                                                        std::span<const double> queries) {
    const auto d = static_cast<std::size_t>(index.dim());
    std::vector<std::vector<PointIndex>> out(queries.size() / d);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = index.query(queries.subspan(i * d, d));
    }
    return out;
}

}  // namespace rnnq
