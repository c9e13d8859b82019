#include "rnnq/quadtree.hpp"

#include <algorithm>
#include <cassert>

#include "rnnq/errors.hpp"

namespace rnnq {

namespace {

class FingerBuilder {
public:
    FingerBuilder(const CompressedQuadtree& tree, std::vector<FingerNode>& nodes,
                  std::vector<std::int32_t>& links)
        : tree_(tree), nodes_(nodes), links_(links), blocked_(tree.size(), 0),
          sizes_(tree.size(), 0) {}

    // Finger node for the component rooted at `r` (minus blocked subtrees).
    std::int32_t make(NodeId r) {
        const std::uint32_t total = component_sizes(r);
        NodeId v = r;
        for (;;) {
            const QtNode& node = tree_.node(v);
            NodeId heavy = kNoNode;
            for (std::uint32_t c = 0; c < node.child_count; ++c) {
                const NodeId child = node.first_child + c;
                if (!blocked_[child] && 3ull * sizes_[child] > 2ull * total) {
                    heavy = child;
                    break;
                }
            }
            if (heavy == kNoNode) break;
            v = heavy;
        }

        const auto fid = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back({v, kNoFinger, 0, 0});
        const QtNode& sep = tree_.node(v);
        if (sep.is_leaf()) return fid;

        const auto begin = static_cast<std::uint32_t>(links_.size());
        links_.resize(links_.size() + sep.child_count, kNoFinger);
        nodes_[fid].link_begin = begin;
        nodes_[fid].link_count = sep.child_count;
        for (std::uint32_t c = 0; c < sep.child_count; ++c) {
            const NodeId child = sep.first_child + c;
            if (!blocked_[child]) {
                const std::int32_t sub = make(child);
                links_[begin + c] = sub;
            }
        }
        if (v != r) {
            blocked_[v] = 1;
            const std::int32_t out = make(r);
            nodes_[fid].outside = out;
        }
        return fid;
    }

private:
    std::uint32_t component_sizes(NodeId r) {
        order_.clear();
        order_.push_back(r);
        for (std::size_t i = 0; i < order_.size(); ++i) {
            const QtNode& node = tree_.node(order_[i]);
            for (std::uint32_t c = 0; c < node.child_count; ++c) {
                const NodeId child = node.first_child + c;
                if (!blocked_[child]) order_.push_back(child);
            }
        }
        // Children follow parents in `order_`; accumulate in reverse.
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) sizes_[*it] = 1;
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            if (*it != r) sizes_[tree_.node(*it).parent] += sizes_[*it];
        }
        return sizes_[r];
    }

    const CompressedQuadtree& tree_;
    std::vector<FingerNode>& nodes_;
    std::vector<std::int32_t>& links_;
    std::vector<char> blocked_;
    std::vector<std::uint32_t> sizes_;
    std::vector<NodeId> order_;
};

}  // namespace

FingerTree FingerTree::build(const CompressedQuadtree& tree) {
    FingerTree f;
    if (tree.size() == 0) return f;
    f.nodes_.reserve(tree.size());
    FingerBuilder builder(tree, f.nodes_, f.links_);
    f.root_ = builder.make(tree.root());
    return f;
}

FingerTree FingerTree::from_parts(std::vector<FingerNode> nodes, std::vector<std::int32_t> links,
                                  std::int32_t root) {
    const auto count = static_cast<std::int64_t>(nodes.size());
    if (root < 0 || root >= count) throw FormatError("finger root out of range");
    for (const FingerNode& fn : nodes) {
        if (std::size_t{fn.link_begin} + fn.link_count > links.size()) {
            throw FormatError("finger link range out of bounds");
        }
    }
    // In-degree <= 1 and an unreferenced root rule out cycles reachable from the root.
    std::vector<char> referenced(nodes.size(), 0);
    const auto reference = [&](std::int32_t l) {
        if (l == kNoFinger) return;
        if (l < 0 || l >= count || l == root || referenced[l]) {
            throw FormatError("finger link out of range or shared");
        }
        referenced[l] = 1;
    };
    for (const FingerNode& fn : nodes) reference(fn.outside);
    for (std::int32_t l : links) reference(l);
    FingerTree f;
    f.nodes_ = std::move(nodes);
    f.links_ = std::move(links);
    f.root_ = root;
    return f;
}

NodeId FingerTree::locate(const CompressedQuadtree& tree, const GridKey& key, int* visits) const {
    std::int32_t f = root_;
    int steps = 0;
    for (;;) {
        ++steps;
        const FingerNode& fn = nodes_[f];
        const NodeId v = fn.separator;
        if (tree.node(v).is_leaf()) {
            if (visits) *visits = steps;
            return v;
        }
        if (fn.outside != kNoFinger && !tree.node(v).cell.contains(key, tree.dim())) {
            f = fn.outside;
            continue;
        }
        const NodeId child = tree.child_containing(v, key);
        f = links_[fn.link_begin + (child - tree.node(v).first_child)];
        assert(f != kNoFinger);
    }
}

int FingerTree::depth() const {
    if (root_ == kNoFinger) return 0;
    int best = 0;
    std::vector<std::pair<std::int32_t, int>> stack{{root_, 1}};
    while (!stack.empty()) {
        const auto [f, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        const FingerNode& fn = nodes_[f];
        if (fn.outside != kNoFinger) stack.emplace_back(fn.outside, d + 1);
        for (std::uint32_t i = 0; i < fn.link_count; ++i) {
            const std::int32_t l = links_[fn.link_begin + i];
            if (l != kNoFinger) stack.emplace_back(l, d + 1);
        }
    }
    return best;
}

}  // namespace rnnq
