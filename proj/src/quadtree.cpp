#include "rnnq/quadtree.hpp"

#include <algorithm>
#include <cassert>
#include <string>

#include "rnnq/errors.hpp"

namespace rnnq {

namespace {

void validate_box(const QtBox& b, int dim) {
    if (b.level < 0 || b.level > kKeyBits) {
        throw InvalidInput("box level " + std::to_string(b.level) + " out of range");
    }
    for (int j = 0; j < kMaxDim; ++j) {
        const bool ok = j < dim ? (b.anchor[j] >> b.level) == 0 : b.anchor[j] == 0;
        if (!ok) throw InvalidInput("box anchor outside the root cell");
    }
}

struct Builder {
    int dim;
    const std::vector<QtBox>& marked;    // sorted input boxes
    const std::vector<QtBox>& branch;    // input boxes, root and pairwise joins, sorted
    const std::vector<std::vector<std::uint32_t>>& kids;
    std::vector<QtNode>& nodes;

    bool is_marked(const QtBox& b) const {
        return std::binary_search(marked.begin(), marked.end(), b,
                                  [&](const QtBox& x, const QtBox& y) { return morton_less(x, y, dim); });
    }

    // Node `id` (cell = branch[b]) gets the box node `inner_b` plus the remainder leaf.
    void compress(NodeId id, std::uint32_t inner_b) {
        const auto first = static_cast<NodeId>(nodes.size());
        QtNode box_node;
        box_node.cell = branch[inner_b];
        box_node.marked = is_marked(box_node.cell);
        box_node.parent = id;
        QtNode rest;
        rest.kind = NodeKind::Compressed;
        rest.cell = nodes[id].cell;
        rest.inner = branch[inner_b];
        rest.parent = id;
        nodes.push_back(box_node);
        nodes.push_back(rest);
        nodes[id].first_child = first;
        nodes[id].child_count = 2;
        expand(inner_b, first);
    }

    void expand(std::uint32_t b, NodeId id) {
        const auto& children = kids[b];
        if (children.empty()) return;
        if (children.size() == 1) {
            compress(id, children.front());
            return;
        }
        const QtBox cell = nodes[id].cell;
        const unsigned fan = 1u << dim;
        const auto first = static_cast<NodeId>(nodes.size());
        for (unsigned q = 0; q < fan; ++q) {
            QtNode quad;
            quad.cell = cell.quadrant(q, dim);
            quad.parent = id;
            nodes.push_back(quad);
        }
        nodes[id].first_child = first;
        nodes[id].child_count = fan;

        std::vector<char> used(fan, 0);
        for (std::uint32_t c : children) {
            const QtBox& box = branch[c];
            unsigned q = 0;
            for (int j = 0; j < dim; ++j) {
                q |= static_cast<unsigned>((box.anchor[j] >> (box.level - cell.level - 1)) & 1u) << j;
            }
            assert(!used[q] && "two branch boxes in one quadrant");
            used[q] = 1;
            const NodeId child = first + q;
            if (nodes[child].cell == box) {
                nodes[child].marked = is_marked(box);
                expand(c, child);
            } else {
                compress(child, c);
            }
        }
    }
};

}  // namespace

CompressedQuadtree CompressedQuadtree::build(int dim, std::span<const QtBox> boxes) {
    if (dim < 1 || dim > kMaxDim) throw InvalidInput("dimension out of range");
    for (const QtBox& b : boxes) validate_box(b, dim);
    const auto less = [dim](const QtBox& a, const QtBox& b) { return morton_less(a, b, dim); };

    std::vector<QtBox> marked(boxes.begin(), boxes.end());
    std::sort(marked.begin(), marked.end(), less);
    marked.erase(std::unique(marked.begin(), marked.end()), marked.end());

    // Boxes that become ordinary nodes carrying structure: the inputs, the
    // root, and the join of every Morton-consecutive pair.
    std::vector<QtBox> branch = marked;
    branch.push_back(root_box());
    for (std::size_t i = 0; i + 1 < marked.size(); ++i) {
        branch.push_back(smallest_containing_box(marked[i], marked[i + 1], dim));
    }
    std::sort(branch.begin(), branch.end(), less);
    branch.erase(std::unique(branch.begin(), branch.end()), branch.end());
    assert(branch.front() == root_box());

    std::vector<std::vector<std::uint32_t>> kids(branch.size());
    std::vector<std::uint32_t> stack{0};
    for (std::uint32_t i = 1; i < branch.size(); ++i) {
        while (!branch[stack.back()].contains(branch[i], dim)) stack.pop_back();
        kids[stack.back()].push_back(i);
        stack.push_back(i);
    }

    CompressedQuadtree t;
    t.dim_ = dim;
    t.nodes_.reserve(branch.size() * ((std::size_t{1} << dim) + 2) / 2 + 1);
    QtNode root;
    root.cell = root_box();
    t.nodes_.push_back(root);
    Builder builder{dim, marked, branch, kids, t.nodes_};
    t.nodes_[0].marked = builder.is_marked(root.cell);
    builder.expand(0, 0);
    t.nodes_.shrink_to_fit();
    t.index_marked();
    return t;
}

CompressedQuadtree CompressedQuadtree::from_nodes(int dim, std::vector<QtNode> nodes) {
    if (dim < 1 || dim > kMaxDim) throw FormatError("dimension out of range");
    if (nodes.empty() || nodes[0].parent != kNoNode || !(nodes[0].cell == root_box())) {
        throw FormatError("quadtree root is malformed");
    }
    const auto n = nodes.size();
    for (std::size_t id = 0; id < n; ++id) {
        const QtNode& v = nodes[id];
        try {
            validate_box(v.cell, dim);
            if (v.kind == NodeKind::Compressed) validate_box(v.inner, dim);
        } catch (const InvalidInput& e) {
            throw FormatError(std::string("quadtree node: ") + e.what());
        }
        if (v.kind == NodeKind::Compressed && v.child_count != 0) {
            throw FormatError("compressed node with children");
        }
        if (v.child_count == 0) continue;
        if (v.first_child <= id || v.first_child + std::size_t{v.child_count} > n) {
            throw FormatError("child range out of bounds");
        }
        if (v.child_count != 2 && v.child_count != (1u << dim)) {
            throw FormatError("bad child count");
        }
        for (std::uint32_t c = 0; c < v.child_count; ++c) {
            if (nodes[v.first_child + c].parent != id) throw FormatError("parent link mismatch");
        }
    }
    CompressedQuadtree t;
    t.dim_ = dim;
    t.nodes_ = std::move(nodes);
    t.index_marked();
    return t;
}

void CompressedQuadtree::index_marked() {
    marked_.clear();
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        if (nodes_[id].marked) marked_.push_back(id);
    }
    std::sort(marked_.begin(), marked_.end(), [this](NodeId a, NodeId b) {
        return morton_less(nodes_[a].cell, nodes_[b].cell, dim_);
    });
}

std::optional<NodeId> CompressedQuadtree::find_marked(const QtBox& box) const {
    auto it = std::lower_bound(marked_.begin(), marked_.end(), box, [this](NodeId id, const QtBox& b) {
        return morton_less(nodes_[id].cell, b, dim_);
    });
    if (it != marked_.end() && nodes_[*it].cell == box) return *it;
    return std::nullopt;
}

NodeId CompressedQuadtree::child_containing(NodeId id, const GridKey& key) const {
    const QtNode& v = nodes_[id];
    if (v.child_count == 2 && nodes_[v.first_child + 1].kind == NodeKind::Compressed) {
        return nodes_[v.first_child].cell.contains(key, dim_) ? v.first_child : v.first_child + 1;
    }
    return v.first_child + v.cell.quadrant_of(key, dim_);
}

bool CompressedQuadtree::cell_contains(NodeId id, const GridKey& key) const {
    const QtNode& v = nodes_[id];
    if (!v.cell.contains(key, dim_)) return false;
    return v.kind == NodeKind::Ordinary || !v.inner.contains(key, dim_);
}

NodeId CompressedQuadtree::locate_descend(const GridKey& key) const {
    NodeId id = root();
    while (!nodes_[id].is_leaf()) id = child_containing(id, key);
    return id;
}

int CompressedQuadtree::depth() const {
    std::vector<int> d(nodes_.size(), 1);
    int best = nodes_.empty() ? 0 : 1;
    for (NodeId id = 1; id < nodes_.size(); ++id) {
        d[id] = d[nodes_[id].parent] + 1;
        best = std::max(best, d[id]);
    }
    return best;
}

}  // namespace rnnq
