#pragma once

// Compressed quadtree over a set S of dyadic boxes, and the separator
// ("finger") hierarchy that locates the leaf containing a key in
// O(log m) steps regardless of tree depth.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rnnq/geometry.hpp"

namespace rnnq {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

enum class NodeKind : std::uint8_t { Ordinary = 0, Compressed = 1 };

/// Ordinary nodes own a box cell. Compressed nodes are leaves whose cell is
/// `cell` minus `inner`. Children are stored contiguously: either the 2^d
/// quadrants in quadrant order, or the pair {inner box node, compressed leaf}.
struct QtNode {
    NodeKind kind = NodeKind::Ordinary;
    bool marked = false;
    QtBox cell;
    QtBox inner;
    NodeId parent = kNoNode;
    NodeId first_child = kNoNode;
    std::uint32_t child_count = 0;

    bool is_leaf() const noexcept { return child_count == 0; }
    bool operator==(const QtNode&) const = default;
};

class CompressedQuadtree {
public:
    CompressedQuadtree() = default;

    /// Smallest compressed quadtree in which every box of `boxes` is the cell
    /// of an ordinary node. Duplicates are ignored. Throws InvalidInput for
    /// malformed boxes. O(m log m).
    static CompressedQuadtree build(int dim, std::span<const QtBox> boxes);

    /// Reassembles a tree from its arena (deserialization); validates links.
    static CompressedQuadtree from_nodes(int dim, std::vector<QtNode> nodes);

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    NodeId root() const noexcept { return 0; }
    const QtNode& node(NodeId id) const { return nodes_[id]; }
    const std::vector<QtNode>& nodes() const noexcept { return nodes_; }

    /// Node whose cell is exactly `box`, if it is one of the input boxes.
    std::optional<NodeId> find_marked(const QtBox& box) const;

    /// Child of internal node `id` whose cell holds `key` (key must be in the cell).
    NodeId child_containing(NodeId id, const GridKey& key) const;

    /// Leaf holding `key` by walking down from the root. O(depth).
    NodeId locate_descend(const GridKey& key) const;

    /// Whether `key` lies in the cell of `id` (half-open semantics).
    bool cell_contains(NodeId id, const GridKey& key) const;

    /// Longest root-to-leaf path, counted in nodes.
    int depth() const;

private:
    void index_marked();

    int dim_ = 1;
    std::vector<QtNode> nodes_;
    std::vector<NodeId> marked_;  // marked node ids sorted by Morton order of their cells
};

/// One routing record per separator. `links` has one slot per child of the
/// separator (kNoFinger for children outside the current component).
struct FingerNode {
    NodeId separator = 0;
    std::int32_t outside = -1;
    std::uint32_t link_begin = 0;
    std::uint32_t link_count = 0;

    bool operator==(const FingerNode&) const = default;
};

inline constexpr std::int32_t kNoFinger = -1;

class FingerTree {
public:
    FingerTree() = default;

    /// Recursive separator decomposition: each separator is the deepest node
    /// whose subtree holds more than 2/3 of its component, so every routing
    /// step keeps at most 2/3 of the nodes.
    static FingerTree build(const CompressedQuadtree& tree);

    static FingerTree from_parts(std::vector<FingerNode> nodes, std::vector<std::int32_t> links,
                                 std::int32_t root);

    /// Same leaf as tree.locate_descend(key); `visits` receives the number of
    /// finger nodes examined.
    NodeId locate(const CompressedQuadtree& tree, const GridKey& key, int* visits = nullptr) const;

    /// Longest routing path, in finger nodes.
    int depth() const;

    std::int32_t root() const noexcept { return root_; }
    const std::vector<FingerNode>& nodes() const noexcept { return nodes_; }
    const std::vector<std::int32_t>& links() const noexcept { return links_; }

private:
    std::vector<FingerNode> nodes_;
    std::vector<std::int32_t> links_;
    std::int32_t root_ = kNoFinger;
};

}  // namespace rnnq
