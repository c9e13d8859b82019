#pragma once

// Coordinate normalization, dyadic quadtree boxes on a fixed-width integer
// grid, and the distance / overlap predicates shared by every other module.
//
// Normalized space: the input bounding box is mapped to a hypercube of side
// 1/(2 sqrt d) centered at the origin, so every empty ball lies inside the
// root cell [-1, 1]^d. Each normalized coordinate y maps to a kKeyBits-wide
// integer key, floor((y + 1) / 2 * 2^kKeyBits), computed exactly.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rnnq {

inline constexpr int kKeyBits = 48;
inline constexpr int kMaxDim = 8;
inline constexpr std::uint64_t kKeyLimit = std::uint64_t{1} << kKeyBits;

/// Relative slack of ball_box_overlap.
inline constexpr double kOverlapSlack = 0x1p-40;

using Key = std::uint64_t;

/// Flat, row-major set of points of a common dimension.
class PointSet {
public:
    PointSet() = default;
    PointSet(int dim, std::vector<double> coords);

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
    bool empty() const noexcept { return size() == 0; }

    std::span<const double> operator[](std::size_t i) const {
        return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& coords() const noexcept { return coords_; }

private:
    int dim_ = 0;
    std::vector<double> coords_;
};

/// Affine map original -> normalized: y = (x - center) / sigma.
struct Transform {
    std::vector<double> center;
    double sigma = 1.0;

    int dim() const noexcept { return static_cast<int>(center.size()); }
    void apply(std::span<const double> x, std::span<double> y) const;
    void invert(std::span<const double> y, std::span<double> x) const;
    std::vector<double> apply(std::span<const double> x) const;
};

/// Per-axis grid coordinates of a point; axes >= dim are zero.
struct GridKey {
    std::array<Key, kMaxDim> k{};
    bool operator==(const GridKey&) const = default;
};

/// Dyadic box: level k, per-axis anchor in [0, 2^k). Side 2^(1-k).
/// Axes >= dim hold zero so defaulted comparison is meaningful.
struct QtBox {
    int level = 0;
    std::array<Key, kMaxDim> anchor{};

    bool operator==(const QtBox&) const = default;

    double side() const;
    /// Lower corner coordinate on `axis` (exact).
    double lower(int axis) const;
    /// Upper corner coordinate on `axis` (exact; excluded unless it is +1).
    double upper(int axis) const;

    bool contains(const GridKey& key, int dim) const;
    bool contains(const QtBox& inner, int dim) const;
    /// Index in [0, 2^dim) of the quadrant of this box holding `key`.
    unsigned quadrant_of(const GridKey& key, int dim) const;
    QtBox quadrant(unsigned q, int dim) const;
};

QtBox root_box();

/// Normalizes `points` (row-major, `dim` per point). Throws InvalidInput on
/// non-finite coordinates or an empty set.
std::pair<PointSet, Transform> normalize(int dim, const std::vector<double>& points);

/// Canonical squared distance: ascending-axis sum of squared differences.
/// Every component compares distances through this function.
inline double dist_sq(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

/// Conservative closed ball / closed box test: clamped distance^2 <= r_sq (1 + 2^-40).
bool ball_box_overlap(std::span<const double> center, double r_sq, const QtBox& box);

/// Level k with 2^(1-k) in [2r, 4r), i.e. floor(-log2 r). Throws
/// SpreadTooLarge beyond kKeyBits - 2; radii above 1 map to level 0.
int level_for_radius(double r);

/// Same as level_for_radius(sqrt(r_sq)) with the square root taken exactly:
/// side^2 in [4 r_sq, 16 r_sq).
int level_for_radius_sq(double r_sq);

/// Exact grid key of a normalized coordinate, clamped to [0, 2^L - 1].
Key coord_key(double y);
GridKey grid_key(std::span<const double> y);

/// Smallest quadtree box containing both keys.
QtBox smallest_containing_box(const GridKey& a, const GridKey& b, int dim);
/// Smallest quadtree box containing both boxes.
QtBox smallest_containing_box(const QtBox& a, const QtBox& b, int dim);

/// Z-order on boxes: by lower-corner Morton code, then larger box first.
/// Ancestors precede descendants; sorted order is a preorder of the quadtree.
bool morton_less(const QtBox& a, const QtBox& b, int dim);

/// True when every coordinate is within the root cell [-1, 1].
bool in_root_cell(std::span<const double> y);

}  // namespace rnnq
