#include "rnnq/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "rnnq/errors.hpp"

namespace rnnq {

namespace {

// Lower edge of key cell k at the finest level: -1 + k 2^(1-L). Exact.
double key_cell_lower(Key k) {
    return std::ldexp(static_cast<double>(k), 1 - kKeyBits) - 1.0;
}

int highest_bit(Key x) {
    return 63 - std::countl_zero(x);
}

// x has a lower highest set bit than y.
bool less_msb(Key x, Key y) {
    return x < y && x < (x ^ y);
}

Key corner_key(const QtBox& b, int axis) {
    return b.anchor[axis] << (kKeyBits - b.level);
}

}  // namespace

PointSet::PointSet(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim < 1 || dim > kMaxDim) {
        throw InvalidInput("dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                           std::to_string(dim));
    }
    if (coords_.size() % static_cast<std::size_t>(dim) != 0) {
        throw InvalidInput("coordinate count is not a multiple of the dimension");
    }
}

void Transform::apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t j = 0; j < center.size(); ++j) {
        y[j] = (x[j] - center[j]) / sigma;
    }
}

void Transform::invert(std::span<const double> y, std::span<double> x) const {
    for (std::size_t j = 0; j < center.size(); ++j) {
        x[j] = y[j] * sigma + center[j];
    }
}

std::vector<double> Transform::apply(std::span<const double> x) const {
    std::vector<double> y(center.size());
    apply(x, y);
    return y;
}

double QtBox::side() const {
    return std::ldexp(1.0, 1 - level);
}

double QtBox::lower(int axis) const {
    return std::ldexp(static_cast<double>(anchor[axis]), 1 - level) - 1.0;
}

double QtBox::upper(int axis) const {
    return std::ldexp(static_cast<double>(anchor[axis] + 1), 1 - level) - 1.0;
}

bool QtBox::contains(const GridKey& key, int dim) const {
    const int shift = kKeyBits - level;
    for (int j = 0; j < dim; ++j) {
        if ((key.k[j] >> shift) != anchor[j]) return false;
    }
    return true;
}

bool QtBox::contains(const QtBox& inner, int dim) const {
    if (inner.level < level) return false;
    const int shift = inner.level - level;
    for (int j = 0; j < dim; ++j) {
        if ((inner.anchor[j] >> shift) != anchor[j]) return false;
    }
    return true;
}

unsigned QtBox::quadrant_of(const GridKey& key, int dim) const {
    const int shift = kKeyBits - level - 1;
    unsigned q = 0;
    for (int j = 0; j < dim; ++j) {
        q |= static_cast<unsigned>((key.k[j] >> shift) & 1u) << j;
    }
    return q;
}

QtBox QtBox::quadrant(unsigned q, int dim) const {
    QtBox child;
    child.level = level + 1;
    for (int j = 0; j < dim; ++j) {
        child.anchor[j] = (anchor[j] << 1) | ((q >> j) & 1u);
    }
    return child;
}

QtBox root_box() {
    return QtBox{};
}

std::pair<PointSet, Transform> normalize(int dim, const std::vector<double>& points) {
    if (dim < 1 || dim > kMaxDim) {
        throw InvalidInput("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }
    if (points.empty() || points.size() % static_cast<std::size_t>(dim) != 0) {
        throw InvalidInput("point list is empty or ragged");
    }
    std::vector<double> lo(dim, INFINITY), hi(dim, -INFINITY);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double v = points[i];
        if (!std::isfinite(v)) {
            throw InvalidInput("non-finite coordinate in point " + std::to_string(i / dim));
        }
        const int j = static_cast<int>(i % dim);
        lo[j] = std::min(lo[j], v);
        hi[j] = std::max(hi[j], v);
    }

    Transform t;
    t.center.resize(dim);
    double w = 0.0;
    for (int j = 0; j < dim; ++j) {
        t.center[j] = lo[j] + (hi[j] - lo[j]) / 2.0;
        w = std::max(w, hi[j] - lo[j]);
    }
    t.sigma = w > 0.0 ? w * 2.0 * std::sqrt(static_cast<double>(dim)) : 1.0;

    std::vector<double> normalized(points.size());
    for (std::size_t i = 0; i < points.size(); i += dim) {
        t.apply(std::span(points).subspan(i, dim), std::span(normalized).subspan(i, dim));
    }
    return {PointSet(dim, std::move(normalized)), std::move(t)};
}

bool ball_box_overlap(std::span<const double> center, double r_sq, const QtBox& box) {
    double s = 0.0;
    for (std::size_t j = 0; j < center.size(); ++j) {
        const int axis = static_cast<int>(j);
        const double lo = box.lower(axis);
        const double hi = box.upper(axis);
        double gap = 0.0;
        if (center[j] < lo) {
            gap = lo - center[j];
        } else if (center[j] > hi) {
            gap = center[j] - hi;
        }
        s += gap * gap;
    }
    return s <= r_sq * (1.0 + kOverlapSlack);
}

namespace {

int checked_level(int k) {
    if (k > kKeyBits - 2) {
        throw SpreadTooLarge("nearest-neighbor distance below grid resolution (level " +
                             std::to_string(k) + " > " + std::to_string(kKeyBits - 2) + ")");
    }
    return std::max(k, 0);
}

}  // namespace

int level_for_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw InvalidInput("radius must be positive and finite");
    }
    int e = 0;
    const double m = std::frexp(r, &e);  // r = m 2^e, m in [0.5, 1)
    return checked_level(m == 0.5 ? 1 - e : -e);
}

int level_for_radius_sq(double r_sq) {
    if (!(r_sq > 0.0) || !std::isfinite(r_sq)) {
        throw InvalidInput("squared radius must be positive and finite");
    }
    int e = 0;
    const double m = std::frexp(r_sq, &e);
    // -log2(r_sq) lies in (-e, 1 - e], with equality exactly at powers of two.
    const int k = (m == 0.5) ? ((1 - e) >> 1) : ((-e) >> 1);
    return checked_level(k);
}

Key coord_key(double y) {
    if (!(y > -1.0)) return 0;
    if (y >= 1.0) return kKeyLimit - 1;
    const double guess = std::floor((y + 1.0) * 0x1p47);
    Key k = static_cast<Key>(std::clamp(guess, 0.0, static_cast<double>(kKeyLimit - 1)));
    // y + 1 may round across a cell edge; settle against the exact edges.
    while (k > 0 && y < key_cell_lower(k)) --k;
    while (k + 1 < kKeyLimit && y >= key_cell_lower(k + 1)) ++k;
    return k;
}

GridKey grid_key(std::span<const double> y) {
    GridKey g;
    for (std::size_t j = 0; j < y.size(); ++j) g.k[j] = coord_key(y[j]);
    return g;
}

QtBox smallest_containing_box(const GridKey& a, const GridKey& b, int dim) {
    Key diff = 0;
    for (int j = 0; j < dim; ++j) diff |= a.k[j] ^ b.k[j];
    QtBox box;
    box.level = diff == 0 ? kKeyBits : kKeyBits - 1 - highest_bit(diff);
    for (int j = 0; j < dim; ++j) box.anchor[j] = a.k[j] >> (kKeyBits - box.level);
    return box;
}

QtBox smallest_containing_box(const QtBox& a, const QtBox& b, int dim) {
    GridKey ka, kb;
    for (int j = 0; j < dim; ++j) {
        ka.k[j] = corner_key(a, j);
        kb.k[j] = corner_key(b, j);
    }
    QtBox box = smallest_containing_box(ka, kb, dim);
    const int level = std::min({box.level, a.level, b.level});
    if (level != box.level) {
        box.level = level;
        for (int j = 0; j < dim; ++j) box.anchor[j] = ka.k[j] >> (kKeyBits - level);
    }
    return box;
}

bool morton_less(const QtBox& a, const QtBox& b, int dim) {
    int axis = 0;
    Key best = 0;
    for (int j = 0; j < dim; ++j) {
        const Key x = corner_key(a, j) ^ corner_key(b, j);
        if (less_msb(best, x)) {
            best = x;
            axis = j;
        }
    }
    if (best != 0) return corner_key(a, axis) < corner_key(b, axis);
    return a.level < b.level;
}

bool in_root_cell(std::span<const double> y) {
    for (double v : y) {
        if (!(v >= -1.0 && v <= 1.0)) return false;
    }
    return true;
}

}  // namespace rnnq
