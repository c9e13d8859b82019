#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "rnnq/geometry.hpp"

namespace test_support {

using rnnq::Key;
using rnnq::QtBox;
using rnnq::kKeyBits;

// Clusters of small random boxes; some clusters hold one box.
inline std::vector<QtBox> random_boxes(std::mt19937_64& rng, int dim, std::size_t count) {
    std::vector<QtBox> out;
    while (out.size() < count) {
        const int base = 1 + static_cast<int>(rng() % 12);
        QtBox center;
        center.level = base;
        for (int j = 0; j < dim; ++j) center.anchor[j] = rng() % (Key{1} << base);
        const std::size_t cluster = 1 + rng() % 6;
        for (std::size_t c = 0; c < cluster && out.size() < count; ++c) {
            QtBox b;
            b.level = std::min(base + static_cast<int>(rng() % 8), kKeyBits);
            for (int j = 0; j < dim; ++j) {
                const int extra = b.level - base;
                b.anchor[j] = (center.anchor[j] << extra) | (extra ? rng() % (Key{1} << extra) : 0);
            }
            out.push_back(b);
        }
    }
    return out;
}

}  // namespace test_support
