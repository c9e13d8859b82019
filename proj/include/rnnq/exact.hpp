#pragma once

// Exact predicates over binary floating-point inputs. Every double is a
// dyadic rational, so differences, squares and sums are evaluated without
// rounding. Slow; callers filter with floating point first.

#include <span>

#include "rnnq/geometry.hpp"

namespace rnnq::exact {

/// Sign of (a - b)^2 - r_sq, computed exactly: -1, 0 or +1.
int compare_sq_diff(double a, double b, double r_sq);

/// Whether the closed ball (center, sqrt(r_sq)) meets the box. With
/// `half_open` the box's upper faces are excluded except on the root
/// cell's upper boundary, matching point-location semantics.
bool ball_meets_box(std::span<const double> center, double r_sq, const QtBox& box,
                    bool half_open = true);

}  // namespace rnnq::exact
