#include "rnnq/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace rnnq::exact {

namespace {

using boost::multiprecision::cpp_int;

// mant * 2^exp
struct Dyadic {
    cpp_int mant;
    int exp = 0;
};

Dyadic from_double(double v) {
    if (v == 0.0) return {};
    int e = 0;
    const double m = std::frexp(v, &e);
    return {cpp_int(static_cast<std::int64_t>(std::ldexp(m, 53))), e - 53};
}

void align(Dyadic& a, Dyadic& b) {
    if (a.exp > b.exp) {
        a.mant <<= (a.exp - b.exp);
        a.exp = b.exp;
    } else if (b.exp > a.exp) {
        b.mant <<= (b.exp - a.exp);
        b.exp = a.exp;
    }
}

Dyadic sub(Dyadic a, Dyadic b) {
    align(a, b);
    return {a.mant - b.mant, a.exp};
}

Dyadic add(Dyadic a, Dyadic b) {
    align(a, b);
    return {a.mant + b.mant, a.exp};
}

Dyadic square(const Dyadic& a) {
    return {a.mant * a.mant, 2 * a.exp};
}

int compare(Dyadic a, Dyadic b) {
    align(a, b);
    return a.mant < b.mant ? -1 : (a.mant > b.mant ? 1 : 0);
}

}  // namespace

int compare_sq_diff(double a, double b, double r_sq) {
    return compare(square(sub(from_double(a), from_double(b))), from_double(r_sq));
}

bool ball_meets_box(std::span<const double> center, double r_sq, const QtBox& box,
                    bool half_open) {
    Dyadic total;
    bool attained = true;
    for (std::size_t j = 0; j < center.size(); ++j) {
        const int axis = static_cast<int>(j);
        const double lo = box.lower(axis);
        const double hi = box.upper(axis);
        const double c = center[j];
        if (c < lo) {
            total = add(total, square(sub(from_double(lo), from_double(c))));
        } else if (c >= hi && !(c == hi && (!half_open || hi == 1.0))) {
            total = add(total, square(sub(from_double(c), from_double(hi))));
            if (half_open && hi != 1.0) attained = false;
        }
    }
    const int cmp = compare(total, from_double(r_sq));
    return attained ? cmp <= 0 : cmp < 0;
}

}  // namespace rnnq::exact
