#include "rnnq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rnnq/exact.hpp"
#include "rnnq/rnn_index.hpp"

namespace rnnq::oracle {

std::vector<PointIndex> rnn_brute_force(const PointSet& points, std::span<const double> q) {
    const std::size_t n = points.size();
    if (n == 1) return {0};
    std::vector<PointIndex> out;
    for (std::size_t i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) nearest = std::min(nearest, dist_sq(points[i], points[j]));
        }
        if (dist_sq(points[i], q) <= nearest) out.push_back(static_cast<PointIndex>(i));
    }
    return out;
}

std::vector<PointIndex> rnn_brute_force(const PointSet& points, std::span<const EmptyBall> balls,
                                        std::span<const double> q) {
    if (points.size() == 1) return {0};
    std::vector<PointIndex> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (dist_sq(points[i], q) <= balls[i].r_sq) out.push_back(static_cast<PointIndex>(i));
    }
    return out;
}

std::vector<EmptyBall> allnn_brute_force(const PointSet& points) {
    const std::size_t n = points.size();
    std::vector<EmptyBall> out(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
        EmptyBall b{static_cast<PointIndex>(i), 0, std::numeric_limits<double>::infinity()};
        for (std::size_t j = 0; j < n; ++j) {
            if (j == static_cast<std::size_t>(i)) continue;
            const double d = dist_sq(points[i], points[j]);
            if (d < b.r_sq) {  // strict: the first (smallest) index wins ties
                b.r_sq = d;
                b.nn = static_cast<PointIndex>(j);
            }
        }
        out[i] = b;
    }
    return out;
}

std::vector<double> probe_queries(const PointSet& points, std::span<const EmptyBall> balls, std::size_t count,
                                  std::uint64_t seed) {
    const int d = points.dim();
    const std::size_t n = points.size();
    corpus::Rng rng(seed);
    std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], points[i][j]);
            hi[j] = std::max(hi[j], points[i][j]);
        }
    }
    std::vector<double> out;
    out.reserve(count * d);
    std::vector<double> q(d);
    for (std::size_t t = 0; t < count; ++t) {
        int kind = static_cast<int>(t % 4);
        if (kind == 2 && balls.empty()) kind = 0;
        switch (kind) {
            case 0:
                for (int j = 0; j < d; ++j) {
                    const double pad = std::max((hi[j] - lo[j]) * 0.5, 1e-3);
                    q[j] = rng.uniform(lo[j] - pad, hi[j] + pad);
                }
                break;
            case 1: {
                const auto p = points[rng.below(n)];
                std::copy(p.begin(), p.end(), q.begin());
                break;
            }
            case 2: {
                const std::size_t i = rng.below(n);
                const double r = std::sqrt(balls[i].r_sq);
                const auto p = points[i];
                if (rng.below(2) == 0) {
                    std::copy(p.begin(), p.end(), q.begin());
                    const std::size_t axis = rng.below(static_cast<std::size_t>(d));
                    q[axis] += rng.below(2) == 0 ? r : -r;
                } else {
                    double norm = 0.0;
                    for (int j = 0; j < d; ++j) {
                        q[j] = rng.normal();
                        norm += q[j] * q[j];
                    }
                    norm = std::sqrt(norm);
                    for (int j = 0; j < d; ++j) q[j] = p[j] + q[j] / norm * r;
                }
                break;
            }
            default: {
                double norm = 0.0;
                for (int j = 0; j < d; ++j) {
                    q[j] = rng.normal();
                    norm += q[j] * q[j];
                }
                const double scale = rng.uniform(2.0, 10.0) * std::sqrt(static_cast<double>(d)) / std::sqrt(norm);
                for (int j = 0; j < d; ++j) q[j] *= scale;
                break;
            }
        }
        out.insert(out.end(), q.begin(), q.end());
    }
    return out;
}

namespace {

void sort_cells(std::vector<CellRecord>& cells, int dim) {
    std::sort(cells.begin(), cells.end(), [dim](const CellRecord& a, const CellRecord& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        if (!(a.cell == b.cell)) return morton_less(a.cell, b.cell, dim);
        return morton_less(a.inner, b.inner, dim);
    });
}

void naive_recurse(int dim, const QtBox& cell, const std::vector<QtBox>& inside,
                   std::vector<CellRecord>& out) {
    out.push_back({NodeKind::Ordinary, cell, QtBox{}});
    std::vector<QtBox> strict;
    for (const QtBox& b : inside) {
        if (!(b == cell)) strict.push_back(b);
    }
    if (strict.empty()) return;

    QtBox hull = strict.front();
    for (const QtBox& b : strict) hull = smallest_containing_box(hull, b, dim);

    if (hull == cell) {
        for (unsigned q = 0; q < (1u << dim); ++q) {
            const QtBox quad = cell.quadrant(q, dim);
            std::vector<QtBox> sub;
            for (const QtBox& b : strict) {
                if (quad.contains(b, dim)) sub.push_back(b);
            }
            naive_recurse(dim, quad, sub, out);
        }
    } else {
        naive_recurse(dim, hull, strict, out);
        out.push_back({NodeKind::Compressed, cell, hull});
    }
}

}  // namespace

std::vector<CellRecord> naive_quadtree_cells(int dim, std::span<const QtBox> boxes) {
    std::vector<QtBox> unique;
    for (const QtBox& b : boxes) {
        if (std::find(unique.begin(), unique.end(), b) == unique.end()) unique.push_back(b);
    }
    std::vector<CellRecord> out;
    naive_recurse(dim, root_box(), unique, out);
    sort_cells(out, dim);
    return out;
}

std::vector<CellRecord> quadtree_cells(const CompressedQuadtree& tree) {
    std::vector<CellRecord> out;
    out.reserve(tree.size());
    for (const QtNode& v : tree.nodes()) {
        out.push_back({v.kind, v.cell, v.kind == NodeKind::Compressed ? v.inner : QtBox{}});
    }
    sort_cells(out, tree.dim());
    return out;
}

bool CheckReport::passed() const {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

void CheckReport::add(std::string name, bool ok, std::string detail) {
    results.push_back({std::move(name), ok, std::move(detail)});
}

std::string CheckReport::to_text() const {
    std::ostringstream os;
    for (const CheckResult& r : results) {
        os << (r.passed ? "PASS " : "FAIL ") << r.name << " [n=" << n << " d=" << dim
           << " dist=" << distribution << " seed=" << seed << "]";
        if (!r.detail.empty()) os << ": " << r.detail;
        os << '\n';
    }
    return os.str();
}

std::string CheckReport::to_json_lines() const {
    std::string out;
    for (const CheckResult& r : results) {
        nlohmann::json j = {{"check", r.name}, {"passed", r.passed}, {"n", n},
                            {"d", dim},        {"dist", distribution}, {"seed", seed},
                            {"detail", r.detail}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

namespace {

// Exact meeting of the closed ball with the half-open cell, filtered in floating point.
bool meets_cell_exactly(std::span<const double> c, double r_sq, const QtBox& cell) {
    double g = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double lo = cell.lower(static_cast<int>(j));
        const double hi = cell.upper(static_cast<int>(j));
        const double gap = c[j] < lo ? lo - c[j] : (c[j] > hi ? c[j] - hi : 0.0);
        g += gap * gap;
    }
    if (g > r_sq * (1.0 + 0x1p-40)) return false;
    if (g < r_sq * (1.0 - 0x1p-40)) return true;
    return exact::ball_meets_box(c, r_sq, cell, true);
}

struct NodeFinding {
    NodeId node = kNoNode;
    std::string message;
};

}  // namespace

CheckReport candidate_semantics_check(const RnnIndex& index, std::size_t cap) {
    CheckReport report;
    report.n = index.size();
    report.dim = index.dim();
    report.distribution = "index";
    const std::size_t n = index.size();
    if (n > cap) {
        report.add("candidate_sandwich", true, "skipped: n above cap " + std::to_string(cap));
        return report;
    }

    const CompressedQuadtree& tree = index.tree();
    const PointSet& pts = index.points();
    const auto& balls = index.balls();
    const std::size_t bound = candidate_bound(index.dim());
    const auto m = static_cast<std::int64_t>(tree.size());

    std::vector<NodeFinding> lower(m), upper(m), size(m);
    std::vector<std::size_t> list_sizes(m, 0);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t v = 0; v < m; ++v) {
        const auto id = static_cast<NodeId>(v);
        const QtNode& node = tree.node(id);
        if (node.kind != NodeKind::Ordinary) continue;
        const auto list = index.candidates(id);
        list_sizes[v] = list.size();
        if (n == 1) {
            if (!list.empty()) upper[v] = {id, "lone-point index has a non-empty list"};
            continue;
        }
        const double s = node.cell.side();
        const double threshold = s * s / 16.0;  // r > s/4, compared exactly on r^2

        if (!std::is_sorted(list.begin(), list.end()) ||
            std::adjacent_find(list.begin(), list.end()) != list.end()) {
            upper[v] = {id, "list not strictly ascending"};
        }
        for (PointIndex i : list) {
            const bool allowed = balls[i].r_sq > threshold &&
                                 ball_box_overlap(pts[i], balls[i].r_sq, node.cell);
            if (!allowed && upper[v].node == kNoNode) {
                upper[v] = {id, "point " + std::to_string(i) + " listed but radius too small or ball disjoint"};
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (balls[i].r_sq <= threshold) continue;
            if (!meets_cell_exactly(pts[i], balls[i].r_sq, node.cell)) continue;
            if (!std::binary_search(list.begin(), list.end(), static_cast<PointIndex>(i))) {
                lower[v] = {id, "point " + std::to_string(i) + " meets the cell but is missing"};
                break;
            }
        }
        if (list.size() > bound) {
            size[v] = {id, "|L| = " + std::to_string(list.size()) + " exceeds " + std::to_string(bound)};
        }
    }

    const auto first_failure = [](const std::vector<NodeFinding>& f) -> const NodeFinding* {
        for (const NodeFinding& x : f) {
            if (x.node != kNoNode) return &x;
        }
        return nullptr;
    };
    const auto record = [&](const char* name, const std::vector<NodeFinding>& f, std::string ok_detail) {
        if (const NodeFinding* bad = first_failure(f)) {
            report.add(name, false, "node " + std::to_string(bad->node) + ": " + bad->message);
        } else {
            report.add(name, true, std::move(ok_detail));
        }
    };
    const std::size_t max_list = list_sizes.empty() ? 0 : *std::max_element(list_sizes.begin(), list_sizes.end());
    record("candidate_lower", lower, "");
    record("candidate_upper", upper, "");
    record("candidate_bound", size, "max |L| = " + std::to_string(max_list) + " <= " + std::to_string(bound));
    return report;
}

CheckReport packing_check(const PointSet& points, std::span<const EmptyBall> balls, std::size_t trials,
                          std::uint64_t seed) {
    CheckReport report;
    report.n = points.size();
    report.dim = points.dim();
    report.distribution = "packing";
    report.seed = seed;
    const int d = points.dim();
    const std::size_t n = points.size();
    const std::size_t bound = answer_bound(d);

    std::vector<double> lo(d, INFINITY), hi(d, -INFINITY), radius(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], points[i][j]);
            hi[j] = std::max(hi[j], points[i][j]);
        }
        radius[i] = std::sqrt(balls[i].r_sq);
    }

    std::vector<std::size_t> counts(trials, 0);
    const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < count; ++t) {
        corpus::Rng rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(t));
        std::array<double, kMaxDim> c{};
        for (int j = 0; j < d; ++j) {
            const double pad = (hi[j] - lo[j]) * 0.25;
            c[j] = rng.uniform(lo[j] - pad, hi[j] + pad);
        }
        const double r = radius[rng.below(n)] * rng.uniform(0.25, 1.0);
        const auto cs = std::span<const double>(c.data(), d);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (radius[i] < r) continue;
            if (std::sqrt(dist_sq(cs, points[i])) <= r + radius[i]) ++hits;
        }
        counts[t] = hits;
    }

    std::size_t worst = 0;
    std::size_t worst_trial = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        if (counts[t] > worst) {
            worst = counts[t];
            worst_trial = t;
        }
    }
    report.add("packing", worst <= bound,
               "max " + std::to_string(worst) + " of bound " + std::to_string(bound) + " (trial " +
                   std::to_string(worst_trial) + " of " + std::to_string(trials) + ")");
    return report;
}

}  // namespace rnnq::oracle
