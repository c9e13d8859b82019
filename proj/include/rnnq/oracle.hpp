#pragma once

// Brute-force references and invariant checkers. Nothing here shares data
// structures with the index beyond the geometry primitives, so agreement
// between the two paths is evidence rather than tautology.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rnnq/allnn.hpp"
#include "rnnq/geometry.hpp"
#include "rnnq/quadtree.hpp"

namespace rnnq {

class RnnIndex;

namespace oracle {

/// {i : dist_sq(p_i, q) <= min_{j != i} dist_sq(p_i, p_j)}, ascending. O(n^2).
std::vector<PointIndex> rnn_brute_force(const PointSet& points, std::span<const double> q);

/// Same answer in O(n) from precomputed empty balls.
std::vector<PointIndex> rnn_brute_force(const PointSet& points, std::span<const EmptyBall> balls,
                                        std::span<const double> q);

/// O(n^2) all nearest neighbors; ties go to the smaller index. Zero radii
/// are reported as-is (no duplicate rejection).
std::vector<EmptyBall> allnn_brute_force(const PointSet& points);

/// Node cell of a compressed quadtree, independent of arena layout.
struct CellRecord {
    NodeKind kind = NodeKind::Ordinary;
    QtBox cell;
    QtBox inner;
    bool operator==(const CellRecord&) const = default;
};

/// Cells of the compressed quadtree built by the textbook recursion
/// (O(m^2)): split into quadrants when the smallest box containing the boxes
/// strictly inside the cell is the cell itself, otherwise hang that box plus
/// a compressed remainder. Sorted for comparison.
std::vector<CellRecord> naive_quadtree_cells(int dim, std::span<const QtBox> boxes);

/// Probe queries in normalized coordinates, `count` rows cycling through four
/// kinds: uniform near the data, exactly at data points, on empty-ball
/// boundaries (axis-aligned or random direction), and far outside the root
/// cell. Requires balls.size() == points.size() unless n == 1.
std::vector<double> probe_queries(const PointSet& points, std::span<const EmptyBall> balls, std::size_t count,
                                  std::uint64_t seed);

/// Cells of a built tree, sorted the same way as naive_quadtree_cells.
std::vector<CellRecord> quadtree_cells(const CompressedQuadtree& tree);

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;  // first counterexample on failure, summary otherwise
};

struct CheckReport {
    std::size_t n = 0;
    int dim = 0;
    std::string distribution;
    std::uint64_t seed = 0;
    std::vector<CheckResult> results;

    bool passed() const;
    void add(std::string name, bool ok, std::string detail);
    /// One line per result, human readable.
    std::string to_text() const;
    /// One JSON object per result, newline separated.
    std::string to_json_lines() const;
};

/// Candidate sandwich and list size bound at every ordinary node,
/// by exhaustive node x point scan:
///   {i : r_i > s/4 and ball meets the half-open cell exactly} subset of L(v)
///   subset of {i : r_i > s/4 and ball_box_overlap}, |L(v)| <= candidate_bound.
/// Indexes above `cap` points are reported as skipped (pass).
CheckReport candidate_semantics_check(const RnnIndex& index, std::size_t cap = 2000);

/// Random probe balls (center near the data, radius drawn from the empty
/// radii); counts empty balls of radius >= r meeting the probe and checks the
/// packing bound 2 * 5^d.
CheckReport packing_check(const PointSet& points, std::span<const EmptyBall> balls, std::size_t trials,
                          std::uint64_t seed);

}  // namespace oracle

/// Deterministic point generators for tests, checks and benchmarks.
namespace corpus {

enum class Distribution { Uniform, Gaussian, Grid, Collinear, TwoScale };

std::vector<Distribution> all_distributions();
std::string to_string(Distribution d);
std::optional<Distribution> parse_distribution(const std::string& s);

/// Seeded, platform-independent stream of uniform doubles and normals.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    double normal();
    std::size_t below(std::size_t n);

private:
    std::uint64_t state_;
};

/// n distinct points (row-major, original coordinates).
std::vector<double> generate(Distribution dist, std::size_t n, int dim, std::uint64_t seed);

/// Drops exact duplicate rows, keeping first occurrences. `mapping[i]` is
/// the output row of input row i.
std::vector<double> dedupe(int dim, const std::vector<double>& points, std::vector<std::size_t>* mapping);

}  // namespace corpus

}  // namespace rnnq
