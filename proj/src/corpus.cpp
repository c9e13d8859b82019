#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "rnnq/errors.hpp"
#include "rnnq/oracle.hpp"

namespace rnnq::corpus {

std::vector<Distribution> all_distributions() {
    return {Distribution::Uniform, Distribution::Gaussian, Distribution::Grid, Distribution::Collinear,
            Distribution::TwoScale};
}

std::string to_string(Distribution d) {
    switch (d) {
        case Distribution::Uniform: return "uniform";
        case Distribution::Gaussian: return "gaussian";
        case Distribution::Grid: return "grid";
        case Distribution::Collinear: return "collinear";
        case Distribution::TwoScale: return "twoscale";
    }
    return "unknown";
}

std::optional<Distribution> parse_distribution(const std::string& s) {
    for (Distribution d : all_distributions()) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

// splitmix64
Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) {
    return static_cast<std::size_t>(next() % n);
}

namespace {

std::uint64_t mix_seed(Distribution dist, std::size_t n, int dim, std::uint64_t seed) {
    Rng r(seed ^ (static_cast<std::uint64_t>(dist) << 56) ^ (static_cast<std::uint64_t>(dim) << 48) ^ n);
    return r.next();
}

void draw(Distribution dist, std::size_t n, int dim, Rng& rng, std::vector<double>& out) {
    switch (dist) {
        case Distribution::Uniform:
            for (std::size_t i = 0; i < n * dim; ++i) out.push_back(rng.uniform(0.0, 1000.0));
            break;
        case Distribution::Gaussian: {
            const std::size_t clusters = std::max<std::size_t>(1, n / 50);
            std::vector<double> centers(clusters * dim);
            for (double& c : centers) c = rng.uniform(0.0, 1000.0);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t k = rng.below(clusters);
                for (int j = 0; j < dim; ++j) out.push_back(centers[k * dim + j] + 10.0 * rng.normal());
            }
            break;
        }
        case Distribution::Grid: {
            // First n points of the lattice {0..side-1}^d, unit spacing: maximal ties.
            std::size_t side = 1;
            while (static_cast<double>(side) < std::pow(static_cast<double>(n), 1.0 / dim) - 1e-9) ++side;
            while (std::pow(static_cast<double>(side), dim) < static_cast<double>(n)) ++side;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t r = i;
                for (int j = 0; j < dim; ++j) {
                    out.push_back(static_cast<double>(r % side));
                    r /= side;
                }
            }
            break;
        }
        case Distribution::Collinear: {
            std::vector<double> dir(dim), origin(dim);
            for (int j = 0; j < dim; ++j) {
                dir[j] = static_cast<double>(j + 1);
                origin[j] = rng.uniform(0.0, 10.0);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double t = rng.uniform(0.0, 100.0);
                for (int j = 0; j < dim; ++j) out.push_back(origin[j] + t * dir[j]);
            }
            break;
        }
        case Distribution::TwoScale: {
            // Half spread over the unit cube, half packed into a tiny cluster whose
            // closest pairs sit near 1e-9 apart (width capped at 1e-3).
            const std::size_t tight = n / 2;
            const double width =
                std::min(1e-3, 1e-9 * std::pow(static_cast<double>(std::max<std::size_t>(tight, 1)), 2.0 / dim));
            std::vector<double> anchor(dim);
            for (double& a : anchor) a = rng.uniform(0.2, 0.8);
            for (std::size_t i = 0; i < n - tight; ++i) {
                for (int j = 0; j < dim; ++j) out.push_back(rng.uniform());
            }
            for (std::size_t i = 0; i < tight; ++i) {
                for (int j = 0; j < dim; ++j) out.push_back(anchor[j] + rng.uniform(0.0, width));
            }
            break;
        }
    }
}

}  // namespace

std::vector<double> dedupe(int dim, const std::vector<double>& points, std::vector<std::size_t>* mapping) {
    const std::size_t n = points.size() / dim;
    std::map<std::vector<double>, std::size_t> seen;
    std::vector<double> out;
    if (mapping) mapping->assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(points.begin() + i * dim, points.begin() + (i + 1) * dim);
        auto [it, fresh] = seen.emplace(row, out.size() / dim);
        if (fresh) out.insert(out.end(), row.begin(), row.end());
        if (mapping) (*mapping)[i] = it->second;
    }
    return out;
}

std::vector<double> generate(Distribution dist, std::size_t n, int dim, std::uint64_t seed) {
    if (dim < 1 || dim > kMaxDim) throw InvalidInput("dimension out of range");
    Rng rng(mix_seed(dist, n, dim, seed));
    std::vector<double> out;
    out.reserve(n * dim);
    draw(dist, n, dim, rng, out);
    out = dedupe(dim, out, nullptr);
    // Collisions are rare outside the lattice; top up until n rows are distinct.
    for (int round = 0; out.size() < n * dim && round < 64; ++round) {
        const std::size_t missing = n - out.size() / dim;
        draw(dist == Distribution::Grid ? Distribution::Uniform : dist, missing, dim, rng, out);
        out = dedupe(dim, out, nullptr);
    }
    return out;
}

}  // namespace rnnq::corpus
