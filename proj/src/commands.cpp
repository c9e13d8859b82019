#include "rnnq/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "rnnq/errors.hpp"
#include "rnnq/oracle.hpp"
#include "rnnq/parallel.hpp"
#include "rnnq/points_io.hpp"
#include "rnnq/rnn_index.hpp"

namespace rnnq::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write " + path);
}

nlohmann::json stats_json(const IndexStats& s) {
    return {{"points", s.points},
            {"dim", s.dim},
            {"nodes", s.nodes},
            {"ordinary_internal", s.ordinary_internal},
            {"ordinary_leaves", s.ordinary_leaves},
            {"compressed", s.compressed},
            {"marked", s.marked},
            {"stored_owners", s.stored_owners},
            {"total_candidates", s.total_candidates},
            {"max_candidates", s.max_candidates},
            {"mean_candidates", s.mean_candidates},
            {"tree_depth", s.tree_depth},
            {"finger_depth", s.finger_depth},
            {"memory_bytes", s.memory_bytes}};
}

std::string format_list(std::span<const PointIndex> v) {
    std::string s = "{";
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(v[k]);
    }
    return s + "}";
}

std::string format_point(std::span<const double> q) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (std::size_t k = 0; k < q.size(); ++k) os << (k ? ", " : "") << q[k];
    os << ")";
    return os.str();
}

}  // namespace

int run_build(const BuildOptions& opt, std::ostream& out, std::ostream& err) {
    PointsFile file;
    try {
        file = read_points_file(opt.input);
    } catch (const ParseError& e) {
        err << "error: " << opt.input << ": " << e.what() << "\n";
        return kExitParse;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitOther;
    }

    std::vector<double> coords = std::move(file.coords);
    std::vector<std::size_t> mapping;
    if (opt.dedupe) coords = corpus::dedupe(file.dim, coords, &mapping);

    try {
        const RnnIndex index = RnnIndex::build(file.dim, coords);
        write_bytes(opt.output, index.serialize());
        if (opt.dedupe) {
            std::ofstream map(opt.output + ".map", std::ios::trunc);
            if (!map) throw Error("cannot write " + opt.output + ".map");
            for (std::size_t row = 0; row < mapping.size(); ++row) map << row << "," << mapping[row] << "\n";
        }
        const IndexStats s = index.stats();
        out << "built index: " << s.points << " points, d=" << s.dim << ", " << index.balls().size()
            << " balls, " << s.nodes << " nodes, max |L| = " << s.max_candidates << "\n";
    } catch (const DuplicatePoints& e) {
        err << "error: duplicate points at rows " << e.first() << " and " << e.second() << "\n";
        return kExitDuplicates;
    } catch (const SpreadTooLarge& e) {
        err << "error: spread too large: " << e.what() << "\n";
        return kExitSpread;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOk;
}

int run_query(const QueryOptions& opt, std::ostream& out, std::ostream& err) {
    RnnIndex index;
    try {
        index = RnnIndex::deserialize(read_bytes(opt.index));
    } catch (const Error& e) {
        err << "error: " << opt.index << ": " << e.what() << "\n";
        return kExitOther;
    }
    PointsFile file;
    try {
        file = read_points_file(opt.queries);
    } catch (const ParseError& e) {
        err << "error: " << opt.queries << ": " << e.what() << "\n";
        return kExitParse;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitOther;
    }
    if (file.dim != index.dim()) {
        err << "error: queries have dimension " << file.dim << ", index has dimension " << index.dim() << "\n";
        return kExitDimension;
    }

    const std::size_t d = static_cast<std::size_t>(file.dim);
    const auto count = static_cast<std::int64_t>(file.count());
    const std::span<const double> qs(file.coords);
    std::vector<std::string> lines(count);
    const auto start = Clock::now();
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < count; ++i) {
        const auto q = qs.subspan(i * d, d);
        const auto t0 = Clock::now();
        const auto rnn = index.query(q);
        const std::int64_t ns = opt.timing ? elapsed_ns(t0) : 0;
        lines[i] = format_result_line(q, rnn, ns);
    }
    const std::int64_t total = elapsed_ns(start);

    std::ofstream file_out;
    std::ostream* sink = &out;
    if (!opt.output.empty() && opt.output != "-") {
        file_out.open(opt.output, std::ios::trunc);
        if (!file_out) {
            err << "error: cannot write " << opt.output << "\n";
            return kExitOther;
        }
        sink = &file_out;
    }
    for (const std::string& line : lines) *sink << line << '\n';
    sink->flush();
    if (!*sink) {
        err << "error: write failed\n";
        return kExitOther;
    }
    err << "answered " << count << " queries in " << static_cast<double>(total) / 1e6 << " ms\n";
    return kExitOk;
}

int run_check(const CheckOptions& opt, std::ostream& out, std::ostream& err) {
    const auto dist = corpus::parse_distribution(opt.dist);
    if (!dist) {
        err << "error: unknown distribution '" << opt.dist << "'\n";
        return kExitOther;
    }
    if (opt.d < 1 || opt.d > 6) {
        err << "error: --d must be in [1, 6]\n";
        return kExitOther;
    }
    if (opt.n < 1 || opt.n > 100000) {
        err << "error: --n must be in [1, 100000]\n";
        return kExitOther;
    }

    std::ofstream report_file;
    if (!opt.report.empty()) {
        report_file.open(opt.report, std::ios::trunc);
        if (!report_file) {
            err << "error: cannot write " << opt.report << "\n";
            return kExitOther;
        }
    }

    bool all_passed = true;
    for (std::size_t t = 0; t < opt.trials; ++t) {
        const std::uint64_t seed = opt.seed + t;
        oracle::CheckReport report;
        report.n = opt.n;
        report.dim = opt.d;
        report.distribution = opt.dist;
        report.seed = seed;

        RnnIndex index;
        try {
            index = RnnIndex::build(opt.d, corpus::generate(*dist, opt.n, opt.d, seed));
        } catch (const Error& e) {
            report.add("build", false, e.what());
            out << report.to_text();
            if (report_file) report_file << report.to_json_lines();
            all_passed = false;
            continue;
        }

        if (opt.inject_fault && t == 0) {
            // Drop the last entry of the longest list.
            NodeId worst = kNoNode;
            for (NodeId id = 0; id < index.tree().size(); ++id) {
                if (index.tree().node(id).kind != NodeKind::Ordinary) continue;
                if (worst == kNoNode || index.candidates(id).size() > index.candidates(worst).size()) worst = id;
            }
            if (worst != kNoNode && !index.candidates(worst).empty()) {
                const auto cur = index.candidates(worst);
                index.replace_candidates_for_testing(worst, {cur.begin(), cur.end() - 1});
            }
        }

        const PointSet& pts = index.points();
        const std::vector<EmptyBall> balls =
            index.size() >= 2 ? oracle::allnn_brute_force(pts) : std::vector<EmptyBall>{};

        {
            std::string detail;
            for (std::size_t i = 0; i < balls.size() && detail.empty(); ++i) {
                const EmptyBall& a = balls[i];
                const EmptyBall& b = index.balls()[i];
                if (a.nn != b.nn || a.r_sq != b.r_sq) {
                    detail = "point " + std::to_string(i) + ": index nn " + std::to_string(b.nn) +
                             ", oracle nn " + std::to_string(a.nn);
                }
            }
            report.add("allnn_equivalence", detail.empty(), detail);
        }

        {
            const std::vector<double> probes = oracle::probe_queries(pts, balls, opt.queries, seed ^ 0x5bd1e995u);
            const std::size_t d = static_cast<std::size_t>(opt.d);
            const std::size_t m = index.tree().size();
            const double visit_cap = 2.0 * std::log2(static_cast<double>(m)) + 4.0;
            std::string mismatch, too_many, too_deep;
            std::size_t worst_answer = 0;
            int worst_visits = 0;
            for (std::size_t k = 0; k < opt.queries; ++k) {
                const auto y = std::span<const double>(probes).subspan(k * d, d);
                QueryTrace trace;
                const auto got = index.query_normalized(y, &trace);
                const auto want = oracle::rnn_brute_force(pts, balls, y);
                if (got != want && mismatch.empty()) {
                    mismatch = "query " + std::to_string(k) + " at normalized " + format_point(y) + ": index " +
                               format_list(got) + ", oracle " + format_list(want);
                }
                worst_answer = std::max(worst_answer, got.size());
                if (got.size() > answer_bound(opt.d) && too_many.empty()) {
                    too_many = "query " + std::to_string(k) + " has " + std::to_string(got.size()) + " answers";
                }
                worst_visits = std::max(worst_visits, trace.finger_visits);
                if (trace.finger_visits > visit_cap && too_deep.empty()) {
                    too_deep = "query " + std::to_string(k) + " visited " + std::to_string(trace.finger_visits) +
                               " finger nodes";
                }
            }
            report.add("query_equivalence", mismatch.empty(),
                       mismatch.empty() ? std::to_string(opt.queries) + " queries" : mismatch);
            report.add("answer_size", too_many.empty(),
                       too_many.empty() ? "max " + std::to_string(worst_answer) : too_many);
            std::ostringstream cap;
            cap << "max " << worst_visits << " <= " << visit_cap;
            report.add("finger_path", too_deep.empty(), too_deep.empty() ? cap.str() : too_deep);
            const std::size_t node_cap = 4 * (std::size_t{1} << opt.d) * index.size() + 1;
            report.add("node_count", m <= node_cap, std::to_string(m) + " nodes, cap " + std::to_string(node_cap));
        }

        for (oracle::CheckResult& r : oracle::candidate_semantics_check(index).results) {
            report.results.push_back(std::move(r));
        }
        if (balls.size() >= 2) {
            for (oracle::CheckResult& r : oracle::packing_check(pts, balls, 1000, seed).results) {
                report.results.push_back(std::move(r));
            }
        }

        out << report.to_text();
        if (report_file) report_file << report.to_json_lines();
        all_passed = all_passed && report.passed();
    }
    out << "check " << (all_passed ? "passed" : "FAILED") << ": " << opt.trials << " instances, n=" << opt.n
        << " d=" << opt.d << " dist=" << opt.dist << "\n";
    return all_passed ? kExitOk : kExitCheckFailed;
}

int run_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
    const auto dist = corpus::parse_distribution(opt.dist);
    if (!dist) {
        err << "error: unknown distribution '" << opt.dist << "'\n";
        return kExitOther;
    }
    if (opt.d < 1 || opt.d > kMaxDim || opt.n < 1) {
        err << "error: need n >= 1 and d in [1, " << kMaxDim << "]\n";
        return kExitOther;
    }

    const std::vector<double> coords = corpus::generate(*dist, opt.n, opt.d, opt.seed);
    RnnIndex index;
    const auto t0 = Clock::now();
    try {
        index = RnnIndex::build(opt.d, coords);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitOther;
    }
    const double build_s = static_cast<double>(elapsed_ns(t0)) / 1e9;

    // Queries uniform over the data bounding box, in original coordinates.
    const std::size_t d = static_cast<std::size_t>(opt.d);
    std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
    for (std::size_t i = 0; i < opt.n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], coords[i * d + j]);
            hi[j] = std::max(hi[j], coords[i * d + j]);
        }
    }
    corpus::Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<double> queries(opt.queries * d);
    for (std::size_t k = 0; k < opt.queries; ++k) {
        for (std::size_t j = 0; j < d; ++j) queries[k * d + j] = rng.uniform(lo[j], hi[j]);
    }

    std::vector<double> latency(opt.queries);
    double visits = 0.0;
    std::size_t answers = 0;
    std::vector<double> y(d);
    for (std::size_t k = 0; k < opt.queries; ++k) {
        const auto q = std::span<const double>(queries).subspan(k * d, d);
        const auto s = Clock::now();
        index.transform().apply(q, y);
        QueryTrace trace;
        const auto res = index.query_normalized(y, &trace);
        latency[k] = static_cast<double>(elapsed_ns(s));
        visits += trace.finger_visits;
        answers += res.size();
    }
    const auto tb = Clock::now();
    const auto batch = query_batch(index, queries);
    const double batch_s = static_cast<double>(elapsed_ns(tb)) / 1e9;

    std::vector<double> sorted = latency;
    std::sort(sorted.begin(), sorted.end());
    const auto pct = [&](double p) {
        if (sorted.empty()) return 0.0;
        const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size()))) - 1;
        return sorted[std::min(k, sorted.size() - 1)];
    };
    const double qn = std::max<double>(1.0, static_cast<double>(opt.queries));
    nlohmann::json j = {
        {"n", opt.n},
        {"d", opt.d},
        {"dist", opt.dist},
        {"queries", opt.queries},
        {"seed", opt.seed},
        {"threads", worker_count()},
        {"build_seconds", build_s},
        {"query_mean_ns", std::accumulate(latency.begin(), latency.end(), 0.0) / qn},
        {"query_median_ns", pct(0.5)},
        {"query_p99_ns", pct(0.99)},
        {"batch_seconds", batch_s},
        {"mean_finger_visits", visits / qn},
        {"mean_answer_size", static_cast<double>(answers) / qn},
        {"serialized_bytes", index.serialize().size()},
        {"stats", stats_json(index.stats())},
    };
    out << j.dump(2) << "\n";
    return batch.size() == opt.queries ? kExitOk : kExitOther;
}

}  // namespace rnnq::cli
