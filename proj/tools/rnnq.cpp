// rnnq: build, query, check and benchmark reverse-nearest-neighbor indexes.

#include <iostream>

#include <CLI11.hpp>

#include "rnnq/commands.hpp"
#include "rnnq/parallel.hpp"

int main(int argc, char** argv) {
    using namespace rnnq::cli;
    rnnq::configure_threads();

    CLI::App app{"Exact reverse nearest neighbor queries over a compressed quadtree"};
    app.require_subcommand(1);

    BuildOptions build;
    auto* b = app.add_subcommand("build", "Build an index from a points file");
    b->add_option("--input", build.input, "Points file (CSV)")->required();
    b->add_option("--output", build.output, "Index file to write")->required();
    b->add_flag("--dedupe", build.dedupe, "Merge exact duplicates; writes <output>.map");

    QueryOptions query;
    bool no_timing = false;
    auto* q = app.add_subcommand("query", "Answer queries against an index");
    q->add_option("--index", query.index, "Index file")->required();
    q->add_option("--queries", query.queries, "Query points file (CSV)")->required();
    q->add_option("--output", query.output, "Results file (JSON lines); '-' for stdout")->required();
    q->add_flag("--no-timing", no_timing, "Write ns = 0 for reproducible output");

    CheckOptions check;
    auto* c = app.add_subcommand("check", "Compare the index with brute-force oracles on generated data");
    c->add_option("--n", check.n, "Points per instance")->capture_default_str();
    c->add_option("--d", check.d, "Dimension (1-6)")->capture_default_str();
    c->add_option("--dist", check.dist, "uniform|gaussian|grid|collinear|twoscale")->capture_default_str();
    c->add_option("--trials", check.trials, "Instances")->capture_default_str();
    c->add_option("--queries", check.queries, "Queries per instance")->capture_default_str();
    c->add_option("--seed", check.seed, "Base seed")->capture_default_str();
    c->add_option("--report", check.report, "Also write results as JSON lines");
    c->add_flag("--inject-fault", check.inject_fault, "Corrupt one candidate list")->group("");

    BenchOptions bench;
    auto* k = app.add_subcommand("bench", "Measure build and query performance");
    k->add_option("--n", bench.n, "Points")->capture_default_str();
    k->add_option("--d", bench.d, "Dimension")->capture_default_str();
    k->add_option("--dist", bench.dist, "uniform|gaussian|grid|collinear|twoscale")->capture_default_str();
    k->add_option("--queries", bench.queries, "Queries")->capture_default_str();
    k->add_option("--seed", bench.seed, "Seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitOther;
    }

    if (*b) return run_build(build, std::cout, std::cerr);
    if (*q) {
        query.timing = !no_timing;
        return run_query(query, std::cout, std::cerr);
    }
    if (*c) return run_check(check, std::cout, std::cerr);
    return run_bench(bench, std::cout, std::cerr);
}
