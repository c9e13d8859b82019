#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace rnnq::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitDuplicates = 2,
    kExitSpread = 3,
    kExitParse = 4,
    kExitDimension = 5,
    kExitOther = 6,
};

struct BuildOptions {
    std::string input;
    std::string output;
    bool dedupe = false;  // also writes <output>.map
};

struct QueryOptions {
    std::string index;
    std::string queries;
    std::string output;
    bool timing = true;  // false writes ns = 0 so output is reproducible
};

struct CheckOptions {
    std::size_t n = 1000;
    int d = 2;
    std::string dist = "uniform";
    std::size_t trials = 20;
    std::size_t queries = 100;
    std::uint64_t seed = 1;
    std::string report;  // JSON lines, optional
    bool inject_fault = false;
};

struct BenchOptions {
    std::size_t n = 100000;
    int d = 2;
    std::string dist = "uniform";
    std::size_t queries = 100000;
    std::uint64_t seed = 1;
};

int run_build(const BuildOptions& opt, std::ostream& out, std::ostream& err);
int run_query(const QueryOptions& opt, std::ostream& out, std::ostream& err);
int run_check(const CheckOptions& opt, std::ostream& out, std::ostream& err);
int run_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace rnnq::cli
