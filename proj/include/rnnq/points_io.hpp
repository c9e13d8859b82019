#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "rnnq/allnn.hpp"
#include "rnnq/errors.hpp"

namespace rnnq::cli {

/// Malformed points file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct PointsFile {
    int dim = 0;
    std::vector<double> coords;  // row-major
    std::size_t count() const { return dim ? coords.size() / dim : 0; }
};

/// One point per line, comma-separated decimals; optional leading "# d=<int>"
/// header; other '#' lines and blank lines are skipped.
PointsFile parse_points(std::istream& in);
PointsFile read_points_file(const std::string& path);

/// {"q":[...],"rnn":[...],"ns":<int>}
std::string format_result_line(std::span<const double> q, std::span<const PointIndex> rnn, std::int64_t ns);

}  // namespace rnnq::cli
