#include "rnnq/points_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rnnq/geometry.hpp"

namespace rnnq::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// "# d=<int>" (spaces allowed around tokens); returns 0 when the line is not a header.
int header_dim(std::string_view line, std::size_t lineno) {
    std::string_view rest = trim(line.substr(1));
    if (rest.substr(0, 2) != "d=" && rest.substr(0, 1) != "d") return 0;
    rest = trim(rest.substr(1));
    if (rest.empty() || rest.front() != '=') return 0;
    rest = trim(rest.substr(1));
    int d = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), d);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) throw ParseError(lineno, "malformed dimension header");
    if (d < 1 || d > kMaxDim) {
        throw ParseError(lineno, "dimension " + std::to_string(d) + " outside [1, " + std::to_string(kMaxDim) + "]");
    }
    return d;
}

}  // namespace

PointsFile parse_points(std::istream& in) {
    PointsFile file;
    int declared = 0;
    std::string raw;
    std::size_t lineno = 0;
    bool seen_data = false;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (!seen_data && declared == 0) declared = header_dim(line, lineno);
            continue;
        }
        int fields = 0;
        std::string_view rest = line;
        for (;;) {
            const auto comma = rest.find(',');
            const std::string_view tok = trim(rest.substr(0, comma));
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
                throw ParseError(lineno, "not a number: '" + std::string(tok) + "'");
            }
            if (!std::isfinite(v)) throw ParseError(lineno, "non-finite coordinate");
            file.coords.push_back(v);
            ++fields;
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (!seen_data) {
            if (declared != 0 && fields != declared) {
                throw ParseError(lineno, "expected " + std::to_string(declared) + " coordinates, found " +
                                             std::to_string(fields));
            }
            if (fields > kMaxDim) {
                throw ParseError(lineno, "dimension " + std::to_string(fields) + " above " + std::to_string(kMaxDim));
            }
            file.dim = fields;
            seen_data = true;
        } else if (fields != file.dim) {
            throw ParseError(lineno, "expected " + std::to_string(file.dim) + " coordinates, found " +
                                         std::to_string(fields));
        }
    }
    if (!seen_data) throw ParseError(lineno, "no points");
    return file;
}

PointsFile read_points_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_points(in);
}

std::string format_result_line(std::span<const double> q, std::span<const PointIndex> rnn, std::int64_t ns) {
    nlohmann::ordered_json j;
    j["q"] = std::vector<double>(q.begin(), q.end());
    j["rnn"] = std::vector<PointIndex>(rnn.begin(), rnn.end());
    j["ns"] = ns;
    return j.dump();
}

}  // namespace rnnq::cli
