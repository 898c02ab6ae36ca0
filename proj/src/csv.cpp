#include "riskalloc/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "riskalloc/errors.hpp"

namespace riskalloc::csv {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

namespace {

// One "index,value" record per line after a header; indices must run 1..N.
std::vector<double> read_indexed_column(std::istream& in, const std::string& source,
                                        const std::string& expected_header) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header)
        throw ParseError(source, line_no, "expected header '" + expected_header + "'");

    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw ParseError(source, line_no, "expected two comma-separated fields");

        int index = 0;
        {
            auto [ptr, ec] = std::from_chars(line.data(), line.data() + comma, index);
            if (ec != std::errc() || ptr != line.data() + comma)
                throw ParseError(source, line_no, "bad index '" + line.substr(0, comma) + "'");
        }
        if (index != static_cast<int>(values.size()) + 1)
            throw ParseError(source, line_no,
                             "indices must run 1.." + std::to_string(values.size() + 1) +
                                 " without gaps");

        double value = 0.0;
        {
            const char* begin = line.data() + comma + 1;
            const char* end = line.data() + line.size();
            auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc() || ptr != end)
                throw ParseError(source, line_no, "bad number '" + line.substr(comma + 1) + "'");
        }
        values.push_back(value);
    }
    if (values.empty()) throw ParseError(source, line_no + 1, "no data rows");
    return values;
}

std::ifstream open_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 1, "cannot open file");
    return in;
}

}  // namespace

MortalityCurve read_mortality(std::istream& in, const std::string& source) {
    return MortalityCurve(read_indexed_column(in, source, "t,q"));
}

MortalityCurve load_mortality(const std::filesystem::path& path) {
    auto in = open_file(path);
    return read_mortality(in, path.string());
}

RateCurve read_rates(std::istream& in, const std::string& source) {
    return RateCurve(read_indexed_column(in, source, "t,rate"));
}

RateCurve load_rates(const std::filesystem::path& path) {
    auto in = open_file(path);
    return read_rates(in, path.string());
}

std::vector<double> read_target(std::istream& in, const std::string& source) {
    return read_indexed_column(in, source, "T,premium");
}

std::vector<double> load_target(const std::filesystem::path& path) {
    auto in = open_file(path);
    return read_target(in, path.string());
}

}  // namespace riskalloc::csv
