#include "steplab/bench/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace steplab::bench {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<double> parse_real(const std::string& s, const std::string& where) {
    if (s.empty()) {
        return std::nullopt;
    }
    if (s == "nan") {
        return std::nan("");
    }
    if (s == "inf" || s == "-inf") {
        return s[0] == '-' ? -INFINITY : INFINITY;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw CsvError(where + ": '" + s + "' is not a number");
    }
    return v;
}

std::uint64_t parse_count(const std::string& s, const std::string& where) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw CsvError(where + ": '" + s + "' is not a nonnegative integer");
    }
    return v;
}

}  // namespace

std::string format_real(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (const char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

std::string trace_to_csv(const RunTrace& trace) {
    std::string out = kTraceHeader;
    out += '\n';
    const auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
    for (const auto& r : trace.records) {
        out += std::to_string(r.k);
        out += ',';
        out += std::isnan(r.gamma) ? std::string() : format_real(r.gamma);
        out += ',';
        out += opt(r.d);
        out += ',';
        out += opt(r.gap);
        out += ',';
        out += opt(r.best_gap);
        out += ',';
        out += std::to_string(r.oracle_calls);
        out += '\n';
    }
    return out;
}

std::vector<TraceRow> parse_trace_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw CsvError(source + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kTraceHeader) {
        throw CsvError(source + ": header mismatch, expected '" + std::string(kTraceHeader) + "'");
    }
    std::vector<TraceRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::string where = source + ":" + std::to_string(lineno);
        const auto f = split(line);
        if (f.size() != 6) {
            throw CsvError(where + ": expected 6 fields, got " + std::to_string(f.size()));
        }
        TraceRow r;
        r.k = parse_count(f[0], where);
        r.gamma = parse_real(f[1], where);
        r.d = parse_real(f[2], where);
        r.gap = parse_real(f[3], where);
        r.best_gap = parse_real(f[4], where);
        r.oracle_calls = parse_count(f[5], where);
        rows.push_back(r);
    }
    if (rows.empty()) {
        throw CsvError(source + ": no data rows");
    }
    return rows;
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CsvError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_trace_csv(ss.str(), path);
}

}  // namespace steplab::bench
