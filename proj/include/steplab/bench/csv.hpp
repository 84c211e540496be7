#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "steplab/descent/trace.hpp"

namespace steplab::bench {

/// Header shared by every per-run trace file.
inline constexpr const char* kTraceHeader = "k,gamma_k,d_k,f_gap,best_f_gap,oracle_calls";

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// General-format rendering with 17 significant digits and a '.'
/// decimal point. Non-finite values render as "nan", "inf", "-inf".
std::string format_real(double v);

/// One trace row per record; missing values are empty fields.
std::string trace_to_csv(const RunTrace& trace);

struct TraceRow {
    std::uint64_t k = 0;
    std::optional<double> gamma;
    std::optional<double> d;
    std::optional<double> gap;
    std::optional<double> best_gap;
    std::uint64_t oracle_calls = 0;
};

/// Parses a trace CSV. Throws CsvError on a header mismatch, a malformed
/// row, or a file without data rows.
std::vector<TraceRow> parse_trace_csv(const std::string& text, const std::string& source = "<csv>");

std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace steplab::bench
