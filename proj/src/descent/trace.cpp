#include "steplab/descent/trace.hpp"

#include <algorithm>
#include <limits>

namespace steplab {

namespace {
constexpr double kDivergenceNorm = 1e12;
}

bool has_diverged(const Point& x) { return !x.allFinite() || x.norm() > kDivergenceNorm; }

TraceRecord& TraceBuilder::add(std::size_t k, const Point& x, std::uint64_t oracle_calls,
                               std::optional<double> d) {
    TraceRecord rec;
    rec.k = k;
    rec.gamma = std::numeric_limits<double>::quiet_NaN();
    rec.grad_norm = std::numeric_limits<double>::quiet_NaN();
    rec.d = d;
    rec.oracle_calls = oracle_calls;
    rec.gap = problem_.gap(x);
    if (rec.gap) {
        best_ = best_ ? std::min(*best_, *rec.gap) : *rec.gap;
    }
    rec.best_gap = best_;
    trace_.records.push_back(rec);
    return trace_.records.back();
}

void TraceBuilder::set_step(double gamma, double grad_norm) {
    trace_.records.back().gamma = gamma;
    trace_.records.back().grad_norm = grad_norm;
}

RunTrace TraceBuilder::finish(Point final_x, RunStatus status) && {
    trace_.final_x = std::move(final_x);
    trace_.status = status;
    return std::move(trace_);
}

}  // namespace steplab
