#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "steplab/core/point.hpp"
#include "steplab/core/problems.hpp"

namespace steplab {

enum class RunStatus { completed, diverged };

/// State of a run at iterate x_k.
///
/// gamma and grad_norm describe the step taken *from* x_k, so they are NaN on
/// the terminal record. oracle_calls counts every stochastic evaluation spent
/// before x_k was reached.
struct TraceRecord {
    std::size_t k = 0;
    double gamma = 0.0;
    std::optional<double> d;
    std::optional<double> gap;
    std::optional<double> best_gap;
    double grad_norm = 0.0;
    std::uint64_t oracle_calls = 0;
};

struct RunTrace {
    std::vector<TraceRecord> records;
    Point final_x;
    RunStatus status = RunStatus::completed;

    bool diverged() const noexcept { return status == RunStatus::diverged; }
};

/// Accumulates records, tracking the best gap seen so far.
class TraceBuilder {
public:
    explicit TraceBuilder(const DeterministicProblem& problem) : problem_(problem) {}

    /// Appends the record for iterate x at index k. Step fields start as NaN
    /// and are filled by set_step once the step is known.
    TraceRecord& add(std::size_t k, const Point& x, std::uint64_t oracle_calls, std::optional<double> d);

    void set_step(double gamma, double grad_norm);

    RunTrace finish(Point final_x, RunStatus status) &&;

private:
    const DeterministicProblem& problem_;
    RunTrace trace_;
    std::optional<double> best_;
};

/// Divergence rule shared by every run loop: non-finite entries or ||x|| > 1e12.
bool has_diverged(const Point& x);

}  // namespace steplab
