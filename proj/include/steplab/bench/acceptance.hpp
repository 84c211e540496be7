#pragma once

#include <functional>
#include <string>
#include <vector>

#include "steplab/bench/csv.hpp"

namespace steplab::bench {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    // Smaller sample sizes (Monte Carlo draws, seeds) for a fast smoke pass.
    bool quick = false;
};

inline constexpr int kCriterionCount = 11;

/// Evaluates criterion `id` in [1, kCriterionCount]. Criterion 11 checks
/// harness determinism in-process; it does not rerun 1-10.
CriterionResult run_criterion(int id, const AcceptanceOptions& opts);

/// Runs criteria 1..kCriterionCount in order, reporting each as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3  title  (detail, 1.23 s)" style line.
std::string format_result(const CriterionResult& r);

/// Records k >= 1 whose running-minimum f_gap exceeds the constant-step
/// bound (D^2 + G^2 gamma^2 k) / (2 gamma k). Recomputes the running
/// minimum from f_gap instead of trusting best_f_gap.
std::size_t count_bound_violations(const std::vector<TraceRow>& rows, double gamma, double distance,
                                   double lipschitz);

}  // namespace steplab::bench
