#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "steplab/core/oracle.hpp"
#include "steplab/core/point.hpp"
#include "steplab/dadapt/dadapt.hpp"
#include "steplab/descent/trace.hpp"
#include "steplab/linesearch/search.hpp"

namespace steplab {

enum class PlsMode { plain, d_informed };

struct CombinedConfig {
    double d0 = kDefaultD0;
    ScaleSchedule phi;  // empty means constant 1
    WolfeParams wolfe;
    PlsMode pls_mode = PlsMode::plain;
    DLimitMode d_limit_mode = DLimitMode::literal_floor;
    std::size_t var_estimation_samples = 10;
    std::size_t steps = 100;
    // Experimental: charge every line-search evaluation to r,
    // r += evals * gamma^2 ||g||^2 instead of one realized step.
    bool fold_search_effort = false;

    /// Throws InvalidArgument on out-of-range fields.
    void validate() const;
};

/// Noise variances at a point: values, and directional derivatives along a
/// unit direction.
struct VarEstimate {
    double var;
    double dvar;
};

/// Sample variances of m draws at x0 (minibatches j0 .. j0+m-1). The
/// derivative variance is taken along the first draw's normalized gradient.
/// Both are floored at 1e-12.
VarEstimate estimate_var(const StochasticOracle& oracle, const Point& x0, std::size_t m, std::uint64_t j0 = 0);

/// A trace plus the per-iteration line-search outcomes that produced it.
struct CombinedRun {
    RunTrace trace;
    VarEstimate initial_noise{};
    std::vector<LineSearchOutcome> searches;
    std::uint64_t final_j = 0;
};

/// SGD whose D-Adapted step seeds a probabilistic line search each
/// iteration; the accepted step is what moves x and what updates s and r.
CombinedRun sgd_pls_dadapt_run(const StochasticOracle& oracle, const Point& x0, const CombinedConfig& cfg);

struct SgdPlsConfig {
    double gamma0 = 1.0;
    WolfeParams wolfe;
    std::size_t var_estimation_samples = 10;
    std::size_t steps = 100;
};

/// SGD with a probabilistic line search seeded by the previous accepted step.
CombinedRun sgd_pls_run(const StochasticOracle& oracle, const Point& x0, const SgdPlsConfig& cfg);

}  // namespace steplab
