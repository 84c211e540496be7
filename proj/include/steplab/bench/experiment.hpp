#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "steplab/bench/config.hpp"
#include "steplab/core/oracle.hpp"
#include "steplab/descent/trace.hpp"

namespace steplab::bench {

/// Worker count: STEPLAB_THREADS when set to a positive integer, otherwise
/// the available hardware parallelism; never more than `tasks`.
std::size_t worker_count(std::size_t tasks);

/// Runs fn(i) for i in [0, n) on worker_count(n) threads. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// The problem instance used for a given run seed.
DeterministicProblem build_problem(const ExperimentConfig& cfg, std::uint64_t seed);

/// Configured x0, or zeros.
Point initial_point(const ExperimentConfig& cfg);

/// Runs one optimizer for `steps` iterations. Throws on invalid setups.
RunTrace run_optimizer(const OptimizerSpec& spec, const StochasticOracle& oracle, const Point& x0,
                       std::size_t steps);

struct RunResult {
    std::string label;
    std::string optimizer;
    std::uint64_t seed = 0;
    std::string status;  // completed | diverged | error
    std::string detail;
    RunTrace trace;
    std::string file;
};

struct ExperimentResult {
    std::filesystem::path out_dir;
    std::vector<RunResult> runs;
};

/// Executes every (optimizer, seed) pair and writes
///   <label>_seed<seed>.csv  per run,
///   runs.csv                one status line per run,
///   summary.csv             median and quartiles of final gaps per optimizer.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Linear-interpolation quantile of a nonempty sample, q in [0, 1].
double quantile(std::vector<double> v, double q);

}  // namespace steplab::bench
