#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "steplab/core/oracle.hpp"

namespace steplab::bench {

/// Invalid experiment configuration. what() carries "line N: ..." when the
/// offending token can be located in the source text.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, std::optional<int> line = std::nullopt);
    std::optional<int> line() const noexcept { return line_; }

private:
    std::optional<int> line_;
};

struct ProblemSpec {
    std::string name = "quadratic";
    int p = 5;
    std::optional<std::uint64_t> seed;  // absent: each run seed builds its own instance
};

struct NoiseSpec {
    enum class Kind { none, additive, minibatch };
    Kind kind = Kind::none;
    double sigma_f = 0.0;
    double sigma_g = 0.0;
    std::size_t batch_size = 1;

    NoiseModel model() const;
};

/// Optimizer name plus hyperparameters. Fields not used by the named
/// optimizer are rejected at parse time.
struct OptimizerSpec {
    std::string name;
    std::string label;  // defaults to name
    std::optional<double> gamma;
    std::optional<double> distance;
    std::optional<double> lipschitz;
    double d0 = 1e-6;
    double phi = 1.0;
    double gamma0 = 1.0;
    double c1 = 0.05;
    double c2 = 0.5;
    double c_w = 0.3;
    std::string pls_mode = "plain";
    std::string d_limit_mode = "literal-floor";
    std::size_t var_samples = 10;
    bool fold_search_effort = false;
};

struct ExperimentConfig {
    ProblemSpec problem;
    NoiseSpec noise;
    std::vector<OptimizerSpec> optimizers;
    std::size_t steps = 100;
    std::vector<std::uint64_t> seeds{0};
    std::optional<std::vector<double>> x0;  // default: zeros
    std::string output = "steplab-out";
};

/// Optimizer names understood by the harness.
const std::vector<std::string>& optimizer_names();

/// Parses and validates a JSON document. Unknown keys, wrong types and
/// out-of-range values raise ConfigError with the source line.
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses a config file.
ExperimentConfig load_config(const std::string& path);

/// Checks cross-field constraints (known problem, dimensions, seeds).
void validate(const ExperimentConfig& cfg);

}  // namespace steplab::bench
