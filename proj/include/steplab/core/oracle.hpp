#pragma once

#include <cstdint>
#include <variant>

#include "steplab/core/point.hpp"
#include "steplab/core/problems.hpp"

namespace steplab {

struct NoNoise {};

/// Adds N(0, sigma_f^2) to values and i.i.d. N(0, sigma_g^2) to each gradient entry.
struct AdditiveGaussian {
    double sigma_f = 0.0;
    double sigma_g = 0.0;
};

/// Uniform minibatch (with replacement) over a finite-sum objective.
struct MinibatchNoise {
    std::size_t batch_size = 1;
};

using NoiseModel = std::variant<NoNoise, AdditiveGaussian, MinibatchNoise>;

/// One stochastic draw f(x, xi_j) and g in the subdifferential of f(., xi_j).
struct OracleSample {
    double value;
    Point gradient;
};

/// Seeded source of noisy value/subgradient pairs over a deterministic problem.
/// eval is a pure function of (seed, j, x); the minibatch counter j is owned
/// by whichever run drives the oracle.
class StochasticOracle {
public:
    StochasticOracle(DeterministicProblem problem, NoiseModel noise, std::uint64_t seed);

    OracleSample eval(const Point& x, std::uint64_t j) const;

    const DeterministicProblem& problem() const noexcept { return problem_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    std::uint64_t seed() const noexcept { return seed_; }
    int dim() const noexcept { return problem_.dim; }
    bool noise_free() const noexcept { return std::holds_alternative<NoNoise>(noise_); }

private:
    DeterministicProblem problem_;
    NoiseModel noise_;
    std::uint64_t seed_;
    const FiniteSumObjective* finite_sum_ = nullptr;
};

}  // namespace steplab
