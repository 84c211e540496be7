#pragma once

#include <cstddef>
#include <memory>
#include <variant>

#include "steplab/core/oracle.hpp"
#include "steplab/core/point.hpp"
#include "steplab/descent/trace.hpp"

namespace steplab {

/// x_k - gamma_k g_k.
Point gd_step(const Point& x_k, const Point& g_k, double gamma_k);

/// Step-size schedule for plain (sub)gradient descent.
///
/// optimal-rate uses D / (G sqrt(k+1)) so that k = 0 is defined. adagrad-norm
/// keeps the undecayed running sum of squared gradient norms.
class Schedule {
public:
    struct Constant {
        double gamma;
    };
    struct OptimalRate {
        double distance;
        double lipschitz;
    };
    struct AdaGradNorm {
        double distance;
    };

    static Schedule constant(double gamma);
    static Schedule optimal_rate(double distance, double lipschitz);
    static Schedule adagrad_norm(double distance);

    /// Step size for iteration k with gradient g_k. Mutates the AdaGrad accumulator.
    double step_size(std::size_t k, const Point& g_k);

    double accumulated_grad_sq() const noexcept { return accumulated_; }
    const std::variant<Constant, OptimalRate, AdaGradNorm>& kind() const noexcept { return kind_; }

private:
    explicit Schedule(std::variant<Constant, OptimalRate, AdaGradNorm> kind) : kind_(kind) {}

    std::variant<Constant, OptimalRate, AdaGradNorm> kind_;
    double accumulated_ = 0.0;
};

/// Plain SGD: for k < n draw g_k at minibatch k and step x <- x - gamma_k g_k.
/// The returned trace has n + 1 records unless the run diverged.
RunTrace sgd_run(const StochasticOracle& oracle, const Point& x0, Schedule schedule, std::size_t n);

}  // namespace steplab
