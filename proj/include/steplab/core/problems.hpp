#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "steplab/core/point.hpp"

namespace steplab {

/// Deterministic objective F with a closed-form gradient (or subgradient).
class Objective {
public:
    virtual ~Objective() = default;

    virtual double value(const Point& x) const = 0;
    virtual Point gradient(const Point& x) const = 0;

    /// F(x) - F(x*) computed without cancellation, when the objective can.
    virtual std::optional<double> suboptimality(const Point& /*x*/) const { return std::nullopt; }
};

/// Objective written as a finite sum (1/n) sum_i l_i(x) + reg(x), which
/// supports exact minibatch sampling.
class FiniteSumObjective : public Objective {
public:
    struct BatchResult {
        double value;
        Point gradient;
    };

    virtual std::size_t num_samples() const = 0;

    /// Unbiased estimate of (F, grad F) from the given sample indices.
    virtual BatchResult batch(const Point& x, std::span<const std::size_t> indices) const = 0;
};

/// A named objective together with whatever is known about it in closed form.
struct DeterministicProblem {
    std::string name;
    int dim = 0;
    std::shared_ptr<const Objective> objective;
    std::optional<Point> minimizer;
    std::optional<double> lipschitz;  // G, a bound on gradient norms
    bool convex = true;

    double value(const Point& x) const { return objective->value(x); }
    Point gradient(const Point& x) const { return objective->gradient(x); }

    std::optional<double> optimal_value() const;

    /// F(x) - F(x*), or nullopt when x* is unknown.
    std::optional<double> gap(const Point& x) const;

    /// D = ||x0 - x*||, or nullopt when x* is unknown.
    std::optional<double> distance_from(const Point& x0) const;
};

/// Names accepted by make_problem.
std::span<const std::string_view> problem_names();

/// Seeded problem suite: quadratic, abs-shift, logsumexp, logistic-synthetic.
/// Same (name, p, seed) always produces the same problem.
DeterministicProblem make_problem(std::string_view name, int p, std::uint64_t seed);

/// F(x) = 1/2 x'Ax - b'x.
DeterministicProblem make_quadratic(const Eigen::MatrixXd& a, const Point& b);

/// F(x) = ||x - c||_1.
DeterministicProblem make_abs_shift(const Point& c);

}  // namespace steplab
