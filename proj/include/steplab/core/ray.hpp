#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "steplab/core/oracle.hpp"
#include "steplab/core/point.hpp"

namespace steplab {

/// Value and slope of a one-dimensional restriction at step t.
struct RaySample {
    double value;
    double derivative;
};

/// A stochastic univariate objective t -> f(x_k - t d, xi_j) probed by line searches.
class Ray {
public:
    virtual ~Ray() = default;
    virtual RaySample sample(double t, std::uint64_t j) const = 0;
};

/// Restriction of an oracle to the descent ray x_k - t g_k.
///
/// Moves along -g_k so that positive steps decrease a locally linear model;
/// derivative(t) = -g_k' grad f(x_k - t g_k, xi_j), which at t = 0 with the
/// exact gradient equals -||g_k||^2.
class RayRestriction final : public Ray {
public:
    RayRestriction(std::shared_ptr<const StochasticOracle> oracle, Point origin, Point direction);

    RaySample sample(double t, std::uint64_t j) const override;

    Point point_at(double t) const { return origin_ - t * direction_; }
    const Point& origin() const noexcept { return origin_; }
    const Point& direction() const noexcept { return direction_; }
    const StochasticOracle& oracle() const noexcept { return *oracle_; }

private:
    std::shared_ptr<const StochasticOracle> oracle_;
    Point origin_;
    Point direction_;
};

/// Builds the descent ray through x_k along -g_k. Throws DegenerateDirection for g_k = 0.
RayRestriction restrict(std::shared_ptr<const StochasticOracle> oracle, const Point& x_k, const Point& g_k);

/// Ray backed by an arbitrary callable, for synthetic line-search problems.
class FunctionRay final : public Ray {
public:
    using Fn = std::function<RaySample(double, std::uint64_t)>;
    explicit FunctionRay(Fn fn) : fn_(std::move(fn)) {}
    RaySample sample(double t, std::uint64_t j) const override { return fn_(t, j); }

private:
    Fn fn_;
};

}  // namespace steplab
