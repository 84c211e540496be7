#include "steplab/core/ray.hpp"

#include "steplab/errors.hpp"

namespace steplab {

RayRestriction::RayRestriction(std::shared_ptr<const StochasticOracle> oracle, Point origin, Point direction)
    : oracle_(std::move(oracle)), origin_(std::move(origin)), direction_(std::move(direction)) {
    if (!oracle_) {
        throw InvalidArgument("RayRestriction: null oracle");
    }
    if (origin_.size() != oracle_->dim() || direction_.size() != oracle_->dim()) {
        throw InvalidArgument("RayRestriction: dimension mismatch");
    }
    require_finite(origin_, "RayRestriction origin");
    require_finite(direction_, "RayRestriction direction");
    if (direction_.squaredNorm() == 0.0) {
        throw DegenerateDirection("RayRestriction: zero search direction");
    }
}

RaySample RayRestriction::sample(double t, std::uint64_t j) const {
    const OracleSample s = oracle_->eval(point_at(t), j);
    return {s.value, -direction_.dot(s.gradient)};
}

RayRestriction restrict(std::shared_ptr<const StochasticOracle> oracle, const Point& x_k, const Point& g_k) {
    return RayRestriction(std::move(oracle), x_k, g_k);
}

}  // namespace steplab
