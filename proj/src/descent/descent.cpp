#include "steplab/descent/descent.hpp"

#include <cmath>

#include "steplab/errors.hpp"

namespace steplab {

Point gd_step(const Point& x_k, const Point& g_k, double gamma_k) {
    if (!(gamma_k > 0.0) || !std::isfinite(gamma_k)) {
        throw NumericError("gd_step: step size must be positive and finite");
    }
    if (x_k.size() != g_k.size()) {
        throw InvalidArgument("gd_step: dimension mismatch");
    }
    require_finite(x_k, "gd_step x_k");
    require_finite(g_k, "gd_step g_k");
    Point next = x_k - gamma_k * g_k;
    require_finite(next, "gd_step result");
    return next;
}

Schedule Schedule::constant(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("Schedule::constant: gamma must be positive");
    }
    return Schedule(Constant{gamma});
}

Schedule Schedule::optimal_rate(double distance, double lipschitz) {
    if (!(distance > 0.0) || !(lipschitz > 0.0)) {
        throw InvalidArgument("Schedule::optimal_rate: D and G must be positive");
    }
    return Schedule(OptimalRate{distance, lipschitz});
}

Schedule Schedule::adagrad_norm(double distance) {
    if (!(distance > 0.0)) {
        throw InvalidArgument("Schedule::adagrad_norm: D must be positive");
    }
    return Schedule(AdaGradNorm{distance});
}

double Schedule::step_size(std::size_t k, const Point& g_k) {
    if (const auto* c = std::get_if<Constant>(&kind_)) {
        return c->gamma;
    }
    if (const auto* o = std::get_if<OptimalRate>(&kind_)) {
        return o->distance / (o->lipschitz * std::sqrt(static_cast<double>(k) + 1.0));
    }
    const auto& a = std::get<AdaGradNorm>(kind_);
    accumulated_ += g_k.squaredNorm();
    if (!(accumulated_ > 0.0)) {
        throw DivisionGuard("Schedule::adagrad_norm: no gradient mass accumulated");
    }
    return a.distance / std::sqrt(accumulated_);
}

RunTrace sgd_run(const StochasticOracle& oracle, const Point& x0, Schedule schedule, std::size_t n) {
    if (n < 1) {
        throw InvalidArgument("sgd_run: n must be >= 1");
    }
    if (x0.size() != oracle.dim()) {
        throw InvalidArgument("sgd_run: x0 dimension mismatch");
    }
    require_finite(x0, "sgd_run x0");

    TraceBuilder trace(oracle.problem());
    Point x = x0;
    std::uint64_t calls = 0;
    for (std::size_t k = 0; k < n; ++k) {
        trace.add(k, x, calls, std::nullopt);
        const OracleSample s = oracle.eval(x, k);
        ++calls;
        const double gamma = schedule.step_size(k, s.gradient);
        trace.set_step(gamma, s.gradient.norm());
        Point next = x - gamma * s.gradient;
        if (has_diverged(next)) {
            return std::move(trace).finish(std::move(next), RunStatus::diverged);
        }
        x = std::move(next);
    }
    trace.add(n, x, calls, std::nullopt);
    return std::move(trace).finish(std::move(x), RunStatus::completed);
}

}  // namespace steplab
