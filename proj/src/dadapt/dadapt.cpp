#include "steplab/dadapt/dadapt.hpp"

#include <algorithm>
#include <cmath>

#include "steplab/errors.hpp"

namespace steplab {

DAdaptState DAdaptState::initial(double d0, double g0_norm, Eigen::Index p, double phi) {
    if (!(d0 > 0.0) || !std::isfinite(d0)) {
        throw InvalidArgument("DAdaptState: d0 must be positive");
    }
    if (!(g0_norm > 0.0)) {
        throw ZeroGradientStart("D-Adaptation: initial gradient is zero, step size undefined");
    }
    DAdaptState st;
    st.d = d0;
    st.s = Point::Zero(p);
    st.r = 0.0;
    st.g0_norm = g0_norm;
    st.phi = phi;
    return st;
}

double dadapt_step_size(const DAdaptState& st) {
    if (!(st.g0_norm > 0.0)) {
        throw ZeroGradientStart("D-Adaptation: initial gradient is zero, step size undefined");
    }
    return st.d * st.phi / st.g0_norm;
}

std::optional<double> dadapt_lower_bound(const Point& s, double r) {
    const double s_norm = s.norm();
    if (!(s_norm >= kSumEpsilon)) {
        return std::nullopt;
    }
    return (s.squaredNorm() - r) / s_norm;
}

DAdaptState dadapt_update(const DAdaptState& st, double gamma_k, const Point& g_k) {
    if (!(gamma_k > 0.0)) {
        throw InvalidArgument("dadapt_update: gamma must be positive");
    }
    DAdaptState next = st;
    next.s += gamma_k * g_k;
    next.r += gamma_k * gamma_k * g_k.squaredNorm();
    if (const auto d_hat = dadapt_lower_bound(next.s, next.r)) {
        next.d = std::max(next.d, *d_hat);
    }
    return next;
}

double dadapt_dual_averaging_bound(std::span<const DAdaptStep> history, std::optional<double> phi_next) {
    if (history.empty()) {
        throw InvalidArgument("dadapt_dual_averaging_bound: empty history");
    }
    Point sum = Point::Zero(history.front().g.size());
    double effort = 0.0;
    for (const auto& step : history) {
        sum += step.gamma * step.g;
        effort += step.phi * step.d * step.d * step.g.squaredNorm();
    }
    const double sum_norm = sum.norm();
    if (!(sum_norm >= kSumEpsilon)) {
        throw DegenerateSum("dadapt_dual_averaging_bound: weighted gradient sum vanishes");
    }
    const double phi = phi_next.value_or(history.back().phi);
    return (phi * sum.squaredNorm() - effort) / (2.0 * sum_norm);
}

double scale_at(const ScaleSchedule& phi, std::size_t k) {
    if (!phi) {
        return 1.0;
    }
    const double v = phi(k);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument("D-Adaptation: phi_k must be positive and finite");
    }
    return v;
}

RunTrace dadapt_sgd_run(const StochasticOracle& oracle, const Point& x0, const ScaleSchedule& phi,
                        double d0, std::size_t n) {
    if (n < 1) {
        throw InvalidArgument("dadapt_sgd_run: n must be >= 1");
    }
    if (x0.size() != oracle.dim()) {
        throw InvalidArgument("dadapt_sgd_run: x0 dimension mismatch");
    }
    require_finite(x0, "dadapt_sgd_run x0");

    TraceBuilder trace(oracle.problem());
    Point x = x0;
    std::uint64_t calls = 0;
    std::optional<DAdaptState> st;
    for (std::size_t k = 0; k < n; ++k) {
        const OracleSample s = oracle.eval(x, k);
        ++calls;
        if (!st) {
            st = DAdaptState::initial(d0, s.gradient.norm(), x.size());
        }
        st->phi = scale_at(phi, k);
        trace.add(k, x, calls - 1, st->d);
        const double gamma = dadapt_step_size(*st);
        trace.set_step(gamma, s.gradient.norm());
        Point next = x - gamma * s.gradient;
        if (has_diverged(next)) {
            return std::move(trace).finish(std::move(next), RunStatus::diverged);
        }
        x = std::move(next);
        *st = dadapt_update(*st, gamma, s.gradient);
    }
    trace.add(n, x, calls, st->d);
    return std::move(trace).finish(std::move(x), RunStatus::completed);
}

}  // namespace steplab
