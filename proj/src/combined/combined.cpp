#include "steplab/combined/combined.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "steplab/core/ray.hpp"
#include "steplab/errors.hpp"

namespace steplab {

namespace {

constexpr double kVarianceFloor = 1e-12;

// The oracle outlives every ray built during a run, so rays borrow it.
std::shared_ptr<const StochasticOracle> borrow(const StochasticOracle& oracle) {
    return std::shared_ptr<const StochasticOracle>(std::shared_ptr<const StochasticOracle>(), &oracle);
}

double sample_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (const double x : v) {
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return ss / static_cast<double>(v.size() - 1);
}

void check_start(const StochasticOracle& oracle, const Point& x0, std::size_t steps, const char* who) {
    if (steps < 1) {
        throw InvalidArgument(std::string(who) + ": steps must be >= 1");
    }
    if (x0.size() != oracle.dim()) {
        throw InvalidArgument(std::string(who) + ": x0 dimension mismatch");
    }
    require_finite(x0, who);
}

// Noise state carried between iterations. The derivative variance is kept
// per unit direction and rescaled by ||g_k||^2 for each new ray.
struct NoiseCarry {
    double var;
    double dvar_unit;
};

using SearchFn = std::function<LineSearchOutcome(const Ray&, double y0, double dy0, double seed, double var,
                                                 double dvar, std::uint64_t j, double g_norm)>;

struct StepResult {
    double gamma;
    std::size_t evaluations = 0;
};

// Runs one line search from x along -g (seeded at `seed`), threading j and
// the noise estimates. A zero gradient keeps the seed step, which moves nothing.
StepResult search_step(const StochasticOracle& oracle, const Point& x, const OracleSample& s, double seed,
                       std::uint64_t& j, NoiseCarry& noise, const SearchFn& search, CombinedRun& run) {
    const double g_sq = s.gradient.squaredNorm();
    if (!(g_sq > 0.0)) {
        return {seed, 0};
    }
    const RayRestriction ray = restrict(borrow(oracle), x, s.gradient);
    LineSearchOutcome out = search(ray, s.value, -g_sq, seed, noise.var, noise.dvar_unit * g_sq, j, std::sqrt(g_sq));
    j = out.j;
    noise.var = out.var.value_or(noise.var);
    noise.dvar_unit = out.dvar.value_or(noise.dvar_unit * g_sq) / g_sq;
    const StepResult res{out.gamma, out.evaluations};
    out.lists = {};
    run.searches.push_back(std::move(out));
    return res;
}

}  // namespace

void CombinedConfig::validate() const {
    if (!(d0 > 0.0) || !std::isfinite(d0)) {
        throw InvalidArgument("CombinedConfig: d0 must be positive");
    }
    wolfe.validate();
    if (var_estimation_samples < 2) {
        throw InvalidArgument("CombinedConfig: var_estimation_samples must be >= 2");
    }
    if (steps < 1) {
        throw InvalidArgument("CombinedConfig: steps must be >= 1");
    }
}

VarEstimate estimate_var(const StochasticOracle& oracle, const Point& x0, std::size_t m, std::uint64_t j0) {
    if (m < 2) {
        throw InvalidArgument("estimate_var: need m >= 2");
    }
    std::vector<double> values;
    std::vector<double> slopes;
    values.reserve(m);
    slopes.reserve(m);
    Point dir;
    for (std::size_t i = 0; i < m; ++i) {
        const OracleSample s = oracle.eval(x0, j0 + i);
        if (i == 0) {
            const double n = s.gradient.norm();
            dir = n > 0.0 ? Point(s.gradient / n) : Point::Zero(s.gradient.size());
        }
        values.push_back(s.value);
        slopes.push_back(dir.dot(s.gradient));
    }
    return {std::max(sample_variance(values), kVarianceFloor), std::max(sample_variance(slopes), kVarianceFloor)};
}

CombinedRun sgd_pls_dadapt_run(const StochasticOracle& oracle, const Point& x0, const CombinedConfig& cfg) {
    cfg.validate();
    check_start(oracle, x0, cfg.steps, "sgd_pls_dadapt_run");

    CombinedRun run;
    std::uint64_t j = 0;
    run.initial_noise = estimate_var(oracle, x0, cfg.var_estimation_samples, j);
    j += cfg.var_estimation_samples;
    NoiseCarry noise{run.initial_noise.var, run.initial_noise.dvar};

    TraceBuilder trace(oracle.problem());
    Point x = x0;
    std::optional<DAdaptState> st;
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const std::uint64_t calls_before = j;
        const OracleSample s = oracle.eval(x, j);
        ++j;
        const double g_norm = s.gradient.norm();
        if (!st) {
            st = DAdaptState::initial(cfg.d0, g_norm, x.size());
        }
        st->phi = scale_at(cfg.phi, k);
        trace.add(k, x, calls_before, st->d);
        const double seed = dadapt_step_size(*st);

        const double d_k = st->d;
        const SearchFn step_search = [&cfg, d_k](const Ray& ray, double y0, double dy0, double seed_step, double var,
                                                 double dvar, std::uint64_t jj, double gn) {
            if (cfg.pls_mode == PlsMode::plain) {
                return pls(ray, y0, dy0, seed_step, var, dvar, cfg.wolfe, jj);
            }
            return d_informed_pls(ray, y0, dy0, seed_step, var, dvar, cfg.wolfe, jj, d_k, gn, cfg.d_limit_mode);
        };
        StepResult step;
        try {
            step = search_step(oracle, x, s, seed, j, noise, step_search, run);
        } catch (const NumericError&) {
            run.final_j = j;
            run.trace = std::move(trace).finish(x, RunStatus::diverged);
            return run;
        }
        trace.set_step(step.gamma, g_norm);
        Point next = x - step.gamma * s.gradient;
        if (has_diverged(next)) {
            run.final_j = j;
            run.trace = std::move(trace).finish(std::move(next), RunStatus::diverged);
            return run;
        }
        x = std::move(next);
        if (cfg.fold_search_effort && step.evaluations > 1) {
            DAdaptState folded = *st;
            folded.s += step.gamma * s.gradient;
            folded.r += static_cast<double>(step.evaluations) * step.gamma * step.gamma * s.gradient.squaredNorm();
            if (const auto d_hat = dadapt_lower_bound(folded.s, folded.r)) {
                folded.d = std::max(folded.d, *d_hat);
            }
            *st = std::move(folded);
        } else if (step.gamma > 0.0) {
            *st = dadapt_update(*st, step.gamma, s.gradient);
        }
    }
    trace.add(cfg.steps, x, j, st->d);
    run.final_j = j;
    run.trace = std::move(trace).finish(std::move(x), RunStatus::completed);
    return run;
}

CombinedRun sgd_pls_run(const StochasticOracle& oracle, const Point& x0, const SgdPlsConfig& cfg) {
    cfg.wolfe.validate();
    if (!(cfg.gamma0 > 0.0) || !std::isfinite(cfg.gamma0)) {
        throw InvalidArgument("sgd_pls_run: gamma0 must be positive");
    }
    if (cfg.var_estimation_samples < 2) {
        throw InvalidArgument("sgd_pls_run: var_estimation_samples must be >= 2");
    }
    check_start(oracle, x0, cfg.steps, "sgd_pls_run");

    CombinedRun run;
    std::uint64_t j = 0;
    run.initial_noise = estimate_var(oracle, x0, cfg.var_estimation_samples, j);
    j += cfg.var_estimation_samples;
    NoiseCarry noise{run.initial_noise.var, run.initial_noise.dvar};
    const SearchFn search = [&cfg](const Ray& ray, double y0, double dy0, double seed, double var, double dvar,
                                   std::uint64_t jj, double) {
        return pls(ray, y0, dy0, seed, var, dvar, cfg.wolfe, jj);
    };

    TraceBuilder trace(oracle.problem());
    Point x = x0;
    double gamma = cfg.gamma0;
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const std::uint64_t calls_before = j;
        const OracleSample s = oracle.eval(x, j);
        ++j;
        trace.add(k, x, calls_before, std::nullopt);
        StepResult step;
        try {
            step = search_step(oracle, x, s, gamma, j, noise, search, run);
        } catch (const NumericError&) {
            run.final_j = j;
            run.trace = std::move(trace).finish(x, RunStatus::diverged);
            return run;
        }
        trace.set_step(step.gamma, s.gradient.norm());
        Point next = x - step.gamma * s.gradient;
        if (has_diverged(next)) {
            run.final_j = j;
            run.trace = std::move(trace).finish(std::move(next), RunStatus::diverged);
            return run;
        }
        x = std::move(next);
        gamma = step.gamma;
    }
    trace.add(cfg.steps, x, j, std::nullopt);
    run.final_j = j;
    run.trace = std::move(trace).finish(std::move(x), RunStatus::completed);
    return run;
}

}  // namespace steplab
