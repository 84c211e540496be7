#include "steplab/linesearch/search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "steplab/errors.hpp"
#include "steplab/gp1d/hermite.hpp"

namespace steplab {

namespace {

constexpr double kDedupTolerance = 1e-12;

std::vector<double> sorted_unique(std::span<const double> steps) {
    std::vector<double> out(steps.begin(), steps.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void dedupe(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (const double t : v) {
        if (out.empty() || std::abs(t - out.back()) > kDedupTolerance * std::max(1.0, std::abs(t))) {
            out.push_back(t);
        }
    }
    v = std::move(out);
}

bool near_any(double t, std::span<const double> steps) {
    return std::any_of(steps.begin(), steps.end(),
                       [t](double s) { return std::abs(t - s) <= kDedupTolerance * std::max(1.0, std::abs(t)); });
}

struct CandidateSet {
    std::vector<double> steps;
    double extrapolation;
};

double extend_boundary(const GPSurrogate& gp, const std::vector<double>& steps) {
    const double top = steps.empty() ? 0.0 : steps.back();
    return top > 0.0 ? kExtendFactor * top : kExtendFactor * gp.normalization().t_ref;
}

// Interior minima between adjacent observed steps, then the segment from the
// largest step to `boundary`, then the boundary itself.
CandidateSet candidates_with_boundary(const GPSurrogate& gp, const std::vector<double>& steps, double boundary) {
    CandidateSet set;
    set.extrapolation = boundary;
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        if (auto t = gp.segment_minimum(steps[i], steps[i + 1])) {
            set.steps.push_back(*t);
        }
    }
    const double top = steps.empty() ? 0.0 : steps.back();
    if (boundary > top) {
        if (auto t = gp.segment_minimum(top, boundary)) {
            set.steps.push_back(*t);
        }
    }
    set.steps.push_back(boundary);
    std::erase_if(set.steps, [](double t) { return !(t > 0.0) || !std::isfinite(t); });
    dedupe(set.steps);
    std::erase_if(set.steps, [&](double t) { return near_any(t, steps); });
    return set;
}

double d_boundary(double extend, double d_k, double g_k_norm, DLimitMode mode) {
    const double bound = d_k / g_k_norm;
    return mode == DLimitMode::literal_floor ? std::max(bound, extend) : std::min(bound, extend);
}

std::size_t min_y_index(const SearchLists& lists) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < lists.size(); ++i) {
        if (best == 0 || lists.values[i] < lists.values[best]) {
            best = i;
        }
    }
    return best;
}

void finish_budget(LineSearchOutcome& out) {
    const std::size_t i = min_y_index(out.lists);
    out.gamma = out.lists.steps[i];
    out.y = out.lists.values[i];
    out.dy = out.lists.slopes[i];
    out.accepted_by = AcceptedBy::budget_min_y;
}

void check_search_inputs(double y0, double dy0, double gamma_prev) {
    if (!std::isfinite(y0) || !std::isfinite(dy0)) {
        throw NumericError("line search: non-finite initial observation");
    }
    if (!(dy0 < 0.0)) {
        throw NotDescentDirection("line search: initial slope must be negative");
    }
    if (!(gamma_prev > 0.0) || !std::isfinite(gamma_prev)) {
        throw InvalidArgument("line search: initial step must be positive");
    }
}

RaySample observe(const Ray& ray, double t, std::uint64_t j) {
    const RaySample s = ray.sample(t, j);
    if (!std::isfinite(s.value) || !std::isfinite(s.derivative)) {
        throw NumericError("line search: non-finite ray observation");
    }
    return s;
}

using CandidateFn = std::function<CandidateSet(const GPSurrogate&, const std::vector<double>&)>;

LineSearchOutcome probabilistic_search(const Ray& ray, double y0, double dy0, double gamma_prev, double var0,
                                       double dvar0, const WolfeParams& wp, std::uint64_t j,
                                       const CandidateFn& make_candidates) {
    wp.validate();
    check_search_inputs(y0, dy0, gamma_prev);
    if (!(var0 >= 0.0) || !(dvar0 >= 0.0)) {
        throw InvalidArgument("pls: noise variances must be nonnegative");
    }

    LineSearchOutcome out;
    out.lists.append(0.0, y0, dy0);
    GPSurrogate gp = GPSurrogate::init(y0, dy0, var0, dvar0, gamma_prev);
    double step = gamma_prev;
    bool accepted = false;
    while (out.evaluations < kSearchBudget) {
        const RaySample s = observe(ray, step, j);
        ++j;
        ++out.evaluations;
        out.lists.append(step, s.value, s.derivative);
        gp = gp.update({step, s.value, s.derivative, var0, dvar0});
        const double p = prob_wolfe(gp, step, wp);
        if (p > wp.c_w || wp.c_w == 0.0) {
            out.gamma = step;
            out.y = s.value;
            out.dy = s.derivative;
            out.accepted_by = AcceptedBy::wolfe_pass;
            accepted = true;
            break;
        }
        if (out.evaluations == kSearchBudget) {
            break;
        }
        const std::vector<double> observed = sorted_unique(out.lists.steps);
        const CandidateSet cands = make_candidates(gp, observed);
        if (cands.steps.empty()) {
            break;
        }
        const std::vector<double> ei = expected_improvement(gp, cands.steps);
        std::vector<double> score(cands.steps.size());
        for (std::size_t i = 0; i < cands.steps.size(); ++i) {
            score[i] = prob_wolfe(gp, cands.steps[i], wp) * ei[i];
        }
        const auto pick = select_candidate(cands.steps, score);
        if (!pick && near_any(cands.extrapolation, observed)) {
            break;
        }
        step = pick ? cands.steps[*pick] : cands.extrapolation;
    }
    if (!accepted) {
        finish_budget(out);
    }
    out.j = j;
    out.lists.j = j;

    // Running noise estimates from residuals against the final posterior mean.
    double res_f = 0.0;
    double res_d = 0.0;
    for (const auto& o : gp.observations()) {
        const GPMoments m = gp.raw_moments(o.t);
        res_f += (o.y - m.mean) * (o.y - m.mean);
        res_d += (o.dy - m.dmean) * (o.dy - m.dmean);
    }
    const double n = static_cast<double>(gp.size());
    out.var = kNoiseDecay * var0 + (1.0 - kNoiseDecay) * res_f / n;
    out.dvar = kNoiseDecay * dvar0 + (1.0 - kNoiseDecay) * res_d / n;
    return out;
}

}  // namespace

double cubic_min(std::span<const double> steps, std::span<const double> values, std::span<const double> slopes) {
    if (steps.size() != values.size() || steps.size() != slopes.size()) {
        throw InvalidArgument("cubic_min: list lengths differ");
    }
    if (steps.size() < 2) {
        throw InvalidArgument("cubic_min: need at least two points");
    }
    std::vector<std::size_t> order(steps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return steps[a] < steps[b]; });

    std::size_t best = 0;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (values[order[i]] < values[order[best]]) {
            best = i;
        }
    }
    const bool has_left = best > 0;
    const bool has_right = best + 1 < order.size();
    const double slope = slopes[order[best]];
    std::size_t other = 0;
    if (slope < 0.0) {
        other = has_right ? best + 1 : best - 1;
    } else if (slope > 0.0) {
        other = has_left ? best - 1 : best + 1;
    } else if (has_left && has_right) {
        other = values[order[best + 1]] <= values[order[best - 1]] ? best + 1 : best - 1;
    } else {
        other = has_right ? best + 1 : best - 1;
    }
    const std::size_t lo = order[std::min(best, other)];
    const std::size_t hi = order[std::max(best, other)];
    const double a = steps[lo];
    const double b = steps[hi];
    if (!(b > a)) {
        return a;
    }
    const HermiteCubic cubic{a, b, values[lo], values[hi], slopes[lo], slopes[hi]};
    if (auto t = cubic.interior_minimum()) {
        return *t;
    }
    return 0.5 * (a + b);
}

std::vector<double> get_candidates(const GPSurrogate& gp, std::span<const double> steps) {
    if (steps.empty()) {
        throw InvalidArgument("get_candidates: no observed steps");
    }
    const auto sorted = sorted_unique(steps);
    return candidates_with_boundary(gp, sorted, extend_boundary(gp, sorted)).steps;
}

std::vector<double> d_get_candidates(const GPSurrogate& gp, std::span<const double> steps, double d_k,
                                     double g_k_norm, DLimitMode mode) {
    if (steps.empty()) {
        throw InvalidArgument("d_get_candidates: no observed steps");
    }
    if (!(d_k > 0.0) || !(g_k_norm > 0.0)) {
        throw InvalidArgument("d_get_candidates: d_k and ||g_k|| must be positive");
    }
    const auto sorted = sorted_unique(steps);
    return candidates_with_boundary(gp, sorted, d_boundary(extend_boundary(gp, sorted), d_k, g_k_norm, mode)).steps;
}

double expected_improvement_value(double eta, double mu, double var) {
    const double gain = eta - mu;
    const double sd = std::sqrt(std::max(var, 0.0));
    if (sd == 0.0) {
        return std::max(gain, 0.0);
    }
    const double z = gain / sd;
    return gain * normal_cdf(z) + sd * normal_pdf(z);
}

std::vector<double> expected_improvement(const GPSurrogate& gp, std::span<const double> candidates) {
    if (candidates.empty()) {
        throw InvalidArgument("expected_improvement: no candidates");
    }
    const Normalization& nm = gp.normalization();
    double eta = std::numeric_limits<double>::infinity();
    for (const auto& o : gp.observations()) {
        eta = std::min(eta, gp.moments(nm.t_in(o.t)).mean);
    }
    std::vector<double> out;
    out.reserve(candidates.size());
    for (const double t : candidates) {
        const GPMoments m = gp.moments(nm.t_in(t));
        out.push_back(expected_improvement_value(eta, m.mean, m.var));
    }
    return out;
}

std::optional<std::size_t> select_candidate(std::span<const double> candidates, std::span<const double> scores) {
    if (candidates.size() != scores.size()) {
        throw InvalidArgument("select_candidate: size mismatch");
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] > 0.0)) {
            continue;
        }
        if (!best || scores[i] > scores[*best] ||
            (scores[i] == scores[*best] && candidates[i] < candidates[*best])) {
            best = i;
        }
    }
    return best;
}

LineSearchOutcome inexact_line_search(const Ray& ray, double y0, double dy0, double gamma_prev,
                                      const WolfeParams& wp, std::uint64_t j) {
    wp.validate();
    check_search_inputs(y0, dy0, gamma_prev);

    LineSearchOutcome out;
    out.lists.append(0.0, y0, dy0);
    double step = gamma_prev;
    bool extrapolating = true;
    while (out.evaluations < kSearchBudget) {
        const RaySample s = observe(ray, step, j);
        ++j;
        ++out.evaluations;
        out.lists.append(step, s.value, s.derivative);
        if (bool_wolfe(y0, dy0, s.value, s.derivative, step, wp)) {
            out.gamma = step;
            out.y = s.value;
            out.dy = s.derivative;
            out.accepted_by = AcceptedBy::wolfe_pass;
            out.j = j;
            out.lists.j = j;
            return out;
        }
        const bool armijo = s.value <= y0 + wp.c1 * step * dy0;
        if (!(s.derivative < 0.0 && armijo)) {
            extrapolating = false;
        }
        if (s.derivative < 0.0 && extrapolating) {
            step *= 2.0;
        } else {
            step = cubic_min(out.lists.steps, out.lists.values, out.lists.slopes);
        }
    }
    finish_budget(out);
    out.j = j;
    out.lists.j = j;
    return out;
}

LineSearchOutcome pls(const Ray& ray, double y0, double dy0, double gamma_prev, double var0, double dvar0,
                      const WolfeParams& wp, std::uint64_t j) {
    return probabilistic_search(ray, y0, dy0, gamma_prev, var0, dvar0, wp, j,
                                [](const GPSurrogate& gp, const std::vector<double>& steps) {
                                    return candidates_with_boundary(gp, steps, extend_boundary(gp, steps));
                                });
}

LineSearchOutcome d_informed_pls(const Ray& ray, double y0, double dy0, double gamma_prev, double var0,
                                 double dvar0, const WolfeParams& wp, std::uint64_t j, double d_k,
                                 double g_k_norm, DLimitMode mode) {
    if (!(d_k > 0.0) || !(g_k_norm > 0.0)) {
        throw InvalidArgument("d_informed_pls: d_k and ||g_k|| must be positive");
    }
    return probabilistic_search(ray, y0, dy0, gamma_prev, var0, dvar0, wp, j,
                                [&](const GPSurrogate& gp, const std::vector<double>& steps) {
                                    const double boundary =
                                        d_boundary(extend_boundary(gp, steps), d_k, g_k_norm, mode);
                                    return candidates_with_boundary(gp, steps, boundary);
                                });
}

}  // namespace steplab
