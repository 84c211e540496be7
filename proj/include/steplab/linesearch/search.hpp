#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "steplab/core/ray.hpp"
#include "steplab/gp1d/surrogate.hpp"
#include "steplab/linesearch/wolfe.hpp"

namespace steplab {

/// Evaluations allowed per line search.
inline constexpr std::size_t kSearchBudget = 10;

/// Factor used by Extend(max step) when building the extrapolation candidate.
inline constexpr double kExtendFactor = 2.0;

/// Decay of the running noise estimates returned by the probabilistic searches.
inline constexpr double kNoiseDecay = 0.9;

/// Observed (step, value, slope) triples of one search. steps[0] == 0.
struct SearchLists {
    std::vector<double> steps;
    std::vector<double> values;
    std::vector<double> slopes;
    std::uint64_t j = 0;

    void append(double t, double y, double dy) {
        steps.push_back(t);
        values.push_back(y);
        slopes.push_back(dy);
    }
    std::size_t size() const noexcept { return steps.size(); }
};

enum class AcceptedBy { wolfe_pass, budget_min_y };

struct LineSearchOutcome {
    double gamma = 0.0;
    double y = 0.0;
    double dy = 0.0;
    std::uint64_t j = 0;           // minibatch counter after the search
    std::size_t evaluations = 0;   // ray evaluations spent
    AcceptedBy accepted_by = AcceptedBy::wolfe_pass;
    // Running noise estimates (probabilistic searches only).
    std::optional<double> var;
    std::optional<double> dvar;
    SearchLists lists;
};

/// How d_k / ||g_k|| modifies the extrapolation boundary.
enum class DLimitMode {
    literal_floor,  // max(d_k / ||g_k||, Extend(max steps))
    cap,            // min(d_k / ||g_k||, Extend(max steps))
};

/// Minimizer of the cubic Hermite interpolant through the lowest-y point and
/// its neighbour in the downhill direction, strictly inside that bracket.
/// Falls back to the bracket midpoint when the cubic has no interior minimum.
double cubic_min(std::span<const double> steps, std::span<const double> values, std::span<const double> slopes);

/// Posterior-mean minima between adjacent observed steps plus the
/// extrapolation candidate Extend(max steps). Sorted, deduplicated to 1e-12,
/// with already observed steps removed.
std::vector<double> get_candidates(const GPSurrogate& gp, std::span<const double> steps);

/// get_candidates with the extrapolation boundary replaced according to mode.
std::vector<double> d_get_candidates(const GPSurrogate& gp, std::span<const double> steps, double d_k,
                                     double g_k_norm, DLimitMode mode = DLimitMode::literal_floor);

/// Expected improvement of N(mu, var) below eta; var == 0 gives max(eta - mu, 0).
double expected_improvement_value(double eta, double mu, double var);

/// EI(t) = (eta - mu) Phi(z) + sqrt(v) phi(z), z = (eta - mu) / sqrt(v),
/// eta = lowest posterior mean over observed steps. Normalized units.
std::vector<double> expected_improvement(const GPSurrogate& gp, std::span<const double> candidates);

/// Index of the largest score; ties go to the smallest step. Returns nullopt
/// when every score is zero.
std::optional<std::size_t> select_candidate(std::span<const double> candidates, std::span<const double> scores);

/// Deterministic inexact line search: double the step while the slope stays
/// negative and Armijo holds, otherwise interpolate with cubic_min.
LineSearchOutcome inexact_line_search(const Ray& ray, double y0, double dy0, double gamma_prev,
                                      const WolfeParams& wp, std::uint64_t j);

/// Probabilistic line search over a GP surrogate. var0 and dvar0 are the
/// noise variances of ray values and ray slopes.
LineSearchOutcome pls(const Ray& ray, double y0, double dy0, double gamma_prev, double var0, double dvar0,
                      const WolfeParams& wp, std::uint64_t j);

/// pls with candidates from d_get_candidates.
LineSearchOutcome d_informed_pls(const Ray& ray, double y0, double dy0, double gamma_prev, double var0,
                                 double dvar0, const WolfeParams& wp, std::uint64_t j, double d_k,
                                 double g_k_norm, DLimitMode mode = DLimitMode::literal_floor);

}  // namespace steplab
