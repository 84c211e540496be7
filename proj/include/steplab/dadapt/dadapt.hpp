#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "steplab/core/oracle.hpp"
#include "steplab/core/point.hpp"
#include "steplab/descent/trace.hpp"

namespace steplab {

/// Default initial distance estimate d_0.
inline constexpr double kDefaultD0 = 1e-6;

/// Below this ||s|| the bound update is skipped (its numerator is ~0 too).
inline constexpr double kSumEpsilon = 1e-30;

/// Running quantities of D-Adaptation.
///
///   s = sum gamma_i g_i          (weighted gradient sum)
///   r = sum gamma_i^2 ||g_i||^2  (weighted difficulty)
///   d = max over the lower bounds seen so far, starting at d_0
///
/// g0_norm is frozen at the first gradient; phi is the current user scale.
struct DAdaptState {
    double d = kDefaultD0;
    Point s;
    double r = 0.0;
    double g0_norm = 0.0;
    double phi = 1.0;

    /// Fresh state for dimension p. Throws ZeroGradientStart if g0_norm == 0.
    static DAdaptState initial(double d0, double g0_norm, Eigen::Index p, double phi = 1.0);
};

/// gamma = d * phi / ||g_0||.
double dadapt_step_size(const DAdaptState& st);

/// (||s||^2 - r) / ||s||, or nullopt when ||s|| < kSumEpsilon.
std::optional<double> dadapt_lower_bound(const Point& s, double r);

/// One bound update with a realized step gamma_k along g_k:
/// s += gamma g, r += gamma^2 ||g||^2, d = max(d, d_hat).
DAdaptState dadapt_update(const DAdaptState& st, double gamma_k, const Point& g_k);

/// One entry of a run history, as consumed by the dual-averaging bound.
struct DAdaptStep {
    double gamma;
    Point g;
    double phi;
    double d;
};

/// (phi_{k+1} ||sum gamma_i g_i||^2 - sum phi_i d_i^2 ||g_i||^2) / (2 ||sum gamma_i g_i||).
/// phi_next defaults to the last phi in the history.
double dadapt_dual_averaging_bound(std::span<const DAdaptStep> history,
                                   std::optional<double> phi_next = std::nullopt);

/// phi_k as a function of k. An empty function means the constant 1.
using ScaleSchedule = std::function<double(std::size_t)>;

double scale_at(const ScaleSchedule& phi, std::size_t k);

/// SGD with D-Adaptation. Draws g_k at minibatch k, steps with
/// gamma_k = d_k phi_k / ||g_0||, then updates the bounds. Throws
/// ZeroGradientStart when g_0 = 0.
RunTrace dadapt_sgd_run(const StochasticOracle& oracle, const Point& x0, const ScaleSchedule& phi,
                        double d0, std::size_t n);

}  // namespace steplab
