#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "steplab/gp1d/kernel.hpp"

namespace steplab {

/// A noisy observation of the ray objective and its slope, in raw units.
struct Observation {
    double t;
    double y;
    double dy;
    double var = 0.0;   // variance of y
    double dvar = 0.0;  // variance of dy
};

/// Affine map from raw to normalized units:
///   t_n = t / t_ref,  y_n = (y - y_ref) / (dy_ref t_ref),  dy_n = dy / dy_ref
/// so the initial observation becomes y = 0, dy = -1 at t = 0.
struct Normalization {
    double y_ref = 0.0;
    double dy_ref = 1.0;
    double t_ref = 1.0;

    double t_in(double t) const { return t / t_ref; }
    double t_out(double t_n) const { return t_n * t_ref; }
    double y_in(double y) const { return (y - y_ref) / (dy_ref * t_ref); }
    double y_out(double y_n) const { return y_n * dy_ref * t_ref + y_ref; }
    double dy_in(double dy) const { return dy / dy_ref; }
    double dy_out(double dy_n) const { return dy_n * dy_ref; }
    double var_in(double v) const { return v / (dy_ref * t_ref * dy_ref * t_ref); }
    double var_out(double v_n) const { return v_n * (dy_ref * t_ref) * (dy_ref * t_ref); }
    double dvar_in(double v) const { return v / (dy_ref * dy_ref); }
    double dvar_out(double v_n) const { return v_n * dy_ref * dy_ref; }
};

/// Posterior marginals of F(t) and F'(t).
struct GPMoments {
    double mean;
    double dmean;
    double var;
    double dvar;
    double cov_value_deriv;
};

/// One-dimensional GP posterior over the ray objective and its derivative,
/// conditioned jointly on value and slope observations.
///
/// Value semantics: update returns a new surrogate. All geometry (moments,
/// joint covariance) is in normalized units unless the method says raw.
class GPSurrogate {
public:
    static constexpr std::size_t kMaxObservations = 11;
    static constexpr double kNoiseFloor = 1e-12;

    /// Surrogate holding the single observation at t = 0. t_ref is the raw
    /// step length mapped to t_n = 1. Throws NotDescentDirection if dy0 >= 0.
    static GPSurrogate init(double y0, double dy0, double var0, double dvar0, double t_ref = 1.0);

    /// Conditions on one more observation (raw units). Throws InvalidArgument
    /// at capacity and ConditioningError if the Gram matrix is not SPD.
    GPSurrogate update(const Observation& obs) const;

    GPMoments moments(double t_n) const;

    /// Moments mapped back to raw units.
    GPMoments raw_moments(double t) const;

    /// Posterior mean of [F(t1), F'(t1), F(t2), F'(t2)] (normalized).
    Eigen::Vector4d joint_mean(double t1_n, double t2_n) const;

    /// Posterior covariance of [F(t1), F'(t1), F(t2), F'(t2)] (normalized).
    Eigen::Matrix4d joint_cov(double t1_n, double t2_n) const;

    /// Lowest interior local minimum of the posterior mean in (lo, hi), raw t.
    std::optional<double> segment_minimum(double lo, double hi) const;

    std::size_t size() const noexcept { return raw_.size(); }
    std::span<const Observation> observations() const noexcept { return raw_; }
    const Normalization& normalization() const noexcept { return norm_; }
    const gp::WienerKernel& kernel() const noexcept { return kernel_; }

private:
    struct NormObs {
        double t, y, dy, var, dvar;
    };

    GPSurrogate() = default;
    void refactorize();

    // Cross-covariances between the 2n training targets and F(t), F'(t).
    void cross(double t, Eigen::Ref<Eigen::VectorXd> value_col, Eigen::Ref<Eigen::VectorXd> deriv_col) const;

    gp::WienerKernel kernel_;
    Normalization norm_;
    std::vector<Observation> raw_;
    std::vector<NormObs> obs_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
};

}  // namespace steplab
