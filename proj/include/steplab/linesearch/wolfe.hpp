#pragma once

#include <Eigen/Core>

#include "steplab/gp1d/surrogate.hpp"

namespace steplab {

/// Wolfe constants. c_w = 0 is allowed and means "accept the first
/// evaluated step" in the probabilistic searches.
struct WolfeParams {
    double c1 = 0.05;
    double c2 = 0.5;
    double c_w = 0.3;

    /// Throws InvalidArgument unless 0 < c1 < c2 < 1 and 0 <= c_w < 1.
    void validate() const;
};

/// Armijo y <= y0 + c1 gamma dy0 and curvature dy >= c2 dy0.
bool bool_wolfe(double y0, double dy0, double y, double dy, double gamma, const WolfeParams& wp);

/// Joint Gaussian of the zero-relative Wolfe quantities (a, b).
struct WolfeProjection {
    double m_a, m_b;
    double c_aa, c_bb, c_ab;
};

/// Applies [[1, c1 gamma, -1, 0], [0, -c2, 0, 1]] to the mean and
/// covariance of [F(0), F'(0), F(gamma), F'(gamma)].
WolfeProjection ab_projection(const Eigen::Vector4d& mean, const Eigen::Matrix4d& cov, double gamma,
                              const WolfeParams& wp);

/// P(a > 0 and b > 0) for a bivariate normal with the given moments.
/// A variance below 1e-12 collapses that coordinate onto the sign of its
/// mean. Throws InvalidCorrelation when |rho| > 1 + 1e-9.
double bvn_quadrant(double m_a, double m_b, double c_aa, double c_bb, double c_ab);

/// Standard bivariate normal upper orthant P(X > h, Y > k) with correlation rho.
double bvn_upper(double h, double k, double rho);

/// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

/// Probability that the raw step gamma satisfies both Wolfe conditions
/// under the surrogate.
double prob_wolfe(const GPSurrogate& gp, double gamma, const WolfeParams& wp);

}  // namespace steplab
