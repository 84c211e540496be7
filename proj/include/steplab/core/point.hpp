#pragma once

#include <span>
#include <string_view>

#include <Eigen/Core>

namespace steplab {

/// A point in parameter space. Entries are required to be finite wherever a
/// Point crosses an API boundary (see require_finite).
using Point = Eigen::VectorXd;

/// Throws NumericError naming `what` if any entry of x is NaN or infinite.
void require_finite(const Point& x, std::string_view what);

bool all_finite(const Point& x);

/// (sum |x_i|^p)^(1/p). p = 2 is the Euclidean norm.
double norm_p(const Point& x, double p = 2.0);

/// sqrt(sum x_i^2 a_i), the diagonal "A-matrix" norm.
double norm_weighted(const Point& x, std::span<const double> weights);

Point make_point(std::span<const double> coords);

}  // namespace steplab
