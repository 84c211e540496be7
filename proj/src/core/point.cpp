#include "steplab/core/point.hpp"

#include <cmath>
#include <string>

#include "steplab/errors.hpp"

namespace steplab {

bool all_finite(const Point& x) { return x.allFinite(); }

void require_finite(const Point& x, std::string_view what) {
    if (!x.allFinite()) {
        throw NumericError(std::string(what) + ": non-finite entry");
    }
}

double norm_p(const Point& x, double p) {
    if (!(p >= 1.0)) {
        throw InvalidArgument("norm_p: p must be >= 1");
    }
    if (p == 2.0) {
        return x.norm();
    }
    if (p == 1.0) {
        return x.lpNorm<1>();
    }
    if (std::isinf(p)) {
        return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    }
    // Scale by the largest magnitude so |x_i|^p cannot overflow.
    const double scale = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sum += std::pow(std::abs(x[i]) / scale, p);
    }
    return scale * std::pow(sum, 1.0 / p);
}

double norm_weighted(const Point& x, std::span<const double> weights) {
    if (static_cast<Eigen::Index>(weights.size()) != x.size()) {
        throw InvalidArgument("norm_weighted: weight length does not match point dimension");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = weights[static_cast<std::size_t>(i)];
        if (a < 0.0) {
            throw InvalidArgument("norm_weighted: weights must be nonnegative");
        }
        sum += x[i] * x[i] * a;
    }
    return std::sqrt(sum);
}

Point make_point(std::span<const double> coords) {
    Point x(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) {
        x[static_cast<Eigen::Index>(i)] = coords[i];
    }
    return x;
}

}  // namespace steplab
