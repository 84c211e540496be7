#pragma once

#include <algorithm>

namespace steplab::gp {

/// Once-integrated Wiener process kernel
///
///   k(a, b) = scale * (m^3 / 3 + |a - b| m^2 / 2),  m = min(a, b) + offset
///
/// with all derivative cross-covariances in closed form. Posterior means
/// under this kernel are cubic between observation nodes and linear beyond
/// the last node.
struct WienerKernel {
    double scale = 1.0;
    double offset = 1.0;

    double k(double a, double b) const {
        const double lo = std::min(a, b) + offset;
        const double hi = std::max(a, b) + offset;
        return scale * (lo * lo * hi / 2.0 - lo * lo * lo / 6.0);
    }

    /// d k / d b, i.e. cov(F(a), F'(b)).
    double d_b(double a, double b) const {
        const double at = a + offset;
        const double bt = b + offset;
        if (at <= bt) {
            return scale * at * at / 2.0;
        }
        return scale * (bt * at - bt * bt / 2.0);
    }

    /// d k / d a, i.e. cov(F'(a), F(b)).
    double d_a(double a, double b) const { return d_b(b, a); }

    /// d^2 k / da db, i.e. cov(F'(a), F'(b)).
    double d_ab(double a, double b) const { return scale * (std::min(a, b) + offset); }
};

}  // namespace steplab::gp
