#include "steplab/gp1d/hermite.hpp"

#include <array>
#include <cmath>

namespace steplab {

namespace {

// Power-basis coefficients in u = (t - a) / h.
struct Coeffs {
    double c0, c1, c2, c3, h;
};

Coeffs coeffs(const HermiteCubic& c) {
    const double h = c.b - c.a;
    return {c.fa, h * c.da, 3.0 * (c.fb - c.fa) - h * (2.0 * c.da + c.db),
            2.0 * (c.fa - c.fb) + h * (c.da + c.db), h};
}

}  // namespace

double HermiteCubic::value(double t) const {
    const auto c = coeffs(*this);
    const double u = (t - a) / c.h;
    return c.c0 + u * (c.c1 + u * (c.c2 + u * c.c3));
}

double HermiteCubic::slope(double t) const {
    const auto c = coeffs(*this);
    const double u = (t - a) / c.h;
    return (c.c1 + u * (2.0 * c.c2 + 3.0 * u * c.c3)) / c.h;
}

double HermiteCubic::curvature(double t) const {
    const auto c = coeffs(*this);
    const double u = (t - a) / c.h;
    return (2.0 * c.c2 + 6.0 * c.c3 * u) / (c.h * c.h);
}

std::optional<double> HermiteCubic::interior_minimum() const {
    if (!(b > a)) {
        return std::nullopt;
    }
    const auto c = coeffs(*this);
    // p'(u) = 3 c3 u^2 + 2 c2 u + c1
    const double qa = 3.0 * c.c3;
    const double qb = 2.0 * c.c2;
    const double qc = c.c1;
    std::array<double, 2> roots{};
    int count = 0;
    const double scale = std::abs(qa) + std::abs(qb) + std::abs(qc);
    if (scale == 0.0) {
        return std::nullopt;
    }
    if (std::abs(qa) <= 1e-14 * scale) {
        if (qb != 0.0) {
            roots[count++] = -qc / qb;
        }
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) {
            return std::nullopt;
        }
        const double sq = std::sqrt(disc);
        // Numerically stable pair of roots.
        const double q = -0.5 * (qb + std::copysign(sq, qb));
        if (q != 0.0) {
            roots[count++] = q / qa;
            roots[count++] = qc / q;
        } else {
            roots[count++] = 0.0;
        }
    }
    std::optional<double> best;
    double best_val = 0.0;
    for (int i = 0; i < count; ++i) {
        const double u = roots[i];
        if (!(u > 0.0 && u < 1.0)) {
            continue;
        }
        if (2.0 * c.c2 + 6.0 * c.c3 * u <= 0.0) {
            continue;
        }
        const double t = a + u * c.h;
        if (!(t > a && t < b)) {
            continue;
        }
        const double v = value(t);
        if (!best || v < best_val) {
            best = t;
            best_val = v;
        }
    }
    return best;
}

}  // namespace steplab
