#pragma once

#include <optional>

namespace steplab {

/// Cubic on [a, b] matching values and slopes at both ends.
struct HermiteCubic {
    double a, b;
    double fa, fb;
    double da, db;

    double value(double t) const;
    double slope(double t) const;
    double curvature(double t) const;

    /// Interior local minimum (slope root with positive curvature) strictly
    /// inside (a, b), lowest one if there are two candidates.
    std::optional<double> interior_minimum() const;
};

}  // namespace steplab
