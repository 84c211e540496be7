#include "steplab/gp1d/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "steplab/errors.hpp"
#include "steplab/gp1d/hermite.hpp"

namespace steplab {

GPSurrogate GPSurrogate::init(double y0, double dy0, double var0, double dvar0, double t_ref) {
    if (!std::isfinite(y0) || !std::isfinite(dy0)) {
        throw NumericError("GPSurrogate::init: non-finite observation");
    }
    if (!(dy0 < 0.0)) {
        throw NotDescentDirection("GPSurrogate::init: initial slope must be negative");
    }
    if (!(t_ref > 0.0) || !std::isfinite(t_ref)) {
        throw InvalidArgument("GPSurrogate::init: t_ref must be positive");
    }
    if (!(var0 >= 0.0) || !(dvar0 >= 0.0)) {
        throw InvalidArgument("GPSurrogate::init: variances must be nonnegative");
    }
    GPSurrogate gp;
    gp.norm_ = Normalization{y0, -dy0, t_ref};
    gp.raw_.push_back({0.0, y0, dy0, var0, dvar0});
    gp.obs_.push_back({0.0, 0.0, -1.0, std::max(gp.norm_.var_in(var0), kNoiseFloor),
                       std::max(gp.norm_.dvar_in(dvar0), kNoiseFloor)});
    gp.refactorize();
    return gp;
}

GPSurrogate GPSurrogate::update(const Observation& obs) const {
    if (raw_.size() >= kMaxObservations) {
        throw InvalidArgument("GPSurrogate::update: observation capacity reached");
    }
    if (!std::isfinite(obs.t) || !(obs.t >= 0.0)) {
        throw InvalidArgument("GPSurrogate::update: t must be finite and nonnegative");
    }
    if (!std::isfinite(obs.y) || !std::isfinite(obs.dy)) {
        throw NumericError("GPSurrogate::update: non-finite observation");
    }
    if (!(obs.var >= 0.0) || !(obs.dvar >= 0.0)) {
        throw InvalidArgument("GPSurrogate::update: variances must be nonnegative");
    }
    GPSurrogate next = *this;
    next.raw_.push_back(obs);
    next.obs_.push_back({norm_.t_in(obs.t), norm_.y_in(obs.y), norm_.dy_in(obs.dy),
                         std::max(norm_.var_in(obs.var), kNoiseFloor),
                         std::max(norm_.dvar_in(obs.dvar), kNoiseFloor)});
    next.refactorize();
    return next;
}

void GPSurrogate::refactorize() {
    const auto n = static_cast<Eigen::Index>(obs_.size());
    Eigen::MatrixXd gram(2 * n, 2 * n);
    Eigen::VectorXd target(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& oi = obs_[static_cast<std::size_t>(i)];
        target[i] = oi.y;
        target[n + i] = oi.dy;
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& oj = obs_[static_cast<std::size_t>(j)];
            gram(i, j) = kernel_.k(oi.t, oj.t);
            gram(i, n + j) = kernel_.d_b(oi.t, oj.t);
            gram(n + i, j) = kernel_.d_a(oi.t, oj.t);
            gram(n + i, n + j) = kernel_.d_ab(oi.t, oj.t);
        }
        gram(i, i) += oi.var;
        gram(n + i, n + i) += oi.dvar;
    }
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success) {
        throw ConditioningError("GPSurrogate: Gram matrix not positive definite after noise floor");
    }
    alpha_ = llt_.solve(target);
    if (!alpha_.allFinite()) {
        throw ConditioningError("GPSurrogate: non-finite posterior weights");
    }
}

void GPSurrogate::cross(double t, Eigen::Ref<Eigen::VectorXd> value_col,
                        Eigen::Ref<Eigen::VectorXd> deriv_col) const {
    const auto n = static_cast<Eigen::Index>(obs_.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = obs_[static_cast<std::size_t>(i)].t;
        value_col[i] = kernel_.k(ti, t);
        value_col[n + i] = kernel_.d_a(ti, t);
        deriv_col[i] = kernel_.d_b(ti, t);
        deriv_col[n + i] = kernel_.d_ab(ti, t);
    }
}

GPMoments GPSurrogate::moments(double t) const {
    const auto m = 2 * static_cast<Eigen::Index>(obs_.size());
    Eigen::MatrixXd u(m, 2);
    cross(t, u.col(0), u.col(1));
    const Eigen::MatrixXd v = llt_.matrixL().solve(u);
    GPMoments out{};
    out.mean = u.col(0).dot(alpha_);
    out.dmean = u.col(1).dot(alpha_);
    out.var = kernel_.k(t, t) - v.col(0).squaredNorm();
    out.dvar = kernel_.d_ab(t, t) - v.col(1).squaredNorm();
    out.cov_value_deriv = kernel_.d_b(t, t) - v.col(0).dot(v.col(1));
    return out;
}

GPMoments GPSurrogate::raw_moments(double t) const {
    const GPMoments m = moments(norm_.t_in(t));
    const double value_scale = norm_.dy_ref * norm_.t_ref;
    return {norm_.y_out(m.mean), norm_.dy_out(m.dmean), norm_.var_out(m.var), norm_.dvar_out(m.dvar),
            m.cov_value_deriv * value_scale * norm_.dy_ref};
}

Eigen::Vector4d GPSurrogate::joint_mean(double t1, double t2) const {
    const GPMoments a = moments(t1);
    const GPMoments b = moments(t2);
    return {a.mean, a.dmean, b.mean, b.dmean};
}

Eigen::Matrix4d GPSurrogate::joint_cov(double t1, double t2) const {
    const auto m = 2 * static_cast<Eigen::Index>(obs_.size());
    Eigen::MatrixXd u(m, 4);
    cross(t1, u.col(0), u.col(1));
    cross(t2, u.col(2), u.col(3));
    const std::array<double, 4> at = {t1, t1, t2, t2};
    const std::array<bool, 4> is_deriv = {false, true, false, true};
    Eigen::Matrix4d prior;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double a = at[static_cast<std::size_t>(i)];
            const double b = at[static_cast<std::size_t>(j)];
            const bool da = is_deriv[static_cast<std::size_t>(i)];
            const bool db = is_deriv[static_cast<std::size_t>(j)];
            if (!da && !db) {
                prior(i, j) = kernel_.k(a, b);
            } else if (!da && db) {
                prior(i, j) = kernel_.d_b(a, b);
            } else if (da && !db) {
                prior(i, j) = kernel_.d_a(a, b);
            } else {
                prior(i, j) = kernel_.d_ab(a, b);
            }
        }
    }
    const Eigen::MatrixXd v = llt_.matrixL().solve(u);
    Eigen::Matrix4d post = prior - v.transpose() * v;
    return 0.5 * (post + post.transpose());
}

std::optional<double> GPSurrogate::segment_minimum(double lo, double hi) const {
    if (!(lo >= 0.0) || !(hi > lo)) {
        throw InvalidArgument("GPSurrogate::segment_minimum: need 0 <= lo < hi");
    }
    const double a = norm_.t_in(lo);
    const double b = norm_.t_in(hi);
    std::vector<double> knots{a};
    for (const auto& o : obs_) {
        if (o.t > a && o.t < b) {
            knots.push_back(o.t);
        }
    }
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    std::optional<double> best;
    double best_mean = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const GPMoments left = moments(knots[i]);
        const GPMoments right = moments(knots[i + 1]);
        const HermiteCubic piece{knots[i], knots[i + 1], left.mean, right.mean, left.dmean, right.dmean};
        if (const auto t = piece.interior_minimum()) {
            const double mean = moments(*t).mean;
            if (!best || mean < best_mean) {
                best = *t;
                best_mean = mean;
            }
        }
    }
    if (!best) {
        return std::nullopt;
    }
    return norm_.t_out(*best);
}

}  // namespace steplab
