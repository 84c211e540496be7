#include "steplab/core/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "steplab/core/rng.hpp"
#include "steplab/errors.hpp"

namespace steplab {

namespace {

// Tags separating the random streams a single problem seed feeds.
constexpr std::uint64_t kTagMatrix = 1;
constexpr std::uint64_t kTagShift = 2;
constexpr std::uint64_t kTagData = 3;

Eigen::MatrixXd gaussian_matrix(SplitMix64& gen, int rows, int cols) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            m(i, j) = normal(gen);
        }
    }
    return m;
}

double softplus(double z) {
    // log(1 + e^z) without overflow.
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

class QuadraticObjective final : public Objective {
public:
    QuadraticObjective(Eigen::MatrixXd a, Point b, std::optional<Point> minimizer)
        : a_(std::move(a)), b_(std::move(b)), minimizer_(std::move(minimizer)) {
        if (minimizer_) {
            f_star_ = 0.5 * minimizer_->dot(a_ * *minimizer_) - b_.dot(*minimizer_);
        }
    }

    double value(const Point& x) const override { return 0.5 * x.dot(a_ * x) - b_.dot(x); }

    Point gradient(const Point& x) const override {
        if (minimizer_) {
            return a_ * (x - *minimizer_);
        }
        return a_ * x - b_;
    }

    std::optional<double> suboptimality(const Point& x) const override {
        if (!minimizer_) {
            return std::nullopt;
        }
        const Point e = x - *minimizer_;
        return 0.5 * e.dot(a_ * e);
    }

private:
    Eigen::MatrixXd a_;
    Point b_;
    std::optional<Point> minimizer_;
    double f_star_ = 0.0;
};

class AbsShiftObjective final : public Objective {
public:
    explicit AbsShiftObjective(Point c) : c_(std::move(c)) {}

    double value(const Point& x) const override { return (x - c_).lpNorm<1>(); }

    Point gradient(const Point& x) const override {
        Point g(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double diff = x[i] - c_[i];
            g[i] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        }
        return g;
    }

    std::optional<double> suboptimality(const Point& x) const override { return value(x); }

private:
    Point c_;
};

// F(x) = log( (1/2m) sum_i [exp(u_i) + exp(-u_i)] ), u = A (x - x*).
// Symmetric terms place the minimum exactly at x* with F(x*) = 0.
class LogSumExpObjective final : public Objective {
public:
    LogSumExpObjective(Eigen::MatrixXd a, Point center) : a_(std::move(a)), center_(std::move(center)) {}

    double value(const Point& x) const override {
        const Eigen::VectorXd u = a_ * (x - center_);
        const double top = u.cwiseAbs().maxCoeff();
        double sum = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            sum += std::exp(u[i] - top) + std::exp(-u[i] - top);
        }
        return top + std::log(sum / (2.0 * static_cast<double>(u.size())));
    }

    Point gradient(const Point& x) const override {
        const Eigen::VectorXd u = a_ * (x - center_);
        const double top = u.cwiseAbs().maxCoeff();
        Eigen::VectorXd w(u.size());
        double sum = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double ep = std::exp(u[i] - top);
            const double em = std::exp(-u[i] - top);
            w[i] = ep - em;
            sum += ep + em;
        }
        return a_.transpose() * (w / sum);
    }

    std::optional<double> suboptimality(const Point& x) const override { return value(x); }

private:
    Eigen::MatrixXd a_;
    Point center_;
};

// Mean logistic loss plus (lambda/2)||x||^2.
class LogisticObjective final : public FiniteSumObjective {
public:
    LogisticObjective(Eigen::MatrixXd features, Eigen::VectorXd labels, double lambda)
        : z_(std::move(features)), labels_(std::move(labels)), lambda_(lambda) {}

    std::size_t num_samples() const override { return static_cast<std::size_t>(z_.rows()); }

    double value(const Point& x) const override {
        const Eigen::VectorXd margin = labels_.cwiseProduct(z_ * x);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < margin.size(); ++i) {
            sum += softplus(-margin[i]);
        }
        return sum / static_cast<double>(margin.size()) + 0.5 * lambda_ * x.squaredNorm();
    }

    Point gradient(const Point& x) const override {
        const Eigen::VectorXd margin = labels_.cwiseProduct(z_ * x);
        Eigen::VectorXd coef(margin.size());
        for (Eigen::Index i = 0; i < margin.size(); ++i) {
            coef[i] = -labels_[i] * sigmoid(-margin[i]);
        }
        return z_.transpose() * coef / static_cast<double>(margin.size()) + lambda_ * x;
    }

    BatchResult batch(const Point& x, std::span<const std::size_t> indices) const override {
        double value = 0.0;
        Point grad = Point::Zero(x.size());
        for (const std::size_t idx : indices) {
            const auto row = z_.row(static_cast<Eigen::Index>(idx));
            const double label = labels_[static_cast<Eigen::Index>(idx)];
            const double m = label * row.dot(x);
            value += softplus(-m);
            grad += (-label * sigmoid(-m)) * row.transpose();
        }
        const double n = static_cast<double>(indices.size());
        return {value / n + 0.5 * lambda_ * x.squaredNorm(), grad / n + lambda_ * x};
    }

    Eigen::MatrixXd hessian(const Point& x) const {
        const Eigen::VectorXd margin = labels_.cwiseProduct(z_ * x);
        Eigen::VectorXd w(margin.size());
        for (Eigen::Index i = 0; i < margin.size(); ++i) {
            const double s = sigmoid(margin[i]);
            w[i] = s * (1.0 - s);
        }
        Eigen::MatrixXd h = z_.transpose() * w.asDiagonal() * z_ / static_cast<double>(margin.size());
        h.diagonal().array() += lambda_;
        return h;
    }

private:
    Eigen::MatrixXd z_;
    Eigen::VectorXd labels_;
    double lambda_;
};

DeterministicProblem seeded_quadratic(int p, std::uint64_t seed) {
    auto gen = make_stream(seed, 0, kTagMatrix);
    const Eigen::MatrixXd g = gaussian_matrix(gen, p, p);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    std::uniform_real_distribution<double> log_eig(std::log(0.1), std::log(10.0));
    Eigen::VectorXd eig(p);
    for (int i = 0; i < p; ++i) {
        eig[i] = std::exp(log_eig(gen));
    }
    Eigen::MatrixXd a = q * eig.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose());

    auto shift_gen = make_stream(seed, 0, kTagShift);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    Point x_star(p);
    for (int i = 0; i < p; ++i) {
        x_star[i] = coord(shift_gen);
    }
    const Point b = a * x_star;

    DeterministicProblem prob;
    prob.name = "quadratic";
    prob.dim = p;
    prob.objective = std::make_shared<QuadraticObjective>(a, b, x_star);
    prob.minimizer = x_star;
    prob.convex = true;
    return prob;
}

DeterministicProblem seeded_abs_shift(int p, std::uint64_t seed) {
    auto gen = make_stream(seed, 0, kTagShift);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    Point c(p);
    for (int i = 0; i < p; ++i) {
        c[i] = coord(gen);
    }
    return make_abs_shift(c);
}

DeterministicProblem seeded_logsumexp(int p, std::uint64_t seed) {
    auto gen = make_stream(seed, 0, kTagMatrix);
    const int rows = p + 3;
    Eigen::MatrixXd a = gaussian_matrix(gen, rows, p) / std::sqrt(static_cast<double>(p));
    auto shift_gen = make_stream(seed, 0, kTagShift);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    Point center(p);
    for (int i = 0; i < p; ++i) {
        center[i] = coord(shift_gen);
    }
    double g = 0.0;
    for (int i = 0; i < rows; ++i) {
        g = std::max(g, a.row(i).norm());
    }

    DeterministicProblem prob;
    prob.name = "logsumexp";
    prob.dim = p;
    prob.objective = std::make_shared<LogSumExpObjective>(a, center);
    prob.minimizer = center;
    prob.lipschitz = g;
    prob.convex = true;
    return prob;
}

DeterministicProblem seeded_logistic(int p, std::uint64_t seed) {
    constexpr int kSamples = 200;
    constexpr double kLambda = 1e-2;
    auto gen = make_stream(seed, 0, kTagData);
    const Eigen::MatrixXd z = gaussian_matrix(gen, kSamples, p);
    const Eigen::MatrixXd w_true = gaussian_matrix(gen, p, 1);
    std::normal_distribution<double> normal;
    Eigen::VectorXd labels(kSamples);
    for (int i = 0; i < kSamples; ++i) {
        const double score = z.row(i).dot(w_true.col(0)) + 0.5 * normal(gen);
        labels[i] = score >= 0.0 ? 1.0 : -1.0;
    }
    auto objective = std::make_shared<LogisticObjective>(z, labels, kLambda);

    // Damped Newton to machine precision; the problem is strongly convex.
    Point x = Point::Zero(p);
    for (int it = 0; it < 100; ++it) {
        const Point g = objective->gradient(x);
        if (g.norm() <= 1e-14) {
            break;
        }
        const Point step = objective->hessian(x).ldlt().solve(g);
        double t = 1.0;
        const double f0 = objective->value(x);
        while (t > 1e-10 && objective->value(x - t * step) > f0 - 0.25 * t * g.dot(step)) {
            t *= 0.5;
        }
        x -= t * step;
    }

    DeterministicProblem prob;
    prob.name = "logistic-synthetic";
    prob.dim = p;
    prob.objective = objective;
    prob.minimizer = x;
    prob.convex = true;
    return prob;
}

constexpr std::array<std::string_view, 4> kProblemNames = {"quadratic", "abs-shift", "logsumexp",
                                                           "logistic-synthetic"};

}  // namespace

std::optional<double> DeterministicProblem::optimal_value() const {
    if (!minimizer) {
        return std::nullopt;
    }
    return objective->value(*minimizer);
}

std::optional<double> DeterministicProblem::gap(const Point& x) const {
    if (auto direct = objective->suboptimality(x)) {
        return direct;
    }
    if (!minimizer) {
        return std::nullopt;
    }
    return objective->value(x) - objective->value(*minimizer);
}

std::optional<double> DeterministicProblem::distance_from(const Point& x0) const {
    if (!minimizer) {
        return std::nullopt;
    }
    return (x0 - *minimizer).norm();
}

std::span<const std::string_view> problem_names() { return kProblemNames; }

DeterministicProblem make_problem(std::string_view name, int p, std::uint64_t seed) {
    if (p < 1) {
        throw InvalidArgument("make_problem: dimension must be >= 1");
    }
    if (name == "quadratic") {
        return seeded_quadratic(p, seed);
    }
    if (name == "abs-shift") {
        return seeded_abs_shift(p, seed);
    }
    if (name == "logsumexp") {
        return seeded_logsumexp(p, seed);
    }
    if (name == "logistic-synthetic") {
        return seeded_logistic(p, seed);
    }
    throw InvalidArgument("make_problem: unknown problem '" + std::string(name) + "'");
}

DeterministicProblem make_quadratic(const Eigen::MatrixXd& a, const Point& b) {
    if (a.rows() != a.cols() || a.rows() != b.size() || a.rows() == 0) {
        throw InvalidArgument("make_quadratic: shape mismatch");
    }
    DeterministicProblem prob;
    prob.name = "quadratic";
    prob.dim = static_cast<int>(b.size());
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    prob.convex = llt.info() == Eigen::Success;
    std::optional<Point> minimizer;
    if (prob.convex) {
        minimizer = llt.solve(b);
    }
    prob.objective = std::make_shared<QuadraticObjective>(a, b, minimizer);
    prob.minimizer = minimizer;
    return prob;
}

DeterministicProblem make_abs_shift(const Point& c) {
    require_finite(c, "make_abs_shift");
    if (c.size() == 0) {
        throw InvalidArgument("make_abs_shift: empty shift");
    }
    DeterministicProblem prob;
    prob.name = "abs-shift";
    prob.dim = static_cast<int>(c.size());
    prob.objective = std::make_shared<AbsShiftObjective>(c);
    prob.minimizer = c;
    prob.lipschitz = std::sqrt(static_cast<double>(c.size()));
    prob.convex = true;
    return prob;
}

}  // namespace steplab
