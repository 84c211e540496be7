#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "steplab/core/ray.hpp"
#include "steplab/errors.hpp"
#include "steplab/linesearch/search.hpp"
#include "steplab/linesearch/wolfe.hpp"

using namespace steplab;

namespace {

const WolfeParams kDefault{};

// (gamma - 1)^2
FunctionRay unit_parabola() {
    return FunctionRay([](double t, std::uint64_t) { return RaySample{(t - 1) * (t - 1), 2 * (t - 1)}; });
}

FunctionRay parabola(double a, double b, double c) {
    return FunctionRay([=](double t, std::uint64_t) { return RaySample{a * (t - b) * (t - b) + c, 2 * a * (t - b)}; });
}

double mc_quadrant(double ma, double mb, double caa, double cbb, double cab, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const double la = std::sqrt(caa);
    const double lb1 = cab / la;
    const double lb2 = std::sqrt(cbb - lb1 * lb1);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = z(rng);
        const double z2 = z(rng);
        hits += (ma + la * z1 > 0 && mb + lb1 * z1 + lb2 * z2 > 0) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("bool_wolfe") {
    CHECK(bool_wolfe(1, -2, 0, 0, 1, kDefault));
    CHECK_FALSE(bool_wolfe(1, -2, 0.9801, -1.98, 0.01, kDefault));
    CHECK_FALSE(bool_wolfe(1, -2, 1, 2, 2, kDefault));
}

TEST_CASE("ab_projection") {
    const Eigen::Vector4d exact{1.0, -2.0, 0.0, 0.0};
    const auto p = ab_projection(exact, Eigen::Matrix4d::Zero(), 1.0, kDefault);
    CHECK(p.m_a == doctest::Approx(0.9));
    CHECK(p.m_b == doctest::Approx(1.0));
    CHECK(p.c_aa == 0.0);
    CHECK(p.c_bb == 0.0);
    CHECK(p.c_ab == 0.0);

    // Independent matrix product for identity covariance with c1 = c2 = 0.
    WolfeParams zero{};
    zero.c1 = 0.0;
    zero.c2 = 0.0;
    Eigen::Matrix<double, 2, 4> a;
    a << 1, 0, -1, 0, 0, 0, 0, 1;
    const Eigen::Matrix2d ref = a * a.transpose();
    const auto q = ab_projection(Eigen::Vector4d::Zero(), Eigen::Matrix4d::Identity(), 1.0, zero);
    CHECK(q.c_aa == doctest::Approx(ref(0, 0)));
    CHECK(q.c_bb == doctest::Approx(ref(1, 1)));
    CHECK(q.c_ab == doctest::Approx(ref(0, 1)));
    CHECK(q.c_aa == doctest::Approx(2.0));
    CHECK(q.c_bb == doctest::Approx(1.0));

    // Generic covariance against the same product.
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    Eigen::Matrix4d l;
    for (int i = 0; i < 16; ++i) {
        l(i / 4, i % 4) = z(rng);
    }
    const Eigen::Matrix4d cov = l * l.transpose();
    const Eigen::Vector4d mean{z(rng), z(rng), z(rng), z(rng)};
    const double gamma = 0.7;
    Eigen::Matrix<double, 2, 4> b;
    b << 1, kDefault.c1 * gamma, -1, 0, 0, -kDefault.c2, 0, 1;
    const Eigen::Matrix2d c = b * cov * b.transpose();
    const Eigen::Vector2d m = b * mean;
    const auto r = ab_projection(mean, cov, gamma, kDefault);
    CHECK(r.m_a == doctest::Approx(m[0]));
    CHECK(r.m_b == doctest::Approx(m[1]));
    CHECK(r.c_aa == doctest::Approx(c(0, 0)));
    CHECK(r.c_bb == doctest::Approx(c(1, 1)));
    CHECK(r.c_ab == doctest::Approx(c(0, 1)));

    // c1 = 0 removes the step size from row one.
    const auto g1 = ab_projection(mean, cov, 0.1, zero);
    const auto g2 = ab_projection(mean, cov, 10.0, zero);
    CHECK(g1.m_a == g2.m_a);
    CHECK(g1.c_aa == g2.c_aa);
}

TEST_CASE("bvn_quadrant") {
    CHECK(bvn_quadrant(0, 0, 1, 1, 0) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(bvn_quadrant(0, 0, 1, 1, 1.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(bvn_quadrant(0, 0, 1, 1, 0.999999) == doctest::Approx(0.5).epsilon(1e-3));
    // Analytic: P = 1/4 + asin(rho) / (2 pi) at the origin.
    for (const double rho : {-0.9, -0.5, 0.2, 0.7, 0.95}) {
        CHECK(bvn_quadrant(0, 0, 1, 1, rho) ==
              doctest::Approx(0.25 + std::asin(rho) / (2 * std::numbers::pi)).epsilon(1e-7));
    }
    const double mc = mc_quadrant(0.3, -0.2, 1, 1, 0.5, 4'000'000, 99);
    CHECK(std::abs(bvn_quadrant(0.3, -0.2, 1, 1, 0.5) - mc) <= 3e-3);
    // Independent coordinates factorize.
    CHECK(bvn_quadrant(0.4, -1.1, 2.0, 0.5, 0.0) ==
          doctest::Approx(normal_cdf(0.4 / std::sqrt(2.0)) * normal_cdf(-1.1 / std::sqrt(0.5))).epsilon(1e-8));
    // Degenerate variance collapses onto the sign of the mean.
    CHECK(bvn_quadrant(1.0, 0.0, 0.0, 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(bvn_quadrant(-1.0, 0.0, 0.0, 1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(bvn_quadrant(0, 0, 1, 1, 1.1), InvalidCorrelation);

    double prev_row = -1.0;
    for (double ma = -2.0; ma <= 2.0; ma += 0.25) {
        double prev = -1.0;
        for (double mb = -2.0; mb <= 2.0; mb += 0.25) {
            const double p = bvn_quadrant(ma, mb, 1.0, 2.0, -0.6);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            CHECK(p >= prev - 1e-12);
            prev = p;
        }
        const double row = bvn_quadrant(ma, 0.3, 1.0, 2.0, -0.6);
        CHECK(row >= prev_row - 1e-12);
        prev_row = row;
    }
}

TEST_CASE("prob_wolfe") {
    const auto f = [](double t) { return (t - 1) * (t - 1); };
    const auto df = [](double t) { return 2 * (t - 1); };
    const auto at = [&](double t) {
        return GPSurrogate::init(f(0), df(0), 0, 0).update({t, f(t), df(t)});
    };
    CHECK(prob_wolfe(at(1.0), 1.0, kDefault) >= 0.99);
    CHECK(prob_wolfe(at(2.5), 2.5, kDefault) <= 0.01);

    // Prior-only surrogate: compare with sampling the joint of the GP itself.
    const GPSurrogate prior = GPSurrogate::init(0.0, -1.0, 0.0, 0.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (const double t : {0.05, 0.2, 0.5}) {
        const double p = prob_wolfe(prior, t, kDefault);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        const Eigen::Vector4d mean = prior.joint_mean(0.0, t);
        const Eigen::Matrix4d cov = prior.joint_cov(0.0, t);
        const Eigen::Matrix4d l = (cov + 1e-14 * Eigen::Matrix4d::Identity()).llt().matrixL();
        std::size_t hits = 0;
        const std::size_t n = 200'000;
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Vector4d s = mean + l * Eigen::Vector4d{z(rng), z(rng), z(rng), z(rng)};
            hits += (s[2] <= s[0] + kDefault.c1 * t * s[1] && s[3] >= kDefault.c2 * s[1]) ? 1 : 0;
        }
        CHECK(std::abs(p - static_cast<double>(hits) / n) <= 5e-3);
    }
}

TEST_CASE("cubic_min") {
    const std::vector<double> t01{0, 1};
    CHECK(cubic_min(t01, std::vector<double>{0, 1}, std::vector<double>{0, 2}) == doctest::Approx(0.5));
    const std::vector<double> t02{0, 2};
    CHECK(cubic_min(t02, std::vector<double>{1, 1}, std::vector<double>{-2, 2}) == doctest::Approx(1.0));
    CHECK(cubic_min(t02, std::vector<double>{0, 2}, std::vector<double>{-3, 9}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(cubic_min(std::vector<double>{0}, std::vector<double>{0}, std::vector<double>{0}),
                    InvalidArgument);
}

TEST_CASE("candidates") {
    const GPSurrogate single = GPSurrogate::init(1.0, -2.0, 0, 0, 0.3);
    const std::vector<double> zero{0.0};
    const auto c0 = get_candidates(single, zero);
    REQUIRE(c0.size() == 1);
    CHECK(c0[0] == doctest::Approx(0.6));

    // Valley between 0 and 2 plus extrapolation at 4.
    const GPSurrogate valley = GPSurrogate::init(1, -2, 0, 0).update({2.0, 1.0, 2.0});
    const std::vector<double> s02{0.0, 2.0};
    const auto c1 = get_candidates(valley, s02);
    REQUIRE(c1.size() == 2);
    CHECK(c1[0] == doctest::Approx(*valley.segment_minimum(0.0, 2.0)));
    CHECK(c1[0] > 0.0);
    CHECK(c1[0] < 2.0);
    CHECK(c1[1] == doctest::Approx(4.0));

    const GPSurrogate down = GPSurrogate::init(1, -1, 0, 0).update({1.0, 0.0, -1.0});
    const std::vector<double> s01{0.0, 1.0};
    const auto c2 = get_candidates(down, s01);
    REQUIRE(c2.size() == 1);
    CHECK(c2[0] == doctest::Approx(2.0));

    const GPSurrogate half = GPSurrogate::init(1, -1, 0, 0).update({0.5, 0.5, -1.0});
    const std::vector<double> s05{0.0, 0.5};
    CHECK(d_get_candidates(half, s05, 2.0, 1.0, DLimitMode::literal_floor).back() == doctest::Approx(2.0));
    CHECK(d_get_candidates(half, s05, 0.75, 1.0, DLimitMode::cap).back() == doctest::Approx(0.75));
    CHECK(d_get_candidates(half, s05, 1.0, 1.0, DLimitMode::literal_floor) == get_candidates(half, s05));
    CHECK(d_get_candidates(half, s05, 1.0, 1.0, DLimitMode::cap) == get_candidates(half, s05));
    CHECK(d_get_candidates(half, s05, 1e6, 2.0, DLimitMode::literal_floor).back() == doctest::Approx(5e5));

    // A cap landing on an observed step is not proposed again.
    for (const double t : d_get_candidates(half, s05, 0.5, 1.0, DLimitMode::cap)) {
        CHECK(t != doctest::Approx(0.5));
    }

    // Validity on random noisy surrogates.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        GPSurrogate gp = GPSurrogate::init(0, -1, 0.01, 0.01);
        std::vector<double> steps{0.0};
        double t = 0.0;
        for (int k = 0; k < 4; ++k) {
            t += 0.5 + u(rng) * 0.4;
            gp = gp.update({t, u(rng), u(rng), 0.01, 0.01});
            steps.push_back(t);
        }
        const auto c = get_candidates(gp, steps);
        for (const double x : c) {
            CHECK(std::isfinite(x));
            CHECK(x > 0.0);
            bool on_node = false;
            for (const double s : steps) {
                on_node = on_node || x == s;
            }
            CHECK_FALSE(on_node);
        }
        CHECK(c.back() == doctest::Approx(2.0 * t));
    }
}

TEST_CASE("expected improvement") {
    CHECK(expected_improvement_value(0.0, 1.0, 0.0) == 0.0);
    CHECK(expected_improvement_value(0.0, -0.5, 0.0) == doctest::Approx(0.5));
    CHECK(expected_improvement_value(0.0, 0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
    const double ref = normal_cdf(1.0) + normal_pdf(1.0);
    CHECK(expected_improvement_value(0.0, -1.0, 1.0) == doctest::Approx(1.08332).epsilon(1e-5));
    CHECK(expected_improvement_value(0.0, -1.0, 1.0) == doctest::Approx(ref));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    double acc = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        acc += std::max(0.0, 1.0 - z(rng));
    }
    CHECK(std::abs(acc / n - ref) <= 5e-3);

    // Surrogate form uses the lowest posterior mean at observed steps.
    const GPSurrogate gp = GPSurrogate::init(1, -2, 0, 0).update({1.0, 0.0, 0.0});
    const std::vector<double> cands{1.0};
    CHECK(expected_improvement(gp, cands)[0] <= 1e-6);
}

TEST_CASE("select_candidate") {
    const std::vector<double> c{0.5, 1.0, 2.0};
    CHECK(*select_candidate(c, std::vector<double>{0.1, 0.3, 0.2}) == 1);
    CHECK(*select_candidate(c, std::vector<double>{0.1, 0.3, 0.3}) == 1);
    CHECK(*select_candidate(std::vector<double>{2.0, 1.0}, std::vector<double>{0.3, 0.3}) == 1);
    CHECK_FALSE(select_candidate(c, std::vector<double>{0, 0, 0}).has_value());
}

TEST_CASE("inexact line search") {
    const auto ray = unit_parabola();
    const auto a = inexact_line_search(ray, 1, -2, 1.0, kDefault, 7);
    CHECK(a.gamma == 1.0);
    CHECK(a.evaluations == 1);
    CHECK(a.j == 8);
    CHECK(a.accepted_by == AcceptedBy::wolfe_pass);

    const auto b = inexact_line_search(ray, 1, -2, 0.125, kDefault, 0);
    CHECK(b.gamma == 0.5);
    CHECK(b.evaluations == 3);
    CHECK(b.lists.steps == std::vector<double>{0.0, 0.125, 0.25, 0.5});

    // Overshoot forces interpolation back into the bracket.
    const auto c = inexact_line_search(ray, 1, -2, 4.0, kDefault, 0);
    CHECK(c.accepted_by == AcceptedBy::wolfe_pass);
    CHECK(bool_wolfe(1, -2, c.y, c.dy, c.gamma, kDefault));

    // A line never satisfies curvature: budget, lowest y wins.
    const FunctionRay line([](double t, std::uint64_t) { return RaySample{-t, -1.0}; });
    const auto d = inexact_line_search(line, 0, -1, 1.0, kDefault, 0);
    CHECK(d.evaluations == kSearchBudget);
    CHECK(d.accepted_by == AcceptedBy::budget_min_y);
    CHECK(d.gamma == 512.0);
    CHECK(d.j == kSearchBudget);

    const FunctionRay bad([](double, std::uint64_t) { return RaySample{NAN, 0.0}; });
    CHECK_THROWS_AS(inexact_line_search(bad, 0, -1, 1.0, kDefault, 0), NumericError);
    CHECK_THROWS_AS(inexact_line_search(ray, 1, 2, 1.0, kDefault, 0), NotDescentDirection);
}

TEST_CASE("pls on noise-free rays") {
    const auto ray = unit_parabola();
    const auto out = pls(ray, 1, -2, 1.0, 0, 0, kDefault, 0);
    CHECK(out.evaluations == 1);
    CHECK(out.gamma == 1.0);
    const auto gp = GPSurrogate::init(1, -2, 0, 0, 1.0).update({1.0, 0.0, 0.0});
    CHECK(prob_wolfe(gp, 1.0, kDefault) >= 0.99);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int quad_ok = 0;
    int smooth_ok = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const double a = 0.2 + 5 * u(rng);
        const double b = 0.1 + 3 * u(rng);
        const double gamma_prev = std::exp(4 * u(rng) - 2);
        const auto q = parabola(a, b, u(rng));
        const auto s0 = q.sample(0, 0);
        const auto r = pls(q, s0.value, s0.derivative, gamma_prev, 0, 0, kDefault, 0);
        CHECK(r.evaluations >= 1);
        CHECK(r.evaluations <= kSearchBudget);
        CHECK(r.j == r.evaluations);
        const auto truth = q.sample(r.gamma, 0);
        quad_ok += (r.accepted_by == AcceptedBy::wolfe_pass &&
                    bool_wolfe(s0.value, s0.derivative, truth.value, truth.derivative, r.gamma, kDefault))
                       ? 1
                       : 0;

        // Convex but not quadratic: a (t - b)^2 + e (t - b)^4.
        const double e = 2 * u(rng);
        const FunctionRay w([=](double t, std::uint64_t) {
            const double x = t - b;
            return RaySample{a * x * x + e * x * x * x * x, 2 * a * x + 4 * e * x * x * x};
        });
        const auto w0 = w.sample(0, 0);
        const auto rw = pls(w, w0.value, w0.derivative, gamma_prev, 0, 0, kDefault, 0);
        const auto tw = w.sample(rw.gamma, 0);
        smooth_ok += (rw.accepted_by != AcceptedBy::wolfe_pass ||
                      bool_wolfe(w0.value, w0.derivative, tw.value, tw.derivative, rw.gamma, kDefault))
                         ? 1
                         : 0;
    }
    CHECK(quad_ok >= 95);
    CHECK(smooth_ok >= 95);
}

TEST_CASE("pls does not depend on the scale of the ray") {
    // Two chained searches on a(t - b)^2 and on the same ray scaled by 1e-14,
    // carrying the noise estimates from the first search into the second.
    for (const double b : {0.3, 2.5, 7.0}) {
        std::vector<std::vector<double>> steps;
        std::vector<double> carried;
        for (const double scale : {1.0, 1e-14}) {
            const auto q = parabola(scale, b, 0.0);
            const auto s0 = q.sample(0, 0);
            const auto first = pls(q, s0.value, s0.derivative, 1.0, 0, 0, kDefault, 0);
            const auto second = pls(q, s0.value, s0.derivative, 1.0, *first.var, *first.dvar, kDefault, 0);
            CHECK(second.accepted_by == AcceptedBy::wolfe_pass);
            steps.push_back(second.lists.steps);
            carried.push_back(*second.var / (scale * scale));
        }
        REQUIRE(steps[0].size() == steps[1].size());
        for (std::size_t i = 0; i < steps[0].size(); ++i) {
            CHECK(steps[1][i] == doctest::Approx(steps[0][i]).epsilon(1e-9));
        }
        CHECK(carried[1] <= carried[0] + 1e-20);
    }
}

TEST_CASE("pls under heavy noise") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const FunctionRay noisy([seed](double t, std::uint64_t j) {
            std::mt19937_64 rng(seed * 1000 + j);
            std::normal_distribution<double> z;
            return RaySample{(t - 1) * (t - 1) + 10.0 * z(rng), 2 * (t - 1) + 10.0 * z(rng)};
        });
        const auto out = pls(noisy, 1, -2, 1.0, 100.0, 100.0, kDefault, 3);
        CHECK(out.gamma > 0.0);
        CHECK(out.evaluations <= kSearchBudget);
        CHECK(out.j == 3 + out.evaluations);
        REQUIRE(out.var.has_value());
        REQUIRE(out.dvar.has_value());
        CHECK(*out.var >= 1e-12);
        CHECK(*out.dvar >= 1e-12);
    }
}

TEST_CASE("c_w = 0 accepts the first evaluation") {
    WolfeParams w{};
    w.c_w = 0.0;
    const auto out = pls(unit_parabola(), 1, -2, 0.01, 0, 0, w, 0);
    CHECK(out.evaluations == 1);
    CHECK(out.gamma == 0.01);
}

TEST_CASE("d-informed pls") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const double a = 0.2 + 5 * u(rng);
        const double b = 0.5 + 3 * u(rng);
        const double noise = 0.05 * u(rng);
        const auto seed = static_cast<std::uint64_t>(rep);
        const FunctionRay ray([=](double t, std::uint64_t j) {
            std::mt19937_64 r(seed * 7919 + j);
            std::normal_distribution<double> z;
            return RaySample{a * (t - b) * (t - b) + noise * z(r), 2 * a * (t - b) + noise * z(r)};
        });
        const auto s0 = ray.sample(0, 0);
        const double gamma_prev = 0.05 + 0.2 * u(rng);
        const double var = noise * noise;

        // A floor far below every Extend boundary never binds.
        const auto plain = pls(ray, s0.value, s0.derivative, gamma_prev, var, var, kDefault, 1);
        const auto low = d_informed_pls(ray, s0.value, s0.derivative, gamma_prev, var, var, kDefault, 1, 1e-12, 1.0,
                                        DLimitMode::literal_floor);
        CHECK(low.gamma == plain.gamma);
        CHECK(low.lists.steps == plain.lists.steps);
        CHECK(low.j == plain.j);

        // Cap mode keeps every accepted step under d / ||g||.
        const double cap = 2.0 * gamma_prev;
        const auto capped = d_informed_pls(ray, s0.value, s0.derivative, gamma_prev, var, var, kDefault, 1, cap * 3.0,
                                           3.0, DLimitMode::cap);
        CHECK(capped.gamma <= cap * (1 + 1e-12));
        for (const double t : capped.lists.steps) {
            CHECK(t <= cap * (1 + 1e-12));
        }
    }
}
