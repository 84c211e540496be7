#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "steplab/errors.hpp"
#include "steplab/gp1d/hermite.hpp"
#include "steplab/gp1d/kernel.hpp"
#include "steplab/gp1d/surrogate.hpp"

using namespace steplab;

namespace {

// Reference kernel written from k(s,t) = m^3/3 + |t - s| m^2 / 2, m = min(s,t) + 1,
// with derivative flags for each argument.
double ref_k(double s, double t, bool ds, bool dt) {
    if (s > t) {
        return ref_k(t, s, dt, ds);
    }
    const double m = s + 1.0;
    const double big = t + 1.0;
    if (!ds && !dt) {
        return m * m * m / 3.0 + (t - s) * m * m / 2.0;
    }
    if (!ds && dt) {
        return m * m / 2.0;
    }
    if (ds && !dt) {
        return m * big - m * m / 2.0;
    }
    return m;
}

struct Dense {
    std::vector<double> t;
    Eigen::VectorXd target;
    Eigen::MatrixXd gram;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    double y0, s0, tref;
};

// Brute-force conditioning with an LU solve, normalizing by hand.
Dense dense(const std::vector<Observation>& raw, double tref) {
    Dense d;
    d.y0 = raw[0].y;
    d.s0 = -raw[0].dy;
    d.tref = tref;
    const auto n = static_cast<Eigen::Index>(raw.size());
    d.gram.resize(2 * n, 2 * n);
    d.target.resize(2 * n);
    std::vector<double> vy, vd;
    for (const auto& o : raw) {
        d.t.push_back(o.t / tref);
        vy.push_back(std::max(o.var / (d.s0 * tref * d.s0 * tref), 1e-12));
        vd.push_back(std::max(o.dvar / (d.s0 * d.s0), 1e-12));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = raw[static_cast<std::size_t>(i)];
        d.target[2 * i] = (o.y - d.y0) / (d.s0 * tref);
        d.target[2 * i + 1] = o.dy / d.s0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = d.t[static_cast<std::size_t>(i)];
            const double b = d.t[static_cast<std::size_t>(j)];
            d.gram(2 * i, 2 * j) = ref_k(a, b, false, false);
            d.gram(2 * i, 2 * j + 1) = ref_k(a, b, false, true);
            d.gram(2 * i + 1, 2 * j) = ref_k(a, b, true, false);
            d.gram(2 * i + 1, 2 * j + 1) = ref_k(a, b, true, true);
        }
        d.gram(2 * i, 2 * i) += vy[static_cast<std::size_t>(i)];
        d.gram(2 * i + 1, 2 * i + 1) += vd[static_cast<std::size_t>(i)];
    }
    d.lu.compute(d.gram);
    return d;
}

Eigen::VectorXd cross(const Dense& d, double t, bool dt) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(2 * d.t.size()));
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        c[static_cast<Eigen::Index>(2 * i)] = ref_k(d.t[i], t, false, dt);
        c[static_cast<Eigen::Index>(2 * i + 1)] = ref_k(d.t[i], t, true, dt);
    }
    return c;
}

double dense_mean(const Dense& d, double t, bool dt) { return cross(d, t, dt).dot(d.lu.solve(d.target)); }

Eigen::Matrix4d dense_joint(const Dense& d, double t1, double t2) {
    const double ts[4] = {t1, t1, t2, t2};
    const bool fl[4] = {false, true, false, true};
    Eigen::MatrixXd c(d.gram.rows(), 4);
    Eigen::Matrix4d prior;
    for (int i = 0; i < 4; ++i) {
        c.col(i) = cross(d, ts[i], fl[i]);
        for (int j = 0; j < 4; ++j) {
            prior(i, j) = ref_k(ts[i], ts[j], fl[i], fl[j]);
        }
    }
    return prior - c.transpose() * d.lu.solve(c);
}

GPSurrogate build(const std::vector<Observation>& raw, double tref) {
    auto gp = GPSurrogate::init(raw[0].y, raw[0].dy, raw[0].var, raw[0].dvar, tref);
    for (std::size_t i = 1; i < raw.size(); ++i) {
        gp = gp.update(raw[i]);
    }
    return gp;
}

std::vector<Observation> random_obs(std::mt19937_64& rng, std::size_t n, bool noisy) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Observation> raw;
    raw.push_back({0.0, 3.0 * u(rng) - 1.0, -0.5 - 2.0 * u(rng), noisy ? 0.1 * u(rng) : 0.0,
                   noisy ? 0.1 * u(rng) : 0.0});
    double t = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        t += 0.1 + 1.5 * u(rng);
        raw.push_back({t, 4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0, noisy ? 0.1 * u(rng) : 0.0,
                       noisy ? 0.1 * u(rng) : 0.0});
    }
    return raw;
}

}  // namespace

TEST_CASE("kernel matches the reference form and finite differences") {
    const gp::WienerKernel k;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const double h = 1e-5;
    for (int i = 0; i < 1000; ++i) {
        const double s = u(rng);
        const double t = u(rng);
        CHECK(k.k(s, t) == doctest::Approx(ref_k(s, t, false, false)).epsilon(1e-12));
        if (std::abs(s - t) < 2 * h) {
            continue;
        }
        const double fd_t = (k.k(s, t + h) - k.k(s, t - h)) / (2 * h);
        const double fd_s = (k.k(s + h, t) - k.k(s - h, t)) / (2 * h);
        const double fd_st = (k.d_b(s + h, t) - k.d_b(s - h, t)) / (2 * h);
        CHECK(k.d_b(s, t) == doctest::Approx(fd_t).epsilon(1e-6));
        CHECK(k.d_a(s, t) == doctest::Approx(fd_s).epsilon(1e-6));
        CHECK(k.d_ab(s, t) == doctest::Approx(fd_st).epsilon(1e-6));
    }
}

TEST_CASE("init") {
    const auto gp = GPSurrogate::init(5.0, -2.0, 0.0, 0.0);
    const GPMoments raw = gp.raw_moments(0.0);
    CHECK(raw.mean == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(raw.dmean == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(gp.moments(0.0).var <= 1e-10);
    CHECK(gp.moments(0.0).mean == doctest::Approx(0.0));
    CHECK(gp.moments(0.0).dmean == doctest::Approx(-1.0));
    CHECK_THROWS_AS(GPSurrogate::init(1.0, 0.0, 0.0, 0.0), NotDescentDirection);
    CHECK_THROWS_AS(GPSurrogate::init(1.0, 2.0, 0.0, 0.0), NotDescentDirection);

    // Far from the data the mean follows the dense solve.
    const Dense d = dense({{0.0, 5.0, -2.0, 0.0, 0.0}}, 1.0);
    for (const double t : {0.5, 3.0, 50.0}) {
        CHECK(gp.moments(t).mean == doctest::Approx(dense_mean(d, t, false)).epsilon(1e-8));
    }
}

TEST_CASE("posterior matches the dense oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> probe(0.0, 12.0);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(rep % 11);
        const bool noisy = rep % 2 == 1;
        const double tref = 0.2 + 0.1 * rep;
        const auto raw = random_obs(rng, n, noisy);
        const GPSurrogate gp = build(raw, tref);
        const Dense d = dense(raw, tref);
        for (int k = 0; k < 20; ++k) {
            const double t = probe(rng);
            const GPMoments m = gp.moments(t);
            CHECK(m.mean == doctest::Approx(dense_mean(d, t, false)).epsilon(1e-8).scale(1.0));
            CHECK(m.dmean == doctest::Approx(dense_mean(d, t, true)).epsilon(1e-8).scale(1.0));
            const double t2 = probe(rng);
            const Eigen::Matrix4d c = gp.joint_cov(t, t2);
            const Eigen::Matrix4d ref = dense_joint(d, t, t2);
            CHECK((c - ref).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
            CHECK(m.var == doctest::Approx(ref(0, 0)).epsilon(1e-8).scale(1.0));
            CHECK(m.cov_value_deriv == doctest::Approx(ref(0, 1)).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("noise-free interpolation and duplicates") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto raw = random_obs(rng, 1 + static_cast<std::size_t>(rep % 6), false);
        const GPSurrogate gp = build(raw, 1.0);
        for (const auto& o : raw) {
            const GPMoments m = gp.raw_moments(o.t);
            CHECK(m.mean == doctest::Approx(o.y).epsilon(1e-8).scale(1.0));
            CHECK(m.dmean == doctest::Approx(o.dy).epsilon(1e-8).scale(1.0));
            CHECK(gp.moments(o.t).var <= 1e-10);
        }
    }
    const std::vector<Observation> raw{{0.0, 1.0, -2.0}, {1.0, 0.0, 0.0}};
    const GPSurrogate gp = build(raw, 1.0);
    const GPSurrogate dup = gp.update(raw[1]);
    for (const double t : {0.0, 0.3, 1.0, 2.5}) {
        CHECK(dup.moments(t).mean == doctest::Approx(gp.moments(t).mean).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("cubic data is reproduced") {
    // A cubic is matched exactly by the piecewise-cubic posterior mean.
    const auto f = [](double t) { return t * t * t - 3 * t * t - t + 1; };
    const auto df = [](double t) { return 3 * t * t - 6 * t - 1; };
    std::vector<Observation> raw;
    for (const double t : {0.0, 1.0, 2.5}) {
        raw.push_back({t, f(t), df(t)});
    }
    const GPSurrogate gp = build(raw, 1.0);
    for (const auto& o : raw) {
        CHECK(gp.raw_moments(o.t).mean == doctest::Approx(o.y).epsilon(1e-8).scale(1.0));
        CHECK(gp.raw_moments(o.t).dmean == doctest::Approx(o.dy).epsilon(1e-8).scale(1.0));
    }
    // Between nodes the mean is the Hermite cubic of the nodes, i.e. f itself.
    for (const double t : {0.25, 0.5, 1.7, 2.2}) {
        CHECK(gp.raw_moments(t).mean == doctest::Approx(f(t)).epsilon(1e-7).scale(1.0));
    }
}

TEST_CASE("mean is cubic between nodes") {
    std::mt19937_64 rng(5);
    const auto raw = random_obs(rng, 5, true);
    const GPSurrogate gp = build(raw, 1.0);
    const double a = raw[1].t;
    const double b = raw[2].t;
    Eigen::Matrix4d v;
    Eigen::Vector4d y;
    for (int i = 0; i < 4; ++i) {
        const double t = a + (b - a) * (0.1 + 0.2 * i);
        v.row(i) << 1, t, t * t, t * t * t;
        y[i] = gp.moments(t).mean;
    }
    const Eigen::Vector4d c = v.fullPivLu().solve(y);
    const double t = a + (b - a) * 0.77;
    CHECK(c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t == doctest::Approx(gp.moments(t).mean).epsilon(1e-8));
}

TEST_CASE("high-noise observation barely moves the mean") {
    const std::vector<Observation> raw{{0.0, 1.0, -1.0, 0.01, 0.01}, {1.0, 0.2, 0.1, 0.01, 0.01}};
    const GPSurrogate gp = build(raw, 1.0);
    const GPSurrogate noisy = gp.update({2.0, 30.0, 10.0, 1e6, 1e6});
    for (double t = 0.0; t <= 5.0; t += 0.1) {
        CHECK(std::abs(noisy.moments(t).mean - gp.moments(t).mean) <= 1e-3);
    }
}

TEST_CASE("variances, slopes and covariance structure") {
    std::mt19937_64 rng(9);
    const auto raw = random_obs(rng, 6, true);
    const GPSurrogate gp = build(raw, 0.7);
    std::uniform_real_distribution<double> u(0.0, 15.0);
    for (int i = 0; i < 1000; ++i) {
        const GPMoments m = gp.moments(u(rng));
        CHECK(m.var >= -1e-12);
        CHECK(m.dvar >= -1e-12);
    }
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        const double t = u(rng);
        bool near_node = false;
        for (const auto& o : raw) {
            near_node = near_node || std::abs(o.t / 0.7 - t) < 1e-3;
        }
        if (near_node) {
            continue;
        }
        const double fd = (gp.moments(t + h).mean - gp.moments(t - h).mean) / (2 * h);
        CHECK(gp.moments(t).dmean == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
    for (int i = 0; i < 100; ++i) {
        const Eigen::Matrix4d c = gp.joint_cov(u(rng), u(rng));
        CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(c).eigenvalues().minCoeff() >= -1e-10);
    }
    const Eigen::Matrix4d same = gp.joint_cov(1.3, 1.3);
    CHECK((same.topLeftCorner<2, 2>() - same.bottomRightCorner<2, 2>()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((same.topRightCorner<2, 2>() - same.topLeftCorner<2, 2>()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adding observations never increases variance") {
    std::mt19937_64 rng(21);
    const auto raw = random_obs(rng, 8, true);
    GPSurrogate gp = GPSurrogate::init(raw[0].y, raw[0].dy, raw[0].var, raw[0].dvar);
    std::vector<double> probes;
    for (int i = 0; i < 100; ++i) {
        probes.push_back(0.15 * i);
    }
    for (std::size_t k = 1; k < raw.size(); ++k) {
        const GPSurrogate next = gp.update(raw[k]);
        for (const double t : probes) {
            CHECK(next.moments(t).var <= gp.moments(t).var + 1e-10);
            CHECK(next.moments(t).dvar <= gp.moments(t).dvar + 1e-10);
        }
        gp = next;
    }
}

TEST_CASE("capacity") {
    GPSurrogate gp = GPSurrogate::init(0.0, -1.0, 0.0, 0.0);
    for (int i = 1; i < 11; ++i) {
        gp = gp.update({0.5 * i, -0.1 * i, -0.5, 0.01, 0.01});
    }
    CHECK(gp.size() == 11);
    CHECK_THROWS_AS(gp.update({7.0, 0.0, 0.0}), InvalidArgument);
}

TEST_CASE("segment minimum") {
    const auto f = [](double t) { return (t - 1) * (t - 1); };
    const auto df = [](double t) { return 2 * (t - 1); };
    const GPSurrogate gp = build({{0.0, f(0), df(0)}, {2.0, f(2), df(2)}}, 1.0);
    const auto m = gp.segment_minimum(0.0, 2.0);
    REQUIRE(m.has_value());
    CHECK(*m == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(gp.raw_moments(*m).dmean) <= 1e-8);

    const GPSurrogate down = build({{0.0, 1.0, -1.0}, {1.0, 0.0, -1.0}}, 1.0);
    CHECK_FALSE(down.segment_minimum(0.0, 1.0).has_value());

    // Concave bump on [0, 2]: slope goes from up to down, only a maximum inside.
    const GPSurrogate bump = build({{0.0, 0.0, -1e-9}, {0.3, 0.5, 1.0}, {2.0, 0.5, -1.0}}, 1.0);
    CHECK_FALSE(bump.segment_minimum(0.3, 2.0).has_value());
}

TEST_CASE("hermite cubic") {
    const HermiteCubic c{0.0, 2.0, 1.0, 1.0, -2.0, 2.0};
    CHECK(c.value(1.0) == doctest::Approx(0.0));
    CHECK(c.slope(1.0) == doctest::Approx(0.0).scale(1.0));
    REQUIRE(c.interior_minimum().has_value());
    CHECK(*c.interior_minimum() == doctest::Approx(1.0));
    const HermiteCubic cub{0.0, 2.0, 0.0, 2.0, -3.0, 9.0};  // t^3 - 3t
    CHECK(*cub.interior_minimum() == doctest::Approx(1.0));
    const HermiteCubic mono{0.0, 1.0, 1.0, 0.0, -1.0, -1.0};
    CHECK_FALSE(mono.interior_minimum().has_value());
}
