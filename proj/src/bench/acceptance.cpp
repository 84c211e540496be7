#include "steplab/bench/acceptance.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "steplab/bench/config.hpp"
#include "steplab/bench/experiment.hpp"
#include "steplab/combined/combined.hpp"
#include "steplab/core/rng.hpp"
#include "steplab/core/ray.hpp"
#include "steplab/dadapt/dadapt.hpp"
#include "steplab/descent/descent.hpp"
#include "steplab/errors.hpp"
#include "steplab/gp1d/surrogate.hpp"
#include "steplab/linesearch/search.hpp"
#include "steplab/linesearch/wolfe.hpp"

namespace steplab::bench {

namespace {

constexpr std::uint64_t kTagAcceptance = 0x616363;  // "acc"

constexpr std::array<const char*, kCriterionCount> kTitles = {
    "constant-step subgradient bound", "optimal-rate bound",     "D lower bound",
    "D growth",                        "GP correctness",         "quadrant probability",
    "PLS noise-free degeneracy",       "inexact line search fixture", "reduction property",
    "combined robustness",             "harness determinism"};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

std::shared_ptr<const StochasticOracle> noise_free(DeterministicProblem p) {
    return std::make_shared<const StochasticOracle>(std::move(p), NoNoise{}, 0);
}

int seeded_dim(std::uint64_t seed) { return 2 + static_cast<int>(seed % 9); }

// --- 1, 2: subgradient bounds on the 1-D shifted absolute value ------------

CriterionResult constant_step_bound() {
    CriterionResult r{1, "constant-step subgradient bound", true, {}, 0.0};
    const auto oracle = noise_free(make_abs_shift(make_point(std::vector<double>{10.0})));
    const Point x0 = Point::Zero(1);
    std::size_t total = 0;
    for (const double gamma : {0.01, 0.1, 1.0}) {
        const RunTrace t = sgd_run(*oracle, x0, Schedule::constant(gamma), 10000);
        const auto rows = parse_trace_csv(trace_to_csv(t));
        const std::size_t v = count_bound_violations(rows, gamma, 10.0, 1.0);
        total += v;
        r.detail += "gamma=" + fmt(gamma) + ": " + std::to_string(v) + " violations; ";
    }
    r.passed = total == 0;
    return r;
}

CriterionResult optimal_rate_bound() {
    CriterionResult r{2, "optimal-rate bound", false, {}, 0.0};
    const auto oracle = noise_free(make_abs_shift(make_point(std::vector<double>{10.0})));
    const std::size_t n = 10000;
    const RunTrace t = sgd_run(*oracle, Point::Zero(1), Schedule::optimal_rate(10.0, 1.0), n);
    double best = INFINITY;
    for (const auto& rec : t.records) {
        best = std::min(best, rec.gap.value_or(INFINITY));
    }
    const double bound = 10.0 * 1.0 / std::sqrt(static_cast<double>(n));
    r.passed = !t.diverged() && best <= bound;
    r.detail = "min gap " + fmt(best) + " vs bound " + fmt(bound);
    return r;
}

// --- 3, 4: D-Adaptation lower bound and growth ------------------------------

CriterionResult d_lower_bound() {
    CriterionResult r{3, "D lower bound", true, {}, 0.0};
    struct Instance {
        std::string name;
        DeterministicProblem prob;
    };
    std::vector<Instance> suite;
    for (std::uint64_t s = 0; s < 20; ++s) {
        suite.push_back({"quadratic#" + std::to_string(s), make_problem("quadratic", seeded_dim(s), s)});
    }
    suite.push_back({"abs-shift(c=10)", make_abs_shift(make_point(std::vector<double>{10.0}))});
    for (std::uint64_t s = 0; s < 5; ++s) {
        suite.push_back({"abs-shift#" + std::to_string(s), make_problem("abs-shift", seeded_dim(s), s)});
    }
    std::size_t steps = 0;
    std::size_t monotone = 0;
    double worst = 0.0;
    std::string worst_name;
    std::vector<std::string> violators;
    std::vector<std::string> diverged;
    for (const auto& inst : suite) {
        const StochasticOracle oracle(inst.prob, NoNoise{}, 0);
        const Point x0 = Point::Zero(inst.prob.dim);
        const double dist = *inst.prob.distance_from(x0);
        const RunTrace t = dadapt_sgd_run(oracle, x0, {}, kDefaultD0, 1000);
        bool violated = false;
        for (std::size_t i = 0; i < t.records.size(); ++i) {
            const double d = *t.records[i].d;
            if (d / dist > worst) {
                worst = d / dist;
                worst_name = inst.name;
            }
            violated = violated || d > dist * (1.0 + 1e-9);
            if (i > 0) {
                ++steps;
                monotone += d >= *t.records[i - 1].d ? 1 : 0;
            }
        }
        if (violated) {
            violators.push_back(inst.name);
        }
        if (t.diverged()) {
            diverged.push_back(inst.name);
        }
    }
    r.passed = violators.empty() && monotone == steps;
    r.detail = "max d/D " + fmt(worst, 6) + " (" + worst_name + "); monotone " + std::to_string(monotone) + "/" +
               std::to_string(steps);
    if (!diverged.empty()) {
        r.detail += "; runs ending early by divergence:";
        for (const auto& v : diverged) {
            r.detail += " " + v;
        }
    }
    if (!violators.empty()) {
        r.detail += "; d > D on:";
        for (const auto& v : violators) {
            r.detail += " " + v;
        }
    }
    return r;
}

CriterionResult d_growth() {
    CriterionResult r{4, "D growth", false, {}, 0.0};
    const StochasticOracle oracle(make_abs_shift(make_point(std::vector<double>{10.0})), NoNoise{}, 0);
    const RunTrace t = dadapt_sgd_run(oracle, Point::Zero(1), {}, 1e-6, 100);
    std::optional<std::size_t> hit;
    for (const auto& rec : t.records) {
        if (*rec.d >= 1.0) {
            hit = rec.k;
            break;
        }
    }
    r.passed = hit.has_value();
    r.detail = hit ? "d_k >= 1 at k=" + std::to_string(*hit) : "d_100 = " + fmt(*t.records.back().d);
    return r;
}

// --- 5: GP surrogate --------------------------------------------------------

struct SyntheticRay {
    double a, b, c, w;
    double f(double t) const { return a * t * t + b * t + c * std::sin(w * t); }
    double df(double t) const { return 2 * a * t + b + c * w * std::cos(w * t); }
};

SyntheticRay draw_ray(SplitMix64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SyntheticRay s{0.2 + 2.0 * u(gen), 0.0, 0.5 * u(gen), 0.5 + 2.0 * u(gen)};
    s.b = -(1.0 + 2.0 * u(gen)) - s.c * s.w;  // keeps f'(0) < 0
    return s;
}

GPSurrogate draw_surrogate(std::uint64_t seed, std::vector<double>* nodes = nullptr) {
    auto gen = make_stream(seed, 0, kTagAcceptance + 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const SyntheticRay ray = draw_ray(gen);
    const double t_ref = std::pow(10.0, -1.0 + 2.0 * u(gen));
    const int n = 1 + static_cast<int>(u(gen) * 10.0);  // 1..10 extra observations
    GPSurrogate gp = GPSurrogate::init(ray.f(0.0), ray.df(0.0), 0.0, 0.0, t_ref);
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
        t += t_ref * (0.1 + 0.6 * u(gen));
        gp = gp.update({t, ray.f(t), ray.df(t), 0.0, 0.0});
        if (nodes) {
            nodes->push_back(t / t_ref);
        }
    }
    return gp;
}

CriterionResult gp_correctness(bool quick) {
    CriterionResult r{5, "GP correctness", false, {}, 0.0};
    double interp_err = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const GPSurrogate gp = draw_surrogate(s);
        for (const auto& o : gp.observations()) {
            const GPMoments m = gp.raw_moments(o.t);
            const double scale = 1.0 + std::abs(o.y) + std::abs(o.dy);
            interp_err = std::max({interp_err, std::abs(m.mean - o.y) / scale, std::abs(m.dmean - o.dy) / scale});
        }
    }

    // Kernel derivatives against central differences, away from the a = b kink.
    const gp::WienerKernel kern;
    auto gen = make_stream(5, 1, kTagAcceptance);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    double fd_err = 0.0;
    const double h = 1e-5;
    for (int i = 0; i < (quick ? 200 : 1000); ++i) {
        const double a = u(gen);
        const double b = u(gen);
        if (std::abs(a - b) < 1e-3) {
            continue;
        }
        const double db = (kern.k(a, b + h) - kern.k(a, b - h)) / (2 * h);
        const double da = (kern.k(a + h, b) - kern.k(a - h, b)) / (2 * h);
        const double dab = (kern.d_b(a + h, b) - kern.d_b(a - h, b)) / (2 * h);
        fd_err = std::max({fd_err, std::abs(db - kern.d_b(a, b)), std::abs(da - kern.d_a(a, b)),
                           std::abs(dab - kern.d_ab(a, b))});
    }

    // Between nodes the mean is a cubic: the cubic through four interior
    // points predicts a fifth. Past the last node it is linear.
    double cubic_err = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        std::vector<double> nodes{0.0};
        const GPSurrogate gp = draw_surrogate(1000 + s, &nodes);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            const double lo = nodes[i];
            const double w = nodes[i + 1] - lo;
            std::array<double, 5> xs{};
            std::array<double, 5> ys{};
            for (int q = 0; q < 5; ++q) {
                xs[q] = lo + w * (0.1 + 0.2 * q);
                ys[q] = gp.moments(xs[q]).mean;
            }
            double pred = 0.0;
            for (int a = 0; a < 4; ++a) {
                double l = 1.0;
                for (int b = 0; b < 4; ++b) {
                    if (b != a) {
                        l *= (xs[4] - xs[b]) / (xs[a] - xs[b]);
                    }
                }
                pred += l * ys[a];
            }
            cubic_err = std::max(cubic_err, std::abs(pred - ys[4]) / (1.0 + std::abs(ys[4])));
        }
        const double last = nodes.back();
        const double m1 = gp.moments(last + 0.5).mean;
        const double m2 = gp.moments(last + 1.0).mean;
        const double m3 = gp.moments(last + 2.0).mean;
        cubic_err = std::max(cubic_err, std::abs((m3 - m2) - 2.0 * (m2 - m1)) / (1.0 + std::abs(m3)));
    }
    r.passed = interp_err <= 1e-8 && fd_err <= 1e-6 && cubic_err <= 1e-8;
    r.detail = "interp " + fmt(interp_err, 3) + ", kernel FD " + fmt(fd_err, 3) + ", cubic/linear " +
               fmt(cubic_err, 3);
    return r;
}

// --- 6: quadrant probability ------------------------------------------------

CriterionResult quadrant_probability(bool quick) {
    CriterionResult r{6, "quadrant probability", false, {}, 0.0};
    constexpr int kDraws = 50;
    constexpr int kChunks = 10;
    const std::uint64_t per_chunk = quick ? 100000 : 1000000;
    const std::array<double, 6> rhos = {0.0, 0.5, 0.95, -0.5, -0.95, 0.0};
    struct Draw {
        double ma, mb, sa, sb, rho;
    };
    std::vector<Draw> draws;
    auto gen = make_stream(6, 0, kTagAcceptance);
    std::uniform_real_distribution<double> mean(-1.5, 1.5);
    std::uniform_real_distribution<double> sd(0.5, 2.0);
    std::uniform_real_distribution<double> any_rho(-0.99, 0.99);
    for (int i = 0; i < kDraws; ++i) {
        Draw d{mean(gen), mean(gen), sd(gen), sd(gen), rhos[static_cast<std::size_t>(i) % rhos.size()]};
        if (i % 6 == 5) {
            d.rho = any_rho(gen);
        }
        draws.push_back(d);
    }
    std::vector<std::uint64_t> hits(kDraws * kChunks, 0);
    parallel_for(hits.size(), [&](std::size_t task) {
        const Draw& d = draws[task / kChunks];
        auto g = make_stream(6, 1 + task, kTagAcceptance);
        std::normal_distribution<double> z;
        const double c = std::sqrt(1.0 - d.rho * d.rho);
        std::uint64_t count = 0;
        for (std::uint64_t n = 0; n < per_chunk; ++n) {
            const double z1 = z(g);
            const double z2 = z(g);
            const double a = d.ma + d.sa * z1;
            const double b = d.mb + d.sb * (d.rho * z1 + c * z2);
            count += (a > 0.0 && b > 0.0) ? 1 : 0;
        }
        hits[task] = count;
    });
    double worst = 0.0;
    for (int i = 0; i < kDraws; ++i) {
        std::uint64_t total = 0;
        for (int c = 0; c < kChunks; ++c) {
            total += hits[static_cast<std::size_t>(i * kChunks + c)];
        }
        const double mc = static_cast<double>(total) / static_cast<double>(per_chunk * kChunks);
        const Draw& d = draws[static_cast<std::size_t>(i)];
        const double p = bvn_quadrant(d.ma, d.mb, d.sa * d.sa, d.sb * d.sb, d.rho * d.sa * d.sb);
        worst = std::max(worst, std::abs(p - mc));
    }
    const double independent = std::abs(bvn_quadrant(0, 0, 1, 1, 0) - 0.25);
    const double near_one = std::abs(bvn_quadrant(0, 0, 1, 1, 1.0 - 1e-12) - 0.5);
    const double at_one = std::abs(bvn_quadrant(0, 0, 1, 1, 1.0) - 0.5);
    const double analytic = std::max({independent, near_one, at_one});
    r.passed = worst <= 3e-3 && analytic <= 1e-6;
    r.detail = "max |p - MC| " + fmt(worst, 3) + " over " + std::to_string(kDraws) + " draws x " +
               std::to_string(per_chunk * kChunks) + " samples; analytic " + fmt(analytic, 3);
    return r;
}

// --- 7, 8: line searches ----------------------------------------------------

CriterionResult pls_noise_free() {
    CriterionResult r{7, "PLS noise-free degeneracy", false, {}, 0.0};
    std::size_t good = 0;
    std::size_t max_evals = 0;
    std::size_t errors = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const char* name = s % 2 == 0 ? "quadratic" : "logsumexp";
        const auto oracle = noise_free(make_problem(name, seeded_dim(s), s));
        auto gen = make_stream(s, 0, kTagAcceptance + 7);
        std::normal_distribution<double> z(0.0, 2.0);
        std::uniform_real_distribution<double> u(-2.0, 1.0);
        Point x = *oracle->problem().minimizer;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] += z(gen);
        }
        const Point g = oracle->problem().gradient(x);
        const RayRestriction ray = restrict(oracle, x, g);
        const RaySample at0 = ray.sample(0.0, 0);
        const double gamma_prev = std::pow(10.0, u(gen));
        try {
            const LineSearchOutcome out = pls(ray, at0.value, at0.derivative, gamma_prev, 1e-12, 1e-12, {}, 0);
            max_evals = std::max(max_evals, out.evaluations);
            const RaySample truth = ray.sample(out.gamma, 0);
            if (out.accepted_by == AcceptedBy::wolfe_pass &&
                bool_wolfe(at0.value, at0.derivative, truth.value, truth.derivative, out.gamma, {})) {
                ++good;
            }
        } catch (const std::exception&) {
            ++errors;
        }
    }
    r.passed = good >= 95 && max_evals <= kSearchBudget && errors == 0;
    r.detail = std::to_string(good) + "/100 Wolfe-certified, max evaluations " + std::to_string(max_evals) +
               ", errors " + std::to_string(errors);
    return r;
}

CriterionResult inexact_fixture() {
    CriterionResult r{8, "inexact line search fixture", false, {}, 0.0};
    const FunctionRay ray([](double t, std::uint64_t) { return RaySample{(t - 1) * (t - 1), 2 * (t - 1)}; });
    const LineSearchOutcome out = inexact_line_search(ray, 1.0, -2.0, 0.125, {}, 0);
    r.passed = out.gamma == 0.5 && out.evaluations == 3 && out.accepted_by == AcceptedBy::wolfe_pass;
    r.detail = "gamma " + fmt(out.gamma) + " after " + std::to_string(out.evaluations) + " evaluations";
    return r;
}

// --- 9, 10: combined algorithm ----------------------------------------------

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_opt(const std::optional<double>& a, const std::optional<double>& b) {
    return a.has_value() == b.has_value() && (!a || same_bits(*a, *b));
}

CriterionResult reduction() {
    CriterionResult r{9, "reduction property", false, {}, 0.0};
    std::size_t identical = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const StochasticOracle oracle(make_problem("quadratic", seeded_dim(s), s), NoNoise{}, s);
        const Point x0 = Point::Zero(oracle.dim());
        const RunTrace a4 = dadapt_sgd_run(oracle, x0, {}, kDefaultD0, 200);
        CombinedConfig cfg;
        cfg.wolfe.c_w = 0.0;
        cfg.steps = 200;
        const RunTrace a5 = sgd_pls_dadapt_run(oracle, x0, cfg).trace;
        bool same = a4.records.size() == a5.records.size() && a4.status == a5.status &&
                    a4.final_x.size() == a5.final_x.size();
        for (std::size_t i = 0; same && i < a4.records.size(); ++i) {
            const auto& p = a4.records[i];
            const auto& q = a5.records[i];
            same = p.k == q.k && same_bits(p.gamma, q.gamma) && same_opt(p.d, q.d) && same_opt(p.gap, q.gap) &&
                   same_opt(p.best_gap, q.best_gap) && same_bits(p.grad_norm, q.grad_norm);
        }
        for (Eigen::Index i = 0; same && i < a4.final_x.size(); ++i) {
            same = same_bits(a4.final_x[i], a5.final_x[i]);
        }
        identical += same ? 1 : 0;
    }
    r.passed = identical == 10;
    r.detail = std::to_string(identical) + "/10 seeds bit-identical";
    return r;
}

CriterionResult combined_robustness(bool quick) {
    CriterionResult r{10, "combined robustness", true, {}, 0.0};
    const std::uint64_t seeds = quick ? 6 : 20;
    for (const PlsMode mode : {PlsMode::plain, PlsMode::d_informed}) {
        std::vector<double> ratio(seeds, 0.0);
        std::vector<int> bad(seeds, 0);
        parallel_for(seeds, [&](std::size_t s) {
            const StochasticOracle oracle(make_problem("quadratic", seeded_dim(s), s), AdditiveGaussian{0.1, 0.1},
                                          s);
            const Point x0 = Point::Zero(oracle.dim());
            CombinedConfig cfg;
            cfg.pls_mode = mode;
            cfg.steps = 200;
            try {
                const RunTrace t = sgd_pls_dadapt_run(oracle, x0, cfg).trace;
                bad[s] = t.diverged() ? 1 : 0;
                ratio[s] = *t.records.back().best_gap / *t.records.front().gap;
            } catch (const std::exception&) {
                bad[s] = 2;
                ratio[s] = INFINITY;
            }
        });
        const int diverged = static_cast<int>(std::count(bad.begin(), bad.end(), 1));
        const int errors = static_cast<int>(std::count(bad.begin(), bad.end(), 2));
        const double med = quantile(ratio, 0.5);
        const bool ok = diverged == 0 && errors == 0 && med <= 1e-2;
        r.passed = r.passed && ok;
        r.detail += std::string(mode == PlsMode::plain ? "plain" : "d-informed") + ": median best/initial " +
                    fmt(med, 3) + ", diverged " + std::to_string(diverged) + ", errors " + std::to_string(errors) +
                    "; ";
    }
    return r;
}

// --- 11: harness determinism ------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CriterionResult harness_determinism() {
    CriterionResult r{11, "harness determinism", false, {}, 0.0};
    const std::string text = R"({
  "problem": {"name": "quadratic", "p": 4},
  "noise": {"kind": "additive", "sigma_f": 0.1, "sigma_g": 0.1},
  "optimizers": [
    {"name": "dadapt-sgd"},
    {"name": "sgd-pls-dadapt", "pls_mode": "d-informed"},
    {"name": "adagrad-norm"}
  ],
  "steps": 50,
  "seeds": [1, 2, 3]
})";
    const auto base = std::filesystem::temp_directory_path() /
                      ("steplab-determinism-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    ExperimentConfig cfg = parse_config(text);
    std::size_t files = 0;
    bool same = true;
    std::vector<std::filesystem::path> dirs = {base / "a", base / "b"};
    for (const auto& d : dirs) {
        cfg.output = d.string();
        run_experiment(cfg);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
        ++files;
        same = same && slurp(entry.path()) == slurp(dirs[1] / entry.path().filename());
    }
    std::filesystem::remove_all(base);
    r.passed = same && files == 3 * 3 + 2;
    r.detail = std::to_string(files) + " files compared, " + (same ? "byte-identical" : "MISMATCH");
    return r;
}

}  // namespace

std::size_t count_bound_violations(const std::vector<TraceRow>& rows, double gamma, double distance,
                                   double lipschitz) {
    std::size_t violations = 0;
    double best = INFINITY;
    for (const auto& row : rows) {
        if (row.gap) {
            best = std::min(best, *row.gap);
        }
        if (row.k == 0) {
            continue;
        }
        const double k = static_cast<double>(row.k);
        const double bound =
            (distance * distance + lipschitz * lipschitz * gamma * gamma * k) / (2.0 * gamma * k);
        violations += best > bound ? 1 : 0;
    }
    return violations;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        switch (id) {
            case 1: r = constant_step_bound(); break;
            case 2: r = optimal_rate_bound(); break;
            case 3: r = d_lower_bound(); break;
            case 4: r = d_growth(); break;
            case 5: r = gp_correctness(opts.quick); break;
            case 6: r = quadrant_probability(opts.quick); break;
            case 7: r = pls_noise_free(); break;
            case 8: r = inexact_fixture(); break;
            case 9: r = reduction(); break;
            case 10: r = combined_robustness(opts.quick); break;
            case 11: r = harness_determinism(); break;
            default: throw InvalidArgument("unknown criterion " + std::to_string(id));
        }
    } catch (const InvalidArgument&) {
        throw;
    } catch (const std::exception& e) {
        r.id = id;
        r.title = kTitles[static_cast<std::size_t>(id - 1)];
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_result) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) {
        out.push_back(run_criterion(id, opts));
        if (on_result) {
            on_result(out.back());
        }
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    char head[32];
    std::snprintf(head, sizeof head, "%s %2d  ", r.passed ? "PASS" : "FAIL", r.id);
    char tail[32];
    std::snprintf(tail, sizeof tail, " [%.2f s]", r.seconds);
    return std::string(head) + r.title + ": " + r.detail + tail;
}

}  // namespace steplab::bench
