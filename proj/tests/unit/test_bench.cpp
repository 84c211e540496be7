#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <regex>
#include <sstream>
#include <string>

#include "steplab/bench/acceptance.hpp"
#include "steplab/bench/config.hpp"
#include "steplab/bench/csv.hpp"
#include "steplab/bench/experiment.hpp"
#include "steplab/bench/plot.hpp"
#include "steplab/descent/descent.hpp"

using namespace steplab;
using namespace steplab::bench;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("steplab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

std::optional<int> error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config(R"({
  "problem": {"name": "abs-shift", "p": 3, "seed": 4},
  "noise": {"kind": "additive", "sigma_f": 0.1, "sigma_g": 0.2},
  "optimizers": [
    {"name": "sgd", "gamma": 0.1},
    {"name": "sgd-pls-dadapt", "label": "dinf", "pls_mode": "d-informed", "d_limit_mode": "cap"}
  ],
  "steps": 25,
  "seeds": [1, 2, 3],
  "output": "somewhere"
})");
    CHECK(cfg.problem.name == "abs-shift");
    CHECK(cfg.problem.p == 3);
    CHECK(*cfg.problem.seed == 4);
    CHECK(cfg.noise.kind == NoiseSpec::Kind::additive);
    CHECK(cfg.noise.sigma_g == 0.2);
    REQUIRE(cfg.optimizers.size() == 2);
    CHECK(cfg.optimizers[0].label == "sgd");
    CHECK(*cfg.optimizers[0].gamma == 0.1);
    CHECK(cfg.optimizers[1].label == "dinf");
    CHECK(cfg.optimizers[1].d_limit_mode == "cap");
    CHECK(cfg.steps == 25);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});

    const auto single = parse_config(R"({"optimizer": {"name": "dadapt-sgd"}})");
    CHECK(single.optimizers.size() == 1);
    CHECK(single.optimizers[0].d0 == 1e-6);
}

TEST_CASE("config errors carry line numbers") {
    CHECK(error_line("{\n  \"steps\": 10,\n  \"bogus\": 1,\n  \"optimizer\": {\"name\": \"sgd\", \"gamma\": 1}\n}") == 3);
    CHECK(error_line("{\n  \"optimizer\": {\n    \"name\": \"sgd\",\n    \"gamma\": -1\n  }\n}") == 4);
    CHECK(error_line("{\n  \"optimizer\": {\"name\": \"sgd\"}\n}").has_value());
    CHECK(error_line("{\n  \"steps\": 10,\n  \"optimizer\": {\"name\": \"nope\"}\n}") == 3);
    CHECK(error_line("{\n  \"steps\": ,\n}") == 2);
    // Key valid for another optimizer is still rejected.
    CHECK(error_line("{\n\"optimizer\": {\"name\": \"dadapt-sgd\",\n \"gamma\": 1}}") == 3);
    CHECK(error_line(
              "{\"optimizers\": [\n {\"name\": \"dadapt-sgd\"},\n {\"name\": \"dadapt-sgd\"}\n]}")
              .has_value());
    CHECK_THROWS_AS(parse_config(R"({"optimizer": {"name": "sgd", "gamma": 1}, "problem": {"name": "nope"}})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/steplab.json"), ConfigError);
}

TEST_CASE("csv round trip") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(1.0) == "1");
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");

    const StochasticOracle o(make_problem("logsumexp", 4, 2), AdditiveGaussian{0.1, 0.1}, 3);
    const RunTrace t = sgd_run(o, Point::Ones(4), Schedule::constant(0.05), 50);
    const std::string text = trace_to_csv(t);
    CHECK(text.rfind(std::string(kTraceHeader) + "\n", 0) == 0);
    const auto rows = parse_trace_csv(text);
    REQUIRE(rows.size() == t.records.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = t.records[i];
        CHECK(rows[i].k == r.k);
        CHECK(rows[i].oracle_calls == r.oracle_calls);
        CHECK(*rows[i].gap == *r.gap);
        CHECK(*rows[i].best_gap == *r.best_gap);
        if (std::isnan(r.gamma)) {
            CHECK_FALSE(rows[i].gamma.has_value());
        } else {
            CHECK(*rows[i].gamma == r.gamma);
        }
        CHECK_FALSE(rows[i].d.has_value());
    }

    CHECK_THROWS_AS(parse_trace_csv("a,b\n1,2\n"), CsvError);
    CHECK_THROWS_AS(parse_trace_csv(std::string(kTraceHeader) + "\n"), CsvError);
    CHECK_THROWS_AS(parse_trace_csv(std::string(kTraceHeader) + "\n0,1,2\n"), CsvError);
    CHECK_THROWS_AS(parse_trace_csv(std::string(kTraceHeader) + "\n0,x,,,,0\n"), CsvError);
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("plain") == "plain");
}

TEST_CASE("svg structure") {
    const std::string body = std::string(kTraceHeader) + "\n0,0.1,,1,1,0\n1,0.1,,0.5,0.5,1\n2,,,0.25,0.25,2\n";
    const auto rows = parse_trace_csv(body);
    const std::string one = render_svg({{"only", rows}});
    CHECK(count(one, "<polyline") == 1);
    CHECK(count(one, "class=\"legend-entry\"") == 1);
    const std::regex pts("points=\"([^\"]*)\"");
    std::smatch m;
    REQUIRE(std::regex_search(one, m, pts));
    std::istringstream ps(m[1].str());
    std::string pair;
    std::size_t n = 0;
    while (ps >> pair) {
        ++n;
    }
    CHECK(n == 3);

    const fs::path dir = temp_dir("plot");
    std::vector<std::string> files;
    for (int i = 0; i < 5; ++i) {
        const fs::path f = dir / ("run" + std::to_string(i) + ".csv");
        std::ofstream(f) << body;
        files.push_back(f.string());
    }
    plot_files(files, (dir / "out.svg").string());
    const std::string five = slurp(dir / "out.svg");
    CHECK(count(five, "<polyline") == 5);
    CHECK(count(five, "class=\"legend-entry\"") == 5);
    CHECK(five.rfind("<svg", 0) == 0);

    std::ofstream(dir / "empty.csv") << "";
    CHECK_THROWS_AS(plot_files({(dir / "empty.csv").string()}, (dir / "bad.svg").string()), CsvError);
    std::ofstream(dir / "header.csv") << kTraceHeader << "\n";
    CHECK_THROWS_AS(plot_files({(dir / "header.csv").string()}, (dir / "bad.svg").string()), CsvError);
    fs::remove_all(dir);
}

TEST_CASE("experiment is deterministic and well-formed") {
    ExperimentConfig cfg = parse_config(R"({
  "problem": {"name": "quadratic", "p": 4},
  "noise": {"kind": "additive", "sigma_f": 0.1, "sigma_g": 0.1},
  "optimizers": [
    {"name": "sgd", "gamma": 0.05},
    {"name": "dadapt-sgd"},
    {"name": "sgd-pls-dadapt", "label": "alg5"}
  ],
  "steps": 40,
  "seeds": [0, 1]
})");
    const fs::path a = temp_dir("exp_a");
    const fs::path b = temp_dir("exp_b");
    cfg.output = a.string();
    const ExperimentResult ra = run_experiment(cfg);
    cfg.output = b.string();
    run_experiment(cfg);
    CHECK(ra.runs.size() == 6);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        ++files;
        const fs::path other = b / e.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(e.path()) == slurp(other));
    }
    CHECK(files == 8);

    for (const std::string label : {"dadapt-sgd", "alg5"}) {
        for (const int seed : {0, 1}) {
            const auto rows = read_trace_csv((a / (label + "_seed" + std::to_string(seed) + ".csv")).string());
            CHECK(rows.size() == 41);
            for (std::size_t i = 1; i < rows.size(); ++i) {
                CHECK(*rows[i].d >= *rows[i - 1].d);
                CHECK(rows[i].oracle_calls > rows[i - 1].oracle_calls);
            }
        }
    }
    const std::string runs = slurp(a / "runs.csv");
    CHECK(runs.rfind("label,optimizer,seed,status,", 0) == 0);
    CHECK(count(runs, ",completed,") == 6);
    const std::string summary = slurp(a / "summary.csv");
    CHECK(count(summary, "\n") == 4);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("constant-step bound check") {
    const StochasticOracle o(make_abs_shift(make_point(std::vector<double>{10.0})), NoNoise{}, 0);
    const RunTrace t = sgd_run(o, Point::Zero(1), Schedule::constant(0.1), 2000);
    const auto rows = parse_trace_csv(trace_to_csv(t));
    CHECK(count_bound_violations(rows, 0.1, 10.0, 1.0) == 0);
    // A bound ten times too tight is violated.
    CHECK(count_bound_violations(rows, 0.1, 1.0, 0.1) > 0);
}

TEST_CASE("quantile and workers") {
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({5.0}, 0.9) == 5.0);
    CHECK(worker_count(1) == 1);
    std::vector<int> hits(100, 0);
    parallel_for(100, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::count(hits.begin(), hits.end(), 1) == 100);
    CHECK_THROWS(parallel_for(4, [](std::size_t i) {
        if (i == 2) {
            throw std::runtime_error("boom");
        }
    }));
}

TEST_CASE("format_result") {
    CriterionResult r{3, "title", true, "detail", 1.5};
    const std::string s = format_result(r);
    CHECK(s.rfind("PASS", 0) == 0);
    CHECK(s.find("title") != std::string::npos);
    r.passed = false;
    CHECK(format_result(r).rfind("FAIL", 0) == 0);
}
