// steplab: run, plot and verify learning-rate-free optimizer experiments.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steplab/bench/acceptance.hpp"
#include "steplab/bench/config.hpp"
#include "steplab/bench/csv.hpp"
#include "steplab/bench/experiment.hpp"
#include "steplab/bench/plot.hpp"
#include "steplab/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

using namespace steplab;
using namespace steplab::bench;

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        if (item.empty() || item[0] == '-') {
            throw ConfigError("--seeds: '" + item + "' is not a nonnegative integer");
        }
        try {
            out.push_back(std::stoull(item, &pos));
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size()) {
            throw ConfigError("--seeds: '" + item + "' is not a nonnegative integer");
        }
    }
    if (out.empty()) {
        throw ConfigError("--seeds: empty list");
    }
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, const std::string& seeds) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        // Flags take precedence over the file.
        if (!out_dir.empty()) {
            cfg.output = out_dir;
        }
        if (!seeds.empty()) {
            cfg.seeds = parse_seed_list(seeds);
        }
    } catch (const ConfigError& e) {
        std::cerr << "steplab: " << config_path << ": " << e.what() << '\n';
        return kExitUsage;
    }
    const ExperimentResult res = run_experiment(cfg);
    std::size_t diverged = 0;
    std::size_t errors = 0;
    for (const auto& r : res.runs) {
        diverged += r.status == "diverged" ? 1 : 0;
        errors += r.status == "error" ? 1 : 0;
    }
    std::cout << "wrote " << res.runs.size() << " runs to " << res.out_dir.string() << " (" << diverged
              << " diverged, " << errors << " errors)\n";
    return kExitOk;
}

int cmd_plot(const std::vector<std::string>& csvs, const std::string& out) {
    try {
        plot_files(csvs, out);
    } catch (const CsvError& e) {
        std::cerr << "steplab plot: " << e.what() << '\n';
        return kExitUsage;
    }
    std::cout << "wrote " << out << '\n';
    return kExitOk;
}

int cmd_verify(bool quick, const std::vector<int>& only) {
    AcceptanceOptions opts;
    opts.quick = quick;
    bool ok = true;
    const auto report = [&](const CriterionResult& r) {
        std::cout << format_result(r) << std::endl;
        ok = ok && r.passed;
    };
    if (only.empty()) {
        run_acceptance(opts, report);
    } else {
        for (const int id : only) {
            report(run_criterion(id, opts));
        }
    }
    std::cout << (ok ? "all criteria passed" : "acceptance FAILED") << '\n';
    return ok ? kExitOk : kExitFailure;
}

int cmd_trace(const std::string& optimizer, const std::string& problem, int p, std::size_t steps,
              std::uint64_t seed, double sigma, std::optional<double> gamma) {
    ExperimentConfig cfg;
    cfg.problem.name = problem;
    cfg.problem.p = p;
    cfg.steps = steps;
    cfg.seeds = {seed};
    if (sigma > 0.0) {
        cfg.noise.kind = NoiseSpec::Kind::additive;
        cfg.noise.sigma_f = sigma;
        cfg.noise.sigma_g = sigma;
    }
    OptimizerSpec spec;
    spec.name = optimizer;
    spec.label = optimizer;
    spec.gamma = gamma;
    if (optimizer == "sgd" && !gamma) {
        std::cerr << "steplab trace: optimizer 'sgd' needs --gamma\n";
        return kExitUsage;
    }
    const auto& names = optimizer_names();
    if (std::find(names.begin(), names.end(), optimizer) == names.end()) {
        std::cerr << "steplab trace: unknown optimizer '" << optimizer << "'\n";
        return kExitUsage;
    }
    cfg.optimizers = {spec};
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "steplab trace: " << e.what() << '\n';
        return kExitUsage;
    }
    const StochasticOracle oracle(build_problem(cfg, seed), cfg.noise.model(), seed);
    std::cout << trace_to_csv(run_optimizer(spec, oracle, initial_point(cfg), steps));
    return kExitOk;
}

int cmd_bound_check(const std::string& csv, double gamma, double distance, double lipschitz) {
    std::vector<TraceRow> rows;
    try {
        rows = read_trace_csv(csv);
    } catch (const CsvError& e) {
        std::cerr << "steplab bound-check: " << e.what() << '\n';
        return kExitUsage;
    }
    const std::size_t v = count_bound_violations(rows, gamma, distance, lipschitz);
    std::cout << "violations: " << v << '\n';
    return v == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steplab: learning-rate-free optimization experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string seeds;
    auto* run = app.add_subcommand("run", "Run an experiment matrix from a JSON config");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides the config)");
    run->add_option("--seeds", seeds, "Comma-separated seeds (overrides the config)");

    std::vector<std::string> csvs;
    std::string svg_out;
    auto* plot = app.add_subcommand("plot", "Plot best f gap against oracle calls as SVG");
    plot->add_option("csv", csvs, "Trace CSV files")->required();
    plot->add_option("--out", svg_out, "Output SVG path")->required();

    bool quick = false;
    std::vector<int> only;
    auto* verify = app.add_subcommand("verify", "Run the acceptance criteria");
    verify->add_flag("--quick", quick, "Smaller Monte Carlo and seed counts");
    verify->add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, kCriterionCount));

    std::string optimizer;
    std::string problem;
    int p = 5;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    double sigma = 0.0;
    std::optional<double> gamma;
    auto* trace = app.add_subcommand("trace", "Run one optimizer and print its trace CSV");
    trace->add_option("--optimizer", optimizer, "Optimizer name")->required();
    trace->add_option("--problem", problem, "Problem name")->required();
    trace->add_option("--steps", steps, "Iterations")->required()->check(CLI::PositiveNumber);
    trace->add_option("--seed", seed, "Run seed")->required();
    trace->add_option("--p", p, "Problem dimension")->check(CLI::PositiveNumber);
    trace->add_option("--sigma", sigma, "Additive noise scale for values and gradients")->check(CLI::NonNegativeNumber);
    trace->add_option("--gamma", gamma, "Step size for optimizer 'sgd'")->check(CLI::PositiveNumber);

    std::string bound_csv;
    double bc_gamma = 0.0;
    double bc_distance = 0.0;
    double bc_lipschitz = 0.0;
    auto* bound = app.add_subcommand("bound-check", "Count constant-step bound violations in a trace CSV");
    bound->add_option("csv", bound_csv, "Trace CSV")->required();
    bound->add_option("--gamma", bc_gamma, "Constant step size")->required()->check(CLI::PositiveNumber);
    bound->add_option("--distance", bc_distance, "D = ||x0 - x*||")->required()->check(CLI::PositiveNumber);
    bound->add_option("--lipschitz", bc_lipschitz, "G")->required()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*run) {
            return cmd_run(config_path, out_dir, seeds);
        }
        if (*plot) {
            return cmd_plot(csvs, svg_out);
        }
        if (*verify) {
            return cmd_verify(quick, only);
        }
        if (*trace) {
            return cmd_trace(optimizer, problem, p, steps, seed, sigma, gamma);
        }
        if (*bound) {
            return cmd_bound_check(bound_csv, bc_gamma, bc_distance, bc_lipschitz);
        }
    } catch (const ConfigError& e) {
        std::cerr << "steplab: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "steplab: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "steplab: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
