#include "steplab/bench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "steplab/bench/csv.hpp"
#include "steplab/combined/combined.hpp"
#include "steplab/dadapt/dadapt.hpp"
#include "steplab/descent/descent.hpp"
#include "steplab/errors.hpp"

namespace steplab::bench {

namespace {

ScaleSchedule constant_phi(double phi) {
    if (phi == 1.0) {
        return {};
    }
    return [phi](std::size_t) { return phi; };
}

WolfeParams wolfe_of(const OptimizerSpec& spec) { return {spec.c1, spec.c2, spec.c_w}; }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << text;
}

std::optional<double> last_gap(const RunTrace& t) {
    return t.records.empty() ? std::nullopt : t.records.back().gap;
}

std::optional<double> last_best_gap(const RunTrace& t) {
    return t.records.empty() ? std::nullopt : t.records.back().best_gap;
}

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

}  // namespace

std::size_t worker_count(std::size_t tasks) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("STEPLAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            n = static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, std::min(n, tasks));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) {
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard lock(error_mu);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    const std::size_t workers = worker_count(n);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

DeterministicProblem build_problem(const ExperimentConfig& cfg, std::uint64_t seed) {
    return make_problem(cfg.problem.name, cfg.problem.p, cfg.problem.seed.value_or(seed));
}

Point initial_point(const ExperimentConfig& cfg) {
    if (cfg.x0) {
        return make_point(*cfg.x0);
    }
    return Point::Zero(cfg.problem.p);
}

RunTrace run_optimizer(const OptimizerSpec& spec, const StochasticOracle& oracle, const Point& x0,
                       std::size_t steps) {
    const DeterministicProblem& prob = oracle.problem();
    if (spec.name == "sgd") {
        return sgd_run(oracle, x0, Schedule::constant(spec.gamma.value()), steps);
    }
    if (spec.name == "sgd-optimal-rate" || spec.name == "adagrad-norm") {
        const auto dist = spec.distance ? spec.distance : prob.distance_from(x0);
        if (!dist) {
            throw InvalidArgument(spec.label + ": distance unknown for this problem");
        }
        if (spec.name == "adagrad-norm") {
            return sgd_run(oracle, x0, Schedule::adagrad_norm(*dist), steps);
        }
        const auto g = spec.lipschitz ? spec.lipschitz : prob.lipschitz;
        if (!g) {
            throw InvalidArgument(spec.label + ": Lipschitz constant unknown for this problem");
        }
        return sgd_run(oracle, x0, Schedule::optimal_rate(*dist, *g), steps);
    }
    if (spec.name == "dadapt-sgd") {
        return dadapt_sgd_run(oracle, x0, constant_phi(spec.phi), spec.d0, steps);
    }
    if (spec.name == "sgd-pls") {
        SgdPlsConfig c;
        c.gamma0 = spec.gamma0;
        c.wolfe = wolfe_of(spec);
        c.var_estimation_samples = spec.var_samples;
        c.steps = steps;
        return sgd_pls_run(oracle, x0, c).trace;
    }
    if (spec.name == "sgd-pls-dadapt") {
        CombinedConfig c;
        c.d0 = spec.d0;
        c.phi = constant_phi(spec.phi);
        c.wolfe = wolfe_of(spec);
        c.pls_mode = spec.pls_mode == "d-informed" ? PlsMode::d_informed : PlsMode::plain;
        c.d_limit_mode = spec.d_limit_mode == "cap" ? DLimitMode::cap : DLimitMode::literal_floor;
        c.var_estimation_samples = spec.var_samples;
        c.fold_search_effort = spec.fold_search_effort;
        c.steps = steps;
        return sgd_pls_dadapt_run(oracle, x0, c).trace;
    }
    throw InvalidArgument("unknown optimizer '" + spec.name + "'");
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) {
        throw InvalidArgument("quantile: empty sample");
    }
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    ExperimentResult res;
    res.out_dir = cfg.output;
    std::filesystem::create_directories(res.out_dir);

    const Point x0 = initial_point(cfg);
    for (const auto& opt : cfg.optimizers) {
        for (const auto seed : cfg.seeds) {
            RunResult r;
            r.label = opt.label;
            r.optimizer = opt.name;
            r.seed = seed;
            r.file = opt.label + "_seed" + std::to_string(seed) + ".csv";
            res.runs.push_back(std::move(r));
        }
    }

    parallel_for(res.runs.size(), [&](std::size_t i) {
        RunResult& r = res.runs[i];
        const std::size_t opt_index = i / cfg.seeds.size();
        try {
            const StochasticOracle oracle(build_problem(cfg, r.seed), cfg.noise.model(), r.seed);
            r.trace = run_optimizer(cfg.optimizers[opt_index], oracle, x0, cfg.steps);
            r.status = r.trace.diverged() ? "diverged" : "completed";
        } catch (const std::exception& e) {
            r.status = "error";
            r.detail = e.what();
        }
    });

    // Single-threaded writes keep the output independent of scheduling.
    std::string runs_csv = "label,optimizer,seed,status,iterations,final_f_gap,final_best_f_gap,oracle_calls,file,detail\n";
    for (const auto& r : res.runs) {
        write_file(res.out_dir / r.file, trace_to_csv(r.trace));
        const std::size_t iters = r.trace.records.empty() ? 0 : r.trace.records.back().k;
        const std::uint64_t calls = r.trace.records.empty() ? 0 : r.trace.records.back().oracle_calls;
        runs_csv += csv_field(r.label) + ',' + r.optimizer + ',' + std::to_string(r.seed) + ',' + r.status + ',' +
                    std::to_string(iters) + ',' + opt_real(last_gap(r.trace)) + ',' +
                    opt_real(last_best_gap(r.trace)) + ',' + std::to_string(calls) + ',' + csv_field(r.file) + ',' +
                    csv_field(r.detail) + '\n';
    }
    write_file(res.out_dir / "runs.csv", runs_csv);

    std::string summary =
        "label,optimizer,runs,diverged,errors,median_initial_f_gap,median_final_f_gap,q1_final_best_f_gap,"
        "median_final_best_f_gap,q3_final_best_f_gap\n";
    for (const auto& opt : cfg.optimizers) {
        std::vector<double> initial;
        std::vector<double> final_gap;
        std::vector<double> best;
        std::size_t runs = 0;
        std::size_t diverged = 0;
        std::size_t errors = 0;
        for (const auto& r : res.runs) {
            if (r.label != opt.label) {
                continue;
            }
            ++runs;
            diverged += r.status == "diverged" ? 1 : 0;
            errors += r.status == "error" ? 1 : 0;
            if (!r.trace.records.empty() && r.trace.records.front().gap) {
                initial.push_back(*r.trace.records.front().gap);
            }
            if (const auto g = last_gap(r.trace); g && r.status == "completed") {
                final_gap.push_back(*g);
            }
            if (const auto b = last_best_gap(r.trace)) {
                best.push_back(*b);
            }
        }
        const auto q = [](const std::vector<double>& v, double p) {
            return v.empty() ? std::string() : format_real(quantile(v, p));
        };
        summary += csv_field(opt.label) + ',' + opt.name + ',' + std::to_string(runs) + ',' +
                   std::to_string(diverged) + ',' + std::to_string(errors) + ',' + q(initial, 0.5) + ',' +
                   q(final_gap, 0.5) + ',' + q(best, 0.25) + ',' + q(best, 0.5) + ',' + q(best, 0.75) + '\n';
    }
    write_file(res.out_dir / "summary.csv", summary);
    return res;
}

}  // namespace steplab::bench
