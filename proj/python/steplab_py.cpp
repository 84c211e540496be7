#include <cmath>
#include <limits>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "steplab/bench/acceptance.hpp"
#include "steplab/bench/config.hpp"
#include "steplab/bench/csv.hpp"
#include "steplab/bench/experiment.hpp"
#include "steplab/combined/combined.hpp"
#include "steplab/dadapt/dadapt.hpp"
#include "steplab/descent/descent.hpp"
#include "steplab/errors.hpp"
#include "steplab/gp1d/surrogate.hpp"
#include "steplab/linesearch/search.hpp"
#include "steplab/linesearch/wolfe.hpp"

namespace py = pybind11;
using namespace steplab;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

py::dict trace_dict(const RunTrace& t) {
    const auto n = static_cast<py::ssize_t>(t.records.size());
    py::array_t<std::int64_t> k(n), calls(n);
    py::array_t<double> gamma(n), d(n), gap(n), best(n);
    auto kk = k.mutable_unchecked<1>();
    auto cc = calls.mutable_unchecked<1>();
    auto gg = gamma.mutable_unchecked<1>();
    auto dd = d.mutable_unchecked<1>();
    auto ff = gap.mutable_unchecked<1>();
    auto bb = best.mutable_unchecked<1>();
    for (py::ssize_t i = 0; i < n; ++i) {
        const auto& r = t.records[static_cast<std::size_t>(i)];
        kk(i) = static_cast<std::int64_t>(r.k);
        cc(i) = static_cast<std::int64_t>(r.oracle_calls);
        gg(i) = r.gamma;
        dd(i) = r.d.value_or(kNaN);
        ff(i) = r.gap.value_or(kNaN);
        bb(i) = r.best_gap.value_or(kNaN);
    }
    py::dict out;
    out["k"] = k;
    out["gamma"] = gamma;
    out["d"] = d;
    out["f_gap"] = gap;
    out["best_f_gap"] = best;
    out["oracle_calls"] = calls;
    out["final_x"] = t.final_x;
    out["diverged"] = t.diverged();
    return out;
}

NoiseModel noise_model(const std::string& kind, double sigma_f, double sigma_g, std::size_t batch_size) {
    if (kind == "none") {
        return NoNoise{};
    }
    if (kind == "additive") {
        return AdditiveGaussian{sigma_f, sigma_g};
    }
    if (kind == "minibatch") {
        return MinibatchNoise{batch_size};
    }
    throw InvalidArgument("noise must be 'none', 'additive' or 'minibatch'");
}

WolfeParams wolfe(double c1, double c2, double c_w) {
    WolfeParams wp{c1, c2, c_w};
    wp.validate();
    return wp;
}

// Ray backed by a Python callable f(t, j) -> (value, slope).
FunctionRay py_ray(py::function fn) {
    return FunctionRay([fn = std::move(fn)](double t, std::uint64_t j) {
        const auto r = fn(t, j).cast<std::pair<double, double>>();
        return RaySample{r.first, r.second};
    });
}

py::dict outcome_dict(const LineSearchOutcome& o) {
    py::dict out;
    out["gamma"] = o.gamma;
    out["y"] = o.y;
    out["dy"] = o.dy;
    out["j"] = o.j;
    out["evaluations"] = o.evaluations;
    out["accepted_by"] = o.accepted_by == AcceptedBy::wolfe_pass ? "wolfe-pass" : "budget-min-y";
    out["var"] = o.var ? py::cast(*o.var) : py::none();
    out["dvar"] = o.dvar ? py::cast(*o.dvar) : py::none();
    out["steps"] = o.lists.steps;
    out["values"] = o.lists.values;
    out["slopes"] = o.lists.slopes;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Learning-rate-free optimization: D-Adaptation and probabilistic line searches";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<ZeroGradientStart>(m, "ZeroGradientStart", PyExc_RuntimeError);
    py::register_exception<bench::ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<DeterministicProblem>(m, "Problem")
        .def_readonly("name", &DeterministicProblem::name)
        .def_readonly("dim", &DeterministicProblem::dim)
        .def_readonly("minimizer", &DeterministicProblem::minimizer)
        .def_readonly("lipschitz", &DeterministicProblem::lipschitz)
        .def("value", &DeterministicProblem::value, py::arg("x"))
        .def("gradient", &DeterministicProblem::gradient, py::arg("x"))
        .def("gap", &DeterministicProblem::gap, py::arg("x"))
        .def("distance_from", &DeterministicProblem::distance_from, py::arg("x0"))
        .def("__repr__", [](const DeterministicProblem& p) {
            return "<Problem " + p.name + " dim=" + std::to_string(p.dim) + ">";
        });

    m.def("make_problem", &make_problem, py::arg("name"), py::arg("p"), py::arg("seed") = 0,
          "Seeded problem: quadratic, abs-shift, logsumexp or logistic-synthetic.");
    m.def("problem_names", [] {
        std::vector<std::string> out;
        for (const auto n : problem_names()) {
            out.emplace_back(n);
        }
        return out;
    });

    py::class_<StochasticOracle>(m, "Oracle")
        .def(py::init([](DeterministicProblem p, const std::string& noise, double sigma_f, double sigma_g,
                         std::size_t batch_size, std::uint64_t seed) {
                 return StochasticOracle(std::move(p), noise_model(noise, sigma_f, sigma_g, batch_size), seed);
             }),
             py::arg("problem"), py::arg("noise") = "none", py::arg("sigma_f") = 0.0, py::arg("sigma_g") = 0.0,
             py::arg("batch_size") = 1, py::arg("seed") = 0)
        .def("eval",
             [](const StochasticOracle& o, const Point& x, std::uint64_t j) {
                 auto s = o.eval(x, j);
                 return py::make_tuple(s.value, s.gradient);
             },
             py::arg("x"), py::arg("j"))
        .def_property_readonly("problem", &StochasticOracle::problem)
        .def_property_readonly("dim", &StochasticOracle::dim);

    m.def(
        "sgd",
        [](const StochasticOracle& o, const Point& x0, std::size_t steps, const std::string& schedule,
           std::optional<double> gamma, std::optional<double> distance, std::optional<double> lipschitz) {
            std::optional<Schedule> s;
            if (schedule == "constant") {
                if (!gamma) {
                    throw InvalidArgument("schedule 'constant' needs gamma");
                }
                s = Schedule::constant(*gamma);
            } else if (schedule == "optimal-rate") {
                s = Schedule::optimal_rate(distance.value_or(0.0), lipschitz.value_or(0.0));
            } else if (schedule == "adagrad-norm") {
                s = Schedule::adagrad_norm(distance.value_or(0.0));
            } else {
                throw InvalidArgument("unknown schedule '" + schedule + "'");
            }
            RunTrace t;
            {
                py::gil_scoped_release nogil;
                t = sgd_run(o, x0, *s, steps);
            }
            return trace_dict(t);
        },
        py::arg("oracle"), py::arg("x0"), py::arg("steps"), py::arg("schedule") = "constant",
        py::arg("gamma") = py::none(), py::arg("distance") = py::none(), py::arg("lipschitz") = py::none());

    m.def(
        "dadapt_sgd",
        [](const StochasticOracle& o, const Point& x0, std::size_t steps, double d0, double phi) {
            py::gil_scoped_release nogil;
            const RunTrace t = dadapt_sgd_run(o, x0, [phi](std::size_t) { return phi; }, d0, steps);
            py::gil_scoped_acquire gil;
            return trace_dict(t);
        },
        py::arg("oracle"), py::arg("x0"), py::arg("steps"), py::arg("d0") = kDefaultD0, py::arg("phi") = 1.0);

    m.def(
        "sgd_pls_dadapt",
        [](const StochasticOracle& o, const Point& x0, std::size_t steps, double d0, double phi, double c1, double c2,
           double c_w, const std::string& pls_mode, const std::string& d_limit_mode, std::size_t var_samples,
           bool fold_search_effort) {
            CombinedConfig cfg;
            cfg.d0 = d0;
            cfg.phi = [phi](std::size_t) { return phi; };
            cfg.wolfe = wolfe(c1, c2, c_w);
            if (pls_mode != "plain" && pls_mode != "d-informed") {
                throw InvalidArgument("pls_mode must be 'plain' or 'd-informed'");
            }
            cfg.pls_mode = pls_mode == "plain" ? PlsMode::plain : PlsMode::d_informed;
            if (d_limit_mode != "literal-floor" && d_limit_mode != "cap") {
                throw InvalidArgument("d_limit_mode must be 'literal-floor' or 'cap'");
            }
            cfg.d_limit_mode = d_limit_mode == "cap" ? DLimitMode::cap : DLimitMode::literal_floor;
            cfg.var_estimation_samples = var_samples;
            cfg.steps = steps;
            cfg.fold_search_effort = fold_search_effort;
            CombinedRun run;
            {
                py::gil_scoped_release nogil;
                run = sgd_pls_dadapt_run(o, x0, cfg);
            }
            py::dict out = trace_dict(run.trace);
            py::list evals;
            for (const auto& s : run.searches) {
                evals.append(s.evaluations);
            }
            out["search_evaluations"] = evals;
            out["initial_var"] = py::make_tuple(run.initial_noise.var, run.initial_noise.dvar);
            return out;
        },
        py::arg("oracle"), py::arg("x0"), py::arg("steps"), py::arg("d0") = kDefaultD0, py::arg("phi") = 1.0,
        py::arg("c1") = 0.05, py::arg("c2") = 0.5, py::arg("c_w") = 0.3, py::arg("pls_mode") = "plain",
        py::arg("d_limit_mode") = "literal-floor", py::arg("var_samples") = 10, py::arg("fold_search_effort") = false);

    m.def("bool_wolfe",
          [](double y0, double dy0, double y, double dy, double gamma, double c1, double c2) {
              return bool_wolfe(y0, dy0, y, dy, gamma, wolfe(c1, c2, 0.3));
          },
          py::arg("y0"), py::arg("dy0"), py::arg("y"), py::arg("dy"), py::arg("gamma"), py::arg("c1") = 0.05,
          py::arg("c2") = 0.5);
    m.def("bvn_quadrant", &bvn_quadrant, py::arg("m_a"), py::arg("m_b"), py::arg("c_aa"), py::arg("c_bb"),
          py::arg("c_ab"), "P(a > 0 and b > 0) for a bivariate normal.");
    m.def("expected_improvement", &expected_improvement_value, py::arg("eta"), py::arg("mu"), py::arg("var"));

    py::class_<GPSurrogate>(m, "GPSurrogate")
        .def_static("init", &GPSurrogate::init, py::arg("y0"), py::arg("dy0"), py::arg("var0") = 0.0,
                    py::arg("dvar0") = 0.0, py::arg("t_ref") = 1.0)
        .def("update",
             [](const GPSurrogate& gp, double t, double y, double dy, double var, double dvar) {
                 return gp.update({t, y, dy, var, dvar});
             },
             py::arg("t"), py::arg("y"), py::arg("dy"), py::arg("var") = 0.0, py::arg("dvar") = 0.0)
        .def("moments",
             [](const GPSurrogate& gp, double t) {
                 const GPMoments g = gp.raw_moments(t);
                 return py::make_tuple(g.mean, g.dmean, g.var, g.dvar);
             },
             py::arg("t"), "(mean, slope mean, var, slope var) at raw step t.")
        .def("prob_wolfe",
             [](const GPSurrogate& gp, double t, double c1, double c2) {
                 return prob_wolfe(gp, t, wolfe(c1, c2, 0.3));
             },
             py::arg("t"), py::arg("c1") = 0.05, py::arg("c2") = 0.5)
        .def("segment_minimum", &GPSurrogate::segment_minimum, py::arg("lo"), py::arg("hi"))
        .def("__len__", &GPSurrogate::size);

    m.def("inexact_line_search",
          [](py::function f, double y0, double dy0, double gamma_prev, double c1, double c2, std::uint64_t j) {
              const FunctionRay ray = py_ray(std::move(f));
              return outcome_dict(inexact_line_search(ray, y0, dy0, gamma_prev, wolfe(c1, c2, 0.3), j));
          },
          py::arg("f"), py::arg("y0"), py::arg("dy0"), py::arg("gamma_prev"), py::arg("c1") = 0.05,
          py::arg("c2") = 0.5, py::arg("j") = 0, "f(t, j) -> (value, slope).");
    m.def("pls",
          [](py::function f, double y0, double dy0, double gamma_prev, double var0, double dvar0, double c1,
             double c2, double c_w, std::uint64_t j) {
              const FunctionRay ray = py_ray(std::move(f));
              return outcome_dict(pls(ray, y0, dy0, gamma_prev, var0, dvar0, wolfe(c1, c2, c_w), j));
          },
          py::arg("f"), py::arg("y0"), py::arg("dy0"), py::arg("gamma_prev"), py::arg("var0") = 0.0,
          py::arg("dvar0") = 0.0, py::arg("c1") = 0.05, py::arg("c2") = 0.5, py::arg("c_w") = 0.3, py::arg("j") = 0);

    m.def(
        "run_experiment",
        [](const std::string& config_json, std::optional<std::string> out) {
            bench::ExperimentConfig cfg = bench::parse_config(config_json);
            if (out) {
                cfg.output = *out;
            }
            bench::ExperimentResult res;
            {
                py::gil_scoped_release nogil;
                res = bench::run_experiment(cfg);
            }
            py::list runs;
            for (const auto& r : res.runs) {
                py::dict d;
                d["label"] = r.label;
                d["optimizer"] = r.optimizer;
                d["seed"] = r.seed;
                d["status"] = r.status;
                d["file"] = r.file;
                runs.append(d);
            }
            return runs;
        },
        py::arg("config_json"), py::arg("out") = py::none(),
        "Runs a JSON experiment config and writes CSVs; returns one dict per run.");

    m.def(
        "verify",
        [](std::vector<int> ids, bool quick) {
            bench::AcceptanceOptions opts;
            opts.quick = quick;
            py::list out;
            for (const int id : ids) {
                bench::CriterionResult r;
                {
                    py::gil_scoped_release nogil;
                    r = bench::run_criterion(id, opts);
                }
                out.append(py::make_tuple(r.id, r.title, r.passed, r.detail));
            }
            return out;
        },
        py::arg("ids"), py::arg("quick") = true);
}
