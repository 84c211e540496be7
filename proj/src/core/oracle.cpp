#include "steplab/core/oracle.hpp"

#include <random>
#include <vector>

#include "steplab/core/rng.hpp"
#include "steplab/errors.hpp"

namespace steplab {

namespace {
constexpr std::uint64_t kTagOracle = 0x6f7261636c65ULL;
}

StochasticOracle::StochasticOracle(DeterministicProblem problem, NoiseModel noise, std::uint64_t seed)
    : problem_(std::move(problem)), noise_(noise), seed_(seed) {
    if (!problem_.objective) {
        throw InvalidArgument("StochasticOracle: problem has no objective");
    }
    if (const auto* g = std::get_if<AdditiveGaussian>(&noise_)) {
        if (!(g->sigma_f >= 0.0) || !(g->sigma_g >= 0.0)) {
            throw InvalidArgument("StochasticOracle: noise scales must be nonnegative");
        }
    }
    if (const auto* mb = std::get_if<MinibatchNoise>(&noise_)) {
        finite_sum_ = dynamic_cast<const FiniteSumObjective*>(problem_.objective.get());
        if (finite_sum_ == nullptr) {
            throw InvalidArgument("StochasticOracle: minibatch noise needs a finite-sum problem, got '" +
                                  problem_.name + "'");
        }
        if (mb->batch_size == 0) {
            throw InvalidArgument("StochasticOracle: batch size must be positive");
        }
    }
}

OracleSample StochasticOracle::eval(const Point& x, std::uint64_t j) const {
    if (x.size() != problem_.dim) {
        throw InvalidArgument("StochasticOracle::eval: dimension mismatch");
    }
    return std::visit(
        [&](const auto& model) -> OracleSample {
            using Model = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<Model, NoNoise>) {
                return {problem_.value(x), problem_.gradient(x)};
            } else if constexpr (std::is_same_v<Model, AdditiveGaussian>) {
                auto gen = make_stream(seed_, j, kTagOracle);
                std::normal_distribution<double> normal;
                OracleSample s{problem_.value(x), problem_.gradient(x)};
                s.value += model.sigma_f * normal(gen);
                for (Eigen::Index i = 0; i < s.gradient.size(); ++i) {
                    s.gradient[i] += model.sigma_g * normal(gen);
                }
                return s;
            } else {
                auto gen = make_stream(seed_, j, kTagOracle);
                std::uniform_int_distribution<std::size_t> pick(0, finite_sum_->num_samples() - 1);
                std::vector<std::size_t> idx(model.batch_size);
                for (auto& i : idx) {
                    i = pick(gen);
                }
                auto b = finite_sum_->batch(x, idx);
                return {b.value, std::move(b.gradient)};
            }
        },
        noise_);
}

}  // namespace steplab
