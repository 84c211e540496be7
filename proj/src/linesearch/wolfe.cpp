#include "steplab/linesearch/wolfe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "steplab/errors.hpp"

namespace steplab {

namespace {

constexpr double kDegenerateVariance = 1e-12;
constexpr double kCorrelationSlack = 1e-9;

// Gauss-Legendre half-rules (nodes in (0, 1], mirrored) of order 6, 12, 20.
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 3> kX6 = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
constexpr std::array<double, 6> kW12 = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                        0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
constexpr std::array<double, 6> kX12 = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                        0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
constexpr std::array<double, 10> kW20 = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                         0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                         0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                         0.1527533871307259};
constexpr std::array<double, 10> kX20 = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                         0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                         0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                         0.07652652113349733};

struct Rule {
    std::span<const double> w;
    std::span<const double> x;
};

Rule rule_for(double abs_rho) {
    if (abs_rho < 0.3) {
        return {kW6, kX6};
    }
    if (abs_rho < 0.75) {
        return {kW12, kX12};
    }
    return {kW20, kX20};
}

double sign_indicator(double m) { return m > 0.0 ? 1.0 : (m < 0.0 ? 0.0 : 0.5); }

}  // namespace

void WolfeParams::validate() const {
    if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) {
        throw InvalidArgument("WolfeParams: need 0 < c1 < c2 < 1");
    }
    if (!(c_w >= 0.0 && c_w < 1.0)) {
        throw InvalidArgument("WolfeParams: need 0 <= c_w < 1");
    }
}

bool bool_wolfe(double y0, double dy0, double y, double dy, double gamma, const WolfeParams& wp) {
    const bool armijo = y <= y0 + wp.c1 * gamma * dy0;
    const bool curvature = dy >= wp.c2 * dy0;
    return armijo && curvature;
}

WolfeProjection ab_projection(const Eigen::Vector4d& mean, const Eigen::Matrix4d& cov, double gamma,
                              const WolfeParams& wp) {
    Eigen::Matrix<double, 2, 4> proj;
    proj << 1.0, wp.c1 * gamma, -1.0, 0.0,  //
        0.0, -wp.c2, 0.0, 1.0;
    const Eigen::Vector2d m = proj * mean;
    const Eigen::Matrix2d c = proj * cov * proj.transpose();
    return {m[0], m[1], c(0, 0), c(1, 1), 0.5 * (c(0, 1) + c(1, 0))};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double bvn_upper(double h, double k, double rho) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (std::isinf(h) || std::isinf(k)) {
        if (h == std::numeric_limits<double>::infinity() || k == std::numeric_limits<double>::infinity()) {
            return 0.0;
        }
        if (h == -std::numeric_limits<double>::infinity()) {
            return k == -std::numeric_limits<double>::infinity() ? 1.0 : normal_cdf(-k);
        }
        return normal_cdf(-h);
    }
    const Rule rule = rule_for(std::abs(rho));
    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(rho) < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = 0.5 * std::asin(rho);
        for (std::size_t i = 0; i < rule.w.size(); ++i) {
            for (const double sgn : {-1.0, 1.0}) {
                const double sn = std::sin(asr * (1.0 + sgn * rule.x[i]));
                bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        bvn = bvn * asr / two_pi + normal_cdf(-h) * normal_cdf(-k);
    } else {
        if (rho < 0.0) {
            k = -k;
            hk = -hk;
        }
        if (std::abs(rho) < 1.0) {
            const double as = (1.0 - rho) * (1.0 + rho);
            double a = std::sqrt(as);
            const double bs = (h - k) * (h - k);
            const double c = (4.0 - hk) / 8.0;
            const double d = (12.0 - hk) / 80.0;
            double asr = -0.5 * (bs / as + hk);
            if (asr > -100.0) {
                bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
            }
            if (hk > -100.0) {
                const double b = std::sqrt(bs);
                const double sp = std::sqrt(two_pi) * normal_cdf(-b / a);
                bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a *= 0.5;
            double sum = 0.0;
            for (std::size_t i = 0; i < rule.w.size(); ++i) {
                for (const double sgn : {-1.0, 1.0}) {
                    const double ax = a * (1.0 + sgn * rule.x[i]);
                    const double xs = ax * ax;
                    asr = -0.5 * (bs / xs + hk);
                    if (asr > -100.0) {
                        const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                        const double rs = std::sqrt(1.0 - xs);
                        const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                        sum += rule.w[i] * std::exp(asr) * (sp - ep);
                    }
                }
            }
            bvn = (a * sum - bvn) / two_pi;
        }
        if (rho > 0.0) {
            bvn += normal_cdf(-std::max(h, k));
        } else if (h >= k) {
            bvn = -bvn;
        } else {
            const double l = h < 0.0 ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
            bvn = l - bvn;
        }
    }
    return std::clamp(bvn, 0.0, 1.0);
}

double bvn_quadrant(double m_a, double m_b, double c_aa, double c_bb, double c_ab) {
    if (!std::isfinite(m_a) || !std::isfinite(m_b) || std::isnan(c_aa) || std::isnan(c_bb) ||
        std::isnan(c_ab)) {
        throw NumericError("bvn_quadrant: non-finite moments");
    }
    if (c_aa < -kCorrelationSlack || c_bb < -kCorrelationSlack) {
        throw InvalidArgument("bvn_quadrant: negative variance");
    }
    const bool flat_a = c_aa < kDegenerateVariance;
    const bool flat_b = c_bb < kDegenerateVariance;
    if (flat_a && flat_b) {
        return sign_indicator(m_a) * sign_indicator(m_b);
    }
    if (flat_a) {
        return sign_indicator(m_a) * normal_cdf(m_b / std::sqrt(c_bb));
    }
    if (flat_b) {
        return sign_indicator(m_b) * normal_cdf(m_a / std::sqrt(c_aa));
    }
    const double sa = std::sqrt(c_aa);
    const double sb = std::sqrt(c_bb);
    double rho = c_ab / (sa * sb);
    if (std::abs(rho) > 1.0 + kCorrelationSlack) {
        throw InvalidCorrelation("bvn_quadrant: |rho| exceeds 1");
    }
    rho = std::clamp(rho, -1.0, 1.0);
    return bvn_upper(-m_a / sa, -m_b / sb, rho);
}

double prob_wolfe(const GPSurrogate& gp, double gamma, const WolfeParams& wp) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("prob_wolfe: gamma must be positive");
    }
    const double t = gp.normalization().t_in(gamma);
    const WolfeProjection p = ab_projection(gp.joint_mean(0.0, t), gp.joint_cov(0.0, t), t, wp);
    // The posterior covariance is PSD in exact arithmetic; clip the rounding
    // that can push |rho| a hair past 1 when both variances sit near the floor.
    const double limit = std::sqrt(std::max(p.c_aa, 0.0) * std::max(p.c_bb, 0.0));
    const double c_ab = std::clamp(p.c_ab, -limit, limit);
    return bvn_quadrant(p.m_a, p.m_b, std::max(p.c_aa, 0.0), std::max(p.c_bb, 0.0), c_ab);
}

}  // namespace steplab
