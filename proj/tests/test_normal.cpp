#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dlcast/normal.hpp"
#include "reference.hpp"

using namespace dlcast;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("nll matches the closed form") {
    // 0.5*ln(2*pi) at the mode of a standard normal.
    CHECK(nll({0.0, 0.0}, 0.0) == doctest::Approx(0.9189385332046727).epsilon(1e-15));
    CHECK(nll({0.0, 0.0}, 1.0) == doctest::Approx(0.9189385332046727 + 0.5).epsilon(1e-15));

    const double mu = 1.7, ls = -0.3, y = 0.4;
    const double sigma = std::exp(ls);
    const double z = (y - mu) / sigma;
    const double direct = 0.5 * std::log(2.0 * kPi) + ls + 0.5 * z * z;
    CHECK(nll({mu, ls}, y) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("nll clamps log-sigma to the working range") {
    CHECK(nll({0.0, 20.0}, 1.0) == nll({0.0, kLogSigmaMax}, 1.0));
    CHECK(nll({0.0, -20.0}, 1.0) == nll({0.0, kLogSigmaMin}, 1.0));
    CHECK(std::isfinite(nll({0.0, -1000.0}, 5.0))); // clamp keeps sigma strictly positive
}

TEST_CASE("clamp_params bounds log-sigma only") {
    const NormalParams p = clamp_params({3.0, 40.0});
    CHECK(p.mu == 3.0);
    CHECK(p.log_sigma == kLogSigmaMax);
    CHECK(clamp_params({-1.0, -40.0}).log_sigma == kLogSigmaMin);
    CHECK(clamp_params({-1.0, 0.25}).log_sigma == 0.25);
}

TEST_CASE("crps closed form agrees with quadrature") {
    const double mus[] = {-1.0, 0.0, 2.5};
    const double sigmas[] = {0.1, 1.0, 3.0};
    for (double mu : mus) {
        for (double sigma : sigmas) {
            const double ls = std::log(sigma);
            const double ys[] = {mu - 3.0 * sigma, mu, mu + 0.7 * sigma, mu + 4.0 * sigma};
            for (double y : ys) {
                const double closed = crps_normal({mu, ls}, y);
                const double quad = reference::crps_quadrature({mu, ls}, y);
                CHECK(std::abs(closed - quad) <= 1e-6);
            }
        }
    }
}

TEST_CASE("crps at the center equals sigma*(sqrt(2)-1)/sqrt(pi)") {
    const double k = (std::sqrt(2.0) - 1.0) / std::sqrt(kPi);
    CHECK(crps_normal({0.0, 0.0}, 0.0) == doctest::Approx(k).epsilon(1e-14));
    CHECK(crps_normal({5.0, std::log(3.0)}, 5.0) == doctest::Approx(3.0 * k).epsilon(1e-14));
}

TEST_CASE("crps of a point forecast is the absolute error") {
    CHECK(crps_point(2.0, 3.5) == 1.5);
    CHECK(crps_point(-1.0, -4.0) == 3.0);
    CHECK(crps_point(0.7, 0.7) == 0.0);
}

TEST_CASE("normal_cdf basics") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
    for (double z : {0.3, 1.0, 2.7, 5.0}) {
        CHECK(normal_cdf(-z) == doctest::Approx(1.0 - normal_cdf(z)).epsilon(1e-14));
    }
    CHECK(normal_cdf(-40.0) == doctest::Approx(0.0));
    CHECK(normal_cdf(40.0) == doctest::Approx(1.0));
}

TEST_CASE("normal_quantile inverts the cdf") {
    CHECK(normal_quantile(0.5) == 0.0);
    for (int k = 1; k <= 999; ++k) {
        const double p = static_cast<double>(k) / 1000.0;
        const double q = normal_quantile(p);
        CHECK(std::abs(normal_cdf(q) - p) <= 1e-9);
        const double ref = reference::quantile_bisect(p);
        CHECK(std::abs(q - ref) <= 1e-8 * (1.0 + std::abs(ref)));
    }
    // The bisection oracle loses absolute precision in the upper tail where
    // erfc saturates near 2, so probe p and 1-p against the well-conditioned
    // lower-tail root and its reflection.
    for (double eps : {1e-10, 1e-6}) {
        const double ref = reference::quantile_bisect(eps);
        CHECK(std::abs(normal_quantile(eps) - ref) <= 1e-8 * (1.0 + std::abs(ref)));
        CHECK(std::abs(normal_quantile(1.0 - eps) + ref) <= 1e-8 * (1.0 + std::abs(ref)));
    }
}

TEST_CASE("normal_quantile rejects arguments outside (0,1)") {
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(-0.2), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.7), std::domain_error);
}

TEST_CASE("natural gradient closed form") {
    const double mu = 0.8, ls = -0.4, y = 2.1;
    const double z = (y - mu) / std::exp(ls);
    const NormalGradient g = natural_gradient({mu, ls}, y);
    CHECK(g.d_mu == doctest::Approx(mu - y).epsilon(1e-15));
    CHECK(g.d_log_sigma == doctest::Approx(0.5 * (1.0 - z * z)).epsilon(1e-14));
}

TEST_CASE("natural gradient agrees with finite differences") {
    const double mus[] = {-2.0, 0.0, 1.5};
    const double lss[] = {-1.0, 0.0, 2.0};
    for (double mu : mus) {
        for (double ls : lss) {
            const double sigma = std::exp(ls);
            for (double y : {mu - 2.0 * sigma, mu - 0.3 * sigma, mu + 1.1 * sigma}) {
                const NormalGradient g = natural_gradient({mu, ls}, y);
                const auto fd = reference::natural_gradient_fd({mu, ls}, y);
                const double scale_mu = std::max(1.0, std::abs(fd[0]));
                const double scale_ls = std::max(1.0, std::abs(fd[1]));
                CHECK(std::abs(g.d_mu - fd[0]) / scale_mu <= 1e-4);
                CHECK(std::abs(g.d_log_sigma - fd[1]) / scale_ls <= 1e-4);
            }
        }
    }
}
