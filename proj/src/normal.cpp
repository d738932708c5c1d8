#include "dlcast/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dlcast {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178; // 0.5 * ln(2*pi)
constexpr double kInvSqrt2Pi = 0.39894228040143267794; // 1/sqrt(2*pi)
constexpr double kInvSqrtPi = 0.56418958354775628695;  // 1/sqrt(pi)

} // namespace

double NormalParams::sigma() const {
    return std::exp(log_sigma);
}

NormalParams clamp_params(NormalParams p) {
    p.log_sigma = std::clamp(p.log_sigma, kLogSigmaMin, kLogSigmaMax);
    return p;
}

double nll(const NormalParams& p, double y) {
    const NormalParams c = clamp_params(p);
    const double inv_sigma = std::exp(-c.log_sigma);
    const double z = (y - c.mu) * inv_sigma;
    return kHalfLog2Pi + c.log_sigma + 0.5 * z * z;
}

double crps_normal(const NormalParams& p, double y) {
    const NormalParams c = clamp_params(p);
    const double sigma = std::exp(c.log_sigma);
    const double z = (y - c.mu) / sigma;
    return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

double crps_point(double pred, double y) {
    return std::abs(y - pred);
}

double normal_pdf(double z) {
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_quantile(double p) {
    // Wichura's algorithm AS241 (PPND16).
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie strictly in (0,1)");
    }

    static const double a0 = 3.3871328727963666080e0;
    static const double a1 = 1.3314166789178437745e+2;
    static const double a2 = 1.9715909503065514427e+3;
    static const double a3 = 1.3731693765509461125e+4;
    static const double a4 = 4.5921953931549871457e+4;
    static const double a5 = 6.7265770927008700853e+4;
    static const double a6 = 3.3430575583588128105e+4;
    static const double a7 = 2.5090809287301226727e+3;
    static const double b1 = 4.2313330701600911252e+1;
    static const double b2 = 6.8718700749205790830e+2;
    static const double b3 = 5.3941960214247511077e+3;
    static const double b4 = 2.1213794301586595867e+4;
    static const double b5 = 3.9307895800092710610e+4;
    static const double b6 = 2.8729085735721942674e+4;
    static const double b7 = 5.2264952788528545610e+3;
    static const double c0 = 1.42343711074968357734e0;
    static const double c1 = 4.63033784615654529590e0;
    static const double c2 = 5.76949722146069140550e0;
    static const double c3 = 3.64784832476320460504e0;
    static const double c4 = 1.27045825245236838258e0;
    static const double c5 = 2.41780725177450611770e-1;
    static const double c6 = 2.27238449892691845833e-2;
    static const double c7 = 7.74545014278341407640e-4;
    static const double d1 = 2.05319162663775882187e0;
    static const double d2 = 1.67638483018380384940e0;
    static const double d3 = 6.89767334985100004550e-1;
    static const double d4 = 1.48103976427480074590e-1;
    static const double d5 = 1.51986665636164571966e-2;
    static const double d6 = 5.47593808499534494600e-4;
    static const double d7 = 1.05075007164441684324e-9;
    static const double e0 = 6.65790464350110377720e0;
    static const double e1 = 5.46378491116411436990e0;
    static const double e2 = 1.78482653991729133580e0;
    static const double e3 = 2.96560571828504891230e-1;
    static const double e4 = 2.65321895265761230930e-2;
    static const double e5 = 1.24266094738807843860e-3;
    static const double e6 = 2.71155556874348757815e-5;
    static const double e7 = 2.01033439929228813265e-7;
    static const double f1 = 5.99832206555887937690e-1;
    static const double f2 = 1.36929880922735805310e-1;
    static const double f3 = 1.48753612908506148525e-2;
    static const double f4 = 7.86869131145613259100e-4;
    static const double f5 = 1.84631831751005468180e-5;
    static const double f6 = 1.42151175831644588870e-7;
    static const double f7 = 2.04426310338993978564e-15;

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((a7 * r + a6) * r + a5) * r + a4) * r + a3) * r + a2) * r + a1) * r + a0) /
               (((((((b7 * r + b6) * r + b5) * r + b4) * r + b3) * r + b2) * r + b1) * r + 1.0);
    }

    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((c7 * r + c6) * r + c5) * r + c4) * r + c3) * r + c2) * r + c1) * r + c0) /
              (((((((d7 * r + d6) * r + d5) * r + d4) * r + d3) * r + d2) * r + d1) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((e7 * r + e6) * r + e5) * r + e4) * r + e3) * r + e2) * r + e1) * r + e0) /
              (((((((f7 * r + f6) * r + f5) * r + f4) * r + f3) * r + f2) * r + f1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

NormalGradient natural_gradient(const NormalParams& p, double y) {
    const NormalParams c = clamp_params(p);
    const double z = (y - c.mu) * std::exp(-c.log_sigma);
    return {c.mu - y, 0.5 * (1.0 - z * z)};
}

} // namespace dlcast
