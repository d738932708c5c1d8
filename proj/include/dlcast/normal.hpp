#pragma once

namespace dlcast {

// log-sigma bounds applied when scoring and when emitting predictions.
inline constexpr double kLogSigmaMin = -15.0;
inline constexpr double kLogSigmaMax = 15.0;

// Predictive Normal in (mu, log sigma) parametrization. Keeping the scale in
// log space means updates never have to police a positivity constraint.
struct NormalParams {
    double mu = 0.0;
    double log_sigma = 0.0;

    double sigma() const;
};

NormalParams clamp_params(NormalParams p);

// Negative log-likelihood of y under N(mu, sigma^2).
double nll(const NormalParams& p, double y);

// Closed-form CRPS of a Normal forecast:
//   sigma * [z*(2*Phi(z) - 1) + 2*phi(z) - 1/sqrt(pi)],  z = (y - mu)/sigma.
double crps_normal(const NormalParams& p, double y);

// CRPS of a degenerate (point) forecast, which reduces to |y - pred|.
double crps_point(double pred, double y);

double normal_pdf(double z);

// Standard normal CDF, absolute error below 1e-15.
double normal_cdf(double z);

// Inverse standard normal CDF on (0,1); |Phi(Q(p)) - p| stays below 1e-8.
double normal_quantile(double p);

struct NormalGradient {
    double d_mu = 0.0;
    double d_log_sigma = 0.0;
};

// Natural gradient of the NLL in (mu, log sigma): the ordinary gradient
// ((mu-y)/sigma^2, 1-z^2) preconditioned by the inverse Fisher information
// diag(sigma^2, 1/2), which collapses to (mu - y, (1 - z^2)/2).
NormalGradient natural_gradient(const NormalParams& p, double y);

} // namespace dlcast
