#include "dlcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dlcast/errors.hpp"
#include "dlcast/rng.hpp"
#include "dlcast/text.hpp"

namespace dlcast {

namespace {

// ---------------------------------------------------------------------------
// Frozen generator constants. Everything below is a design choice that exists
// to create testable structure (heteroscedasticity, category effects, an
// e2e-vs-radio weighting that grows from LTE to NR_SA); none of it models any
// real measurement campaign. The seed-0 output is pinned by a golden-hash
// test, so treat any edit here as a breaking change.
// ---------------------------------------------------------------------------

constexpr std::int64_t kBaseTimestamp = 1700000000; // fixed epoch origin
constexpr double kMuRef = 10.126631103850338;       // ln(25000)
constexpr double kSigmaRef = 1.1;

// Latent model in reference-z units (z = (ln(1+kbps) - kMuRef)/kSigmaRef):
//   mu(x)    = mu0 + sum_k a_k * tanh(s_k) + a_hour * sin(2*pi*(hour-14)/24)
//            + a_inter * tanh(s_rsrp) * tanh(s_sinr)
//            + band_step * band_idx + carrier_step * carrier_idx
//   sigma(x) = sigma_base * exp(g_jit*tanh(s_jit) + g_lat*tanh(s_lat)
//                                - g_sinr*tanh(s_sinr))
// where s_* are the feature values centred/scaled by their sampling laws.
struct TechProfile {
    double mu0;
    double a_rsrp, a_rsrq, a_sinr, a_ta;     // radio weights
    double a_lat, a_jit, a_ttfb, a_loss;     // e2e weights
    double a_hour, a_inter;
    double band_step, carrier_step;
    double sigma_base;
    double g_jit, g_lat, g_sinr;
};

const TechProfile& profile_for(Tech tech) {
    static const TechProfile lte = {-0.35, 0.55, 0.30, 0.60, -0.15, -0.18, -0.10, -0.12,
                                    -0.08, -0.12, 0.15,  0.10, 0.05,  0.32,  0.10,  0.06, 0.08};
    static const TechProfile nsa = {0.10,  0.45, 0.22, 0.55, -0.12, -0.28, -0.18, -0.20,
                                    -0.12, -0.15, 0.12, 0.12, 0.05,  0.42,  0.18,  0.10, 0.10};
    static const TechProfile sa = {0.40,  0.30, 0.15, 0.40, -0.10, -0.45, -0.35, -0.38,
                                   -0.20, -0.18, 0.10, 0.12, 0.06,  0.52,  0.50,  0.08, 0.06};
    switch (tech) {
    case Tech::LTE: return lte;
    case Tech::NR_NSA: return nsa;
    case Tech::NR_SA: return sa;
    }
    return lte;
}

const std::vector<std::string>& bands_for(Tech tech) {
    static const std::vector<std::string> lte = {"B3", "B7", "B20"};
    static const std::vector<std::string> nsa = {"n78", "B3", "n28", "B7"};
    static const std::vector<std::string> sa = {"n78", "n28", "n1"};
    switch (tech) {
    case Tech::LTE: return lte;
    case Tech::NR_NSA: return nsa;
    case Tech::NR_SA: return sa;
    }
    return lte;
}

const std::vector<std::string>& carriers() {
    static const std::vector<std::string> ops = {"OpA", "OpB", "OpC", "OpD"};
    return ops;
}

constexpr double kPi = 3.14159265358979323846;

} // namespace

SynthResult generate(const GeneratorConfig& cfg) {
    if (cfg.n_rows < 1) throw ConfigError("generator: n_rows must be >= 1");
    if (cfg.span_weeks < 4) throw ConfigError("generator: span_weeks must be >= 4");
    for (double r : cfg.missing_rates) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw ConfigError("generator: missing rates must lie in [0,1]");
        }
    }

    const TechProfile& prof = profile_for(cfg.tech);
    const auto& bands = bands_for(cfg.tech);
    const auto& ops = carriers();
    const double span_seconds = static_cast<double>(cfg.span_weeks) * 7.0 * 86400.0;

    SplitMix64 rng(cfg.seed);
    SynthResult out;
    out.records.resize(cfg.n_rows);
    out.truth.mu_log.resize(cfg.n_rows);
    out.truth.sigma_log.resize(cfg.n_rows);

    for (std::size_t i = 0; i < cfg.n_rows; ++i) {
        SampleRecord& rec = out.records[i];
        rec.tech = cfg.tech;

        // Fixed draw order per row keeps the stream stable across configs.
        rec.timestamp = kBaseTimestamp +
                        static_cast<std::int64_t>(rng.next_uniform() * span_seconds);
        const double rsrp = std::clamp(rng.normal(-95.0, 12.0), -140.0, -44.0);
        const double rsrq = std::clamp(rng.normal(-11.0, 3.0), -20.0, -3.0);
        const double sinr = std::clamp(rng.normal(12.0, 8.0), -10.0, 30.0);
        const double ta = std::clamp(std::floor(rng.exponential(1.0 / 8.0)), 0.0, 63.0);
        const double latency = rng.lognormal(std::log(30.0), 0.5);
        const double jitter = rng.lognormal(std::log(5.0), 0.7);
        const double ttfb = latency * rng.uniform(1.5, 4.0);
        const double loss = std::clamp(rng.exponential(1.0 / 0.005), 0.0, 1.0);
        const auto carrier_idx = rng.next_below(ops.size());
        const auto band_idx = rng.next_below(bands.size());

        rec.carrier = ops[carrier_idx];
        rec.band = bands[band_idx];
        rec.rsrp = rsrp;
        rec.rsrq = rsrq;
        rec.sinr = sinr;
        rec.timing_advance = ta;
        rec.latency_ms = latency;
        rec.jitter_ms = jitter;
        rec.ttfb_ms = ttfb;
        rec.packet_loss = loss;

        // Centred/scaled effect inputs per the sampling laws above.
        const double s_rsrp = (rsrp + 95.0) / 12.0;
        const double s_rsrq = (rsrq + 11.0) / 3.0;
        const double s_sinr = (sinr - 12.0) / 8.0;
        const double s_ta = (ta - 8.0) / 8.0;
        const double s_lat = (std::log(latency) - std::log(30.0)) / 0.5;
        const double s_jit = (std::log(jitter) - std::log(5.0)) / 0.7;
        const double s_ttfb = (std::log(ttfb) - std::log(30.0 * 2.6)) / 0.6;
        const double s_loss = std::min(loss, 0.05) / 0.005 - 1.0;
        const int hour = derive_context(rec.timestamp).hour;

        double mu = prof.mu0;
        mu += prof.a_rsrp * std::tanh(s_rsrp);
        mu += prof.a_rsrq * std::tanh(s_rsrq);
        mu += prof.a_sinr * std::tanh(s_sinr);
        mu += prof.a_ta * std::tanh(s_ta);
        mu += prof.a_lat * std::tanh(s_lat);
        mu += prof.a_jit * std::tanh(s_jit);
        mu += prof.a_ttfb * std::tanh(s_ttfb);
        mu += prof.a_loss * std::tanh(s_loss);
        mu += prof.a_hour * std::sin(2.0 * kPi * (static_cast<double>(hour) - 14.0) / 24.0);
        mu += prof.a_inter * std::tanh(s_rsrp) * std::tanh(s_sinr);
        mu += prof.band_step * static_cast<double>(band_idx);
        mu += prof.carrier_step * static_cast<double>(carrier_idx);

        double sigma = prof.sigma_base;
        if (!cfg.homoscedastic) {
            sigma *= std::exp(prof.g_jit * std::tanh(s_jit) + prof.g_lat * std::tanh(s_lat) -
                              prof.g_sinr * std::tanh(s_sinr));
        }

        const double z = rng.normal(mu, sigma);
        rec.throughput_kbps = std::expm1(kMuRef + kSigmaRef * z);
        out.truth.mu_log[i] = kMuRef + kSigmaRef * mu;
        out.truth.sigma_log[i] = kSigmaRef * sigma;

        // Missingness flags are always drawn so the feature stream does not
        // depend on the configured rates.
        const std::array<std::optional<double>*, miss::count> cells = {
            &rec.rsrp,       &rec.rsrq,      &rec.sinr, &rec.timing_advance,
            &rec.latency_ms, &rec.jitter_ms, &rec.ttfb_ms, &rec.packet_loss};
        for (std::size_t k = 0; k < miss::count; ++k) {
            const double u = rng.next_uniform();
            if (u < cfg.missing_rates[k]) cells[k]->reset();
        }
    }

    out.data = build_dataset(out.records);
    return out;
}

std::vector<NormalParams> standardized(const GroundTruth& gt, const TargetTransform& t) {
    std::vector<NormalParams> out(gt.mu_log.size());
    for (std::size_t i = 0; i < gt.mu_log.size(); ++i) {
        out[i].mu = (gt.mu_log[i] - t.mu_train) / t.sigma_train;
        out[i].log_sigma = std::log(gt.sigma_log[i] / t.sigma_train);
    }
    return out;
}

GroundTruth truth_subset(const GroundTruth& gt, const std::vector<std::size_t>& rows) {
    GroundTruth out;
    out.mu_log.reserve(rows.size());
    out.sigma_log.reserve(rows.size());
    for (std::size_t i : rows) {
        out.mu_log.push_back(gt.mu_log[i]);
        out.sigma_log.push_back(gt.sigma_log[i]);
    }
    return out;
}

double true_nll(const GroundTruth& gt, const std::vector<double>& y_log) {
    if (gt.mu_log.size() != y_log.size()) throw DataError("true_nll: length mismatch");
    if (y_log.empty()) throw DataError("true_nll: at least one row required");
    double sum = 0.0;
    for (std::size_t i = 0; i < y_log.size(); ++i) {
        sum += nll({gt.mu_log[i], std::log(gt.sigma_log[i])}, y_log[i]);
    }
    return sum / static_cast<double>(y_log.size());
}

void write_truth_csv(const std::string& path, const GroundTruth& gt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "row_index,true_mu,true_sigma\n";
    for (std::size_t i = 0; i < gt.mu_log.size(); ++i) {
        out << i << ',' << fmt_double(gt.mu_log[i]) << ',' << fmt_double(gt.sigma_log[i]) << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace dlcast
