#include "lendpool/gbm.hpp"

#include <cmath>

#include "lendpool/rng.hpp"

namespace lendpool {

std::vector<double> log_returns(const std::vector<double>& closes) {
    if (closes.size() < 2) fail(Err::TooShort, "need at least two closes");
    for (double c : closes)
        if (!(c > 0.0)) fail(Err::NonPositivePrice, "closes must be positive");
    std::vector<double> out;
    out.reserve(closes.size() - 1);
    for (size_t i = 1; i < closes.size(); ++i) out.push_back(std::log(closes[i] / closes[i - 1]));
    return out;
}

GbmParams estimate_params(const std::vector<double>& closes, double p0) {
    if (closes.size() < 3) fail(Err::TooShort, "need at least three closes to estimate variance");
    std::vector<double> returns = log_returns(closes);

    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(returns.size());

    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    double sample_sd = std::sqrt(ss / static_cast<double>(returns.size() - 1));

    GbmParams params;
    params.mu = mean;
    params.sigma = sample_sd / std::sqrt(kTrimesterYears);
    params.p0 = p0;
    return params;
}

double gbm_step(double p, const GbmParams& params, double dt, double eps) {
    return p * std::exp((params.mu - 0.5 * params.sigma * params.sigma) * dt +
                        params.sigma * eps * std::sqrt(dt));
}

PricePath generate_path(const ScenarioSpec& spec, uint64_t seed) {
    if (spec.horizon < 1) fail(Err::ValidationError, "horizon must be at least 1");
    if (!(spec.dt > 0.0)) fail(Err::ValidationError, "dt must be positive");
    if (!(spec.rho >= -1.0 && spec.rho <= 1.0)) fail(Err::ValidationError, "rho must lie in [-1, 1]");

    NormalRng rng(seed);
    PricePath path;
    path.reserve(static_cast<size_t>(spec.horizon) + 1);
    path.push_back({spec.collateral.p0, spec.loan.p0});

    double cross = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
    for (int r = 0; r < spec.horizon; ++r) {
        double eps = rng.next();
        double eps2 = rng.next();
        const PricePoint& prev = path.back();
        PricePoint next;
        next.collateral = gbm_step(prev.collateral, spec.collateral, spec.dt, eps);
        next.loan = gbm_step(prev.loan, spec.loan, spec.dt, spec.rho * eps + cross * eps2);
        path.push_back(next);
    }
    return path;
}

} // namespace lendpool
