#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lendpool/tokens.hpp"

namespace lendpool {

// Trimester window the estimation convention is anchored to: daily closes
// sampled over 91 days, i.e. 91/365 of a year.
inline constexpr double kTrimesterYears = 91.0 / 365.0;
inline constexpr int kTrimesterDays = 91;

struct GbmParams {
    double mu = 0.0;    // drift
    double sigma = 0.0; // volatility, de-annualized with sqrt(91/365)
    double p0 = 1.0;    // initial price

    friend bool operator==(const GbmParams&, const GbmParams&) = default;
};

// ln(closes[i+1] / closes[i]) for consecutive samples.
std::vector<double> log_returns(const std::vector<double>& closes);

// mu is the sample mean of the log returns and sigma their sample standard
// deviation (n-1 denominator) divided by sqrt(91/365). p0 is passed through:
// the simulated horizon usually starts at a different price level than the
// sampled window.
GbmParams estimate_params(const std::vector<double>& closes, double p0);

// One geometric step: p * exp((mu - sigma^2/2) dt + sigma eps sqrt(dt)).
double gbm_step(double p, const GbmParams& params, double dt, double eps);

// A correlated collateral/loan price pair evolved over `horizon` rounds of
// length dt each (defaults: 91 daily steps spanning one trimester).
struct ScenarioSpec {
    std::string name;
    TokenId collateral_token;
    GbmParams collateral;
    TokenId loan_token;
    GbmParams loan;
    double rho = -1.0;
    int horizon = kTrimesterDays;
    double dt = kTrimesterYears / kTrimesterDays;
};

struct PricePoint {
    double collateral = 0.0;
    double loan = 0.0;
};

using PricePath = std::vector<PricePoint>; // horizon + 1 entries, entry 0 = (p0, p0)

// Per round two independent standard normals (eps, eps2) are drawn; the
// collateral uses eps, the loan uses rho*eps + sqrt(1-rho^2)*eps2 (at
// rho = -1 that collapses to -eps). Identical (spec, seed) pairs give
// identical paths.
PricePath generate_path(const ScenarioSpec& spec, uint64_t seed);

} // namespace lendpool
