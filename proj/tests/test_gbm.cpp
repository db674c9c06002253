#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "lendpool/gbm.hpp"
#include "lendpool/rng.hpp"
#include "test_support.hpp"

using namespace lendpool;
namespace ts = lendpool::testsupport;

namespace {

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

ScenarioSpec pair_spec(GbmParams coll, GbmParams loan, double rho) {
    ScenarioSpec spec;
    spec.name = "pair";
    spec.collateral_token = free_token("COL");
    spec.collateral = coll;
    spec.loan_token = free_token("LOAN");
    spec.loan = loan;
    spec.rho = rho;
    return spec;
}

} // namespace

TEST_CASE("log returns of a close series") {
    std::vector<double> closes = {100.0, 110.0, 99.0};
    std::vector<double> r = log_returns(closes);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(std::log(1.1)).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(std::log(0.9)).epsilon(1e-15));

    CHECK_ERR(log_returns({}), TooShort);
    CHECK_ERR(log_returns({100.0}), TooShort);
    CHECK_ERR(log_returns({100.0, 0.0, 90.0}), NonPositivePrice);
    CHECK_ERR(log_returns({100.0, -5.0}), NonPositivePrice);
}

TEST_CASE("parameter estimation matches the hand-computed moments") {
    // Closes built from known log returns 0.01 and 0.02: the mean is 0.015
    // and the n-1 sample deviation is 0.005 * sqrt(2), de-annualized by the
    // trimester window.
    std::vector<double> closes = {100.0, 100.0 * std::exp(0.01), 100.0 * std::exp(0.03)};
    GbmParams est = estimate_params(closes, 77.0);
    CHECK(est.mu == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(est.sigma ==
          doctest::Approx(0.005 * std::sqrt(2.0) / std::sqrt(kTrimesterYears)).epsilon(1e-12));
    CHECK(est.p0 == 77.0);

    SUBCASE("a constant series estimates to zero drift and volatility") {
        GbmParams flat = estimate_params({5.0, 5.0, 5.0, 5.0}, 5.0);
        CHECK(flat.mu == 0.0);
        CHECK(flat.sigma == 0.0);
    }

    SUBCASE("estimation is a pure function of its inputs") {
        CHECK(estimate_params(closes, 77.0) == est);
    }

    SUBCASE("too short to estimate a variance") {
        CHECK_ERR(estimate_params({100.0, 101.0}, 1.0), TooShort);
        CHECK_ERR(estimate_params({}, 1.0), TooShort);
    }
}

TEST_CASE("estimation recovers the parameters of its own model") {
    // Daily log returns drawn from the model the estimator assumes:
    // N(mu, (sigma * sqrt(91/365))^2). With 2000 samples the estimates must
    // land within three standard errors of the truth.
    const double mu_true = 0.002, sigma_true = 0.1;
    const double sd_daily = sigma_true * std::sqrt(kTrimesterYears);
    const int n = 2000;

    NormalRng rng(0x6b5eed01ULL);
    std::vector<double> closes = {100.0};
    for (int i = 0; i < n; ++i)
        closes.push_back(closes.back() * std::exp(mu_true + sd_daily * rng.next()));

    GbmParams est = estimate_params(closes, 123.0);
    CHECK(est.p0 == 123.0);
    CHECK(std::abs(est.mu - mu_true) < 3.0 * sd_daily / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(est.sigma - sigma_true) < 3.0 * sigma_true / std::sqrt(2.0 * (n - 1)));
}

TEST_CASE("single geometric step") {
    GbmParams p{0.3, 0.0, 1.0};
    // With zero volatility the step is pure exponential growth.
    CHECK(gbm_step(50.0, p, 0.25, 1.7) == 50.0 * std::exp(0.3 * 0.25));

    // Opposite shocks multiply out to the deterministic two-step drift.
    GbmParams q{0.1, 0.4, 1.0};
    double up = gbm_step(10.0, q, 0.5, 0.9);
    double down = gbm_step(10.0, q, 0.5, -0.9);
    CHECK(ts::close_rel(up * down, 100.0 * std::exp(2.0 * (0.1 - 0.08) * 0.5), 1e-12));
}

TEST_CASE("path generation is deterministic and respects the correlation wiring") {
    GbmParams coll{0.3, 0.4, 50.0};
    GbmParams loan{0.05, 0.1, 2.0};
    ScenarioSpec spec = pair_spec(coll, loan, -1.0);

    PricePath path = generate_path(spec, 99);
    REQUIRE(path.size() == static_cast<size_t>(spec.horizon) + 1);
    CHECK(path[0].collateral == 50.0);
    CHECK(path[0].loan == 2.0);
    for (const PricePoint& pt : path) {
        CHECK(pt.collateral > 0.0);
        CHECK(pt.loan > 0.0);
    }

    SUBCASE("identical spec and seed give identical paths") {
        PricePath again = generate_path(spec, 99);
        REQUIRE(again.size() == path.size());
        for (size_t i = 0; i < path.size(); ++i) {
            CHECK(again[i].collateral == path[i].collateral);
            CHECK(again[i].loan == path[i].loan);
        }
        PricePath other = generate_path(spec, 100);
        CHECK(other[1].collateral != path[1].collateral);
    }

    SUBCASE("at rho = -1 the loan shock is the exact mirror of the collateral shock") {
        // Subtracting the deterministic drift leaves sigma * eps * sqrt(dt);
        // the same eps drives both legs with opposite signs, so the
        // sigma-weighted shocks cancel step by step.
        double drift_c = (coll.mu - 0.5 * coll.sigma * coll.sigma) * spec.dt;
        double drift_l = (loan.mu - 0.5 * loan.sigma * loan.sigma) * spec.dt;
        for (size_t i = 1; i < path.size(); ++i) {
            double shock_c = std::log(path[i].collateral / path[i - 1].collateral) - drift_c;
            double shock_l = std::log(path[i].loan / path[i - 1].loan) - drift_l;
            CHECK(ts::close_rel(shock_c * loan.sigma + shock_l * coll.sigma, 0.0, 1e-12));
        }
    }

    SUBCASE("invalid specs are rejected") {
        ScenarioSpec bad = spec;
        bad.horizon = 0;
        CHECK_ERR(generate_path(bad, 1), ValidationError);
        bad = spec;
        bad.dt = 0.0;
        CHECK_ERR(generate_path(bad, 1), ValidationError);
        bad = spec;
        bad.rho = -1.5;
        CHECK_ERR(generate_path(bad, 1), ValidationError);
        bad = spec;
        bad.rho = 1.5;
        CHECK_ERR(generate_path(bad, 1), ValidationError);
    }
}

TEST_CASE("terminal distribution matches the lognormal moments") {
    // ln(P_T / p0) is N((mu - sigma^2/2) T, sigma^2 T) with T = 91/365. The
    // sampled mean and variance over 4000 paths must sit within three
    // standard errors; the seed is frozen, so this never flakes.
    GbmParams coll{0.3, 0.4, 50.0};
    GbmParams loan{0.05, 0.1, 2.0};
    ScenarioSpec spec = pair_spec(coll, loan, -1.0);

    const int m = 4000;
    std::vector<double> terminal;
    terminal.reserve(m);
    for (int i = 0; i < m; ++i)
        terminal.push_back(std::log(generate_path(spec, derive_seed(5, 0, i)).back().collateral / 50.0));

    double mean = 0.0;
    for (double x : terminal) mean += x;
    mean /= m;
    double ss = 0.0;
    for (double x : terminal) ss += (x - mean) * (x - mean);
    double var = ss / (m - 1);

    const double T = kTrimesterYears;
    double want_mean = (coll.mu - 0.5 * coll.sigma * coll.sigma) * T;
    double want_var = coll.sigma * coll.sigma * T;
    CHECK(std::abs(mean - want_mean) < 3.0 * std::sqrt(want_var / m));
    CHECK(std::abs(var / want_var - 1.0) < 3.0 * std::sqrt(2.0 / (m - 1)));
}

TEST_CASE("sampled correlation between the two legs") {
    GbmParams coll{0.3, 0.4, 50.0};
    GbmParams loan{0.05, 0.1, 2.0};

    auto step_pairs = [&](double rho, std::vector<double>& xs, std::vector<double>& ys) {
        ScenarioSpec spec = pair_spec(coll, loan, rho);
        for (int p = 0; p < 120; ++p) {
            PricePath path = generate_path(spec, derive_seed(9, 1, p));
            for (size_t i = 1; i < path.size(); ++i) {
                xs.push_back(std::log(path[i].collateral / path[i - 1].collateral));
                ys.push_back(std::log(path[i].loan / path[i - 1].loan));
            }
        }
    };

    std::vector<double> xs, ys;
    step_pairs(-1.0, xs, ys);
    // The per-step increments are affine in the same normal draw with
    // opposite-sign coefficients, so the sample correlation is -1 up to
    // floating-point noise.
    CHECK(pearson(xs, ys) < -0.999999);

    xs.clear();
    ys.clear();
    step_pairs(-0.5, xs, ys);
    double r = pearson(xs, ys);
    CHECK(std::abs(r + 0.5) < 0.03); // ~10k samples, 3 standard errors wide

    xs.clear();
    ys.clear();
    step_pairs(0.0, xs, ys);
    CHECK(std::abs(pearson(xs, ys)) < 0.04);
}

TEST_CASE("seed derivation and the pinned normal sampler") {
    std::set<uint64_t> seen;
    for (uint64_t cell = 0; cell < 50; ++cell)
        for (uint64_t i = 0; i < 500; ++i) seen.insert(derive_seed(7, cell, i));
    CHECK(seen.size() == 50u * 500u);

    CHECK(derive_seed(7, 3, 11) == derive_seed(7, 3, 11));
    CHECK(derive_seed(8, 3, 11) != derive_seed(7, 3, 11));

    SUBCASE("normal moments") {
        NormalRng rng(424242);
        const int n = 200000;
        double mean = 0.0;
        std::vector<double> draws;
        draws.reserve(n);
        for (int i = 0; i < n; ++i) {
            draws.push_back(rng.next());
            mean += draws.back();
        }
        mean /= n;
        double ss = 0.0;
        for (double x : draws) ss += (x - mean) * (x - mean);
        double var = ss / (n - 1);
        CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
        CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
    }

    SUBCASE("uniform draws stay inside the half-open unit interval") {
        NormalRng rng(7);
        for (int i = 0; i < 1000; ++i) {
            double u = rng.uniform01();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
        }
    }
}
