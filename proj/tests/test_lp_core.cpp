#include "doctest.h"

#include <cmath>
#include <limits>

#include "lendpool/example.hpp"
#include "lendpool/ops.hpp"
#include "test_support.hpp"

using namespace lendpool;
namespace ts = lendpool::testsupport;

namespace {

TokenId t(const std::string& sym) { return free_token(sym); }
TokenId mint(const std::string& sym, const std::string& under) { return minted_token(sym, under); }

// One free/minted pair (t0/t0') at price 1, agent X holding `minted_bal` t0'
// backed one-to-one by pool funds, so the exchange rate starts at exactly 1.
LpState simple_state(double minted_bal, double funds, double c_min = 1.5) {
    LpState s;
    s.params = LpParams{c_min, 1.1, 1.0, 0.0};
    s.prices = {{"t0", 1.0}};
    Wallet x;
    x.owner = "X";
    x.balances.set("t0'", minted_bal);
    s.wallets["X"] = std::move(x);
    s.pool.funds.set("t0", funds);
    s.pool.minted["t0"] = MintRegistration{mint("t0'", "t0"), minted_bal};
    validate(s);
    return s;
}

} // namespace

TEST_CASE("point-wise map update") {
    TokenMap f;
    f.set("t1", 195.0);

    auto plus = [](double a, double b) { return a + b; };
    auto minus = [](double a, double b) { return a - b; };

    CHECK(map_apply(f, plus, 50.0, t("t1")).get("t1") == 245.0);

    TokenMap empty;
    TokenMap inserted = map_apply(empty, plus, 7.0, t("t0"));
    CHECK(inserted.get("t0") == 7.0);
    CHECK(inserted.contains("t0"));

    TokenMap g;
    g.set("t1", 80.0);
    CHECK_ERR(map_apply(g, minus, 81.0, t("t1")), UndefinedResult);

    // An over-subtraction inside the comparison tolerance clamps to zero
    // instead of failing: seizures recomputed from a capped repayment land a
    // final ulp past the balance.
    TokenMap h;
    h.set("t1", 100.0);
    double a_hair_more = 100.0 * (1.0 + 1e-13);
    CHECK(map_apply(h, minus, a_hair_more, t("t1")).get("t1") == 0.0);
}

TEST_CASE("exchange rate") {
    LpState s = simple_state(0.0, 0.0);
    CHECK(exchange_rate(s, mint("t0'", "t0")) == 1.0); // zero supply

    LpState ref = example::initial_state();
    CHECK(exchange_rate(ref, mint("t0'", "t0")) == 1.0); // (300 + 0) / 300
    CHECK(exchange_rate(ref, mint("t1'", "t1")) == 1.0); // (195 + 305) / 500

    LpState s2 = simple_state(100.0, 50.0);
    s2.pool.loans["X"].set("t0", 50.0);
    CHECK(exchange_rate(s2, mint("t0'", "t0")) == 1.0); // (50 + 50) / 100

    CHECK_ERR(exchange_rate(s2, mint("zz'", "zz")), UnknownToken);
}

TEST_CASE("value queries on the reference scenario") {
    LpState ref = example::initial_state();
    CHECK(value_lent(ref, "A") == 80.0);
    CHECK(value_lent(ref, "B") == 100.0);
    CHECK(value_lent(ref, "C") == 125.0);
    CHECK(value_lent(ref, "D") == 0.0);

    CHECK(value_minted(ref, "A") == 100.0);
    CHECK(value_minted(ref, "B") == 100.0);
    CHECK(value_minted(ref, "D") == 500.0);

    CHECK(collateralization(ref, "A") == 1.25);
    CHECK(collateralization(ref, "B") == 1.0);
    CHECK(collateralization(ref, "C") == 0.8);
    CHECK(std::isinf(collateralization(ref, "D"))); // no debt

    CHECK_ERR(value_lent(ref, "nobody"), UnknownAgent);
    CHECK_ERR(collateralization(ref, "nobody"), UnknownAgent);
}

TEST_CASE("deposit") {
    SUBCASE("fresh pool mints one-to-one") {
        LpState s;
        s.params = LpParams{1.5, 1.1, 1.0, 0.0};
        s.prices = {{"t0", 1.0}};
        Wallet x;
        x.owner = "X";
        x.balances.set("t0", 150.0);
        s.wallets["X"] = std::move(x);
        validate(s);

        LpState s2 = deposit(s, "X", 100.0, t("t0"));
        CHECK(s2.wallets.at("X").balances.get("t0'") == 100.0);
        CHECK(s2.wallets.at("X").balances.get("t0") == 50.0);
        CHECK(s2.pool.funds.get("t0") == 100.0);
        CHECK(s2.pool.minted.at("t0").supply == 100.0);
        validate(s2);
    }

    SUBCASE("mint amount follows the exchange rate") {
        // Drive the rate to exactly 2 through the transitions themselves:
        // deposit 100, borrow 50 against it, then accrue 200% interest so the
        // loan book reads 150 and ER = (50 + 150) / 100.
        LpState s;
        s.params = LpParams{1.5, 1.1, 1.0, 2.0};
        s.prices = {{"t0", 1.0}};
        Wallet x, y;
        x.owner = "X";
        x.balances.set("t0", 200.0);
        y.owner = "Y";
        y.balances.set("t0", 100.0);
        s.wallets["X"] = std::move(x);
        s.wallets["Y"] = std::move(y);
        validate(s);

        LpState s1 = deposit(s, "X", 100.0, t("t0"));
        LpState s2 = borrow(s1, "X", 50.0, t("t0"));
        LpState s3 = accrue_interest(s2);
        REQUIRE(exchange_rate(s3, mint("t0'", "t0")) == 2.0);

        LpState s4 = deposit(s3, "Y", 100.0, t("t0"));
        CHECK(s4.wallets.at("Y").balances.get("t0'") == 50.0); // v / ER
        CHECK(s4.pool.minted.at("t0").supply == 150.0);
        validate(s4);
    }

    SUBCASE("rejections") {
        LpState s = simple_state(0.0, 0.0);
        s.wallets.at("X").balances.set("t0", 10.0);
        CHECK_ERR(deposit(s, "X", 0.0, t("t0")), NonPositiveAmount);
        CHECK_ERR(deposit(s, "X", -1.0, t("t0")), NonPositiveAmount);
        CHECK_ERR(deposit(s, "X", 11.0, t("t0")), InsufficientBalance);
        CHECK_ERR(deposit(s, "nobody", 1.0, t("t0")), UnknownAgent);
        CHECK_ERR(deposit(s, "X", 1.0, t("zz")), UnknownToken);
    }
}

TEST_CASE("redeem") {
    SUBCASE("debt-free agent can always exit") {
        LpState s = simple_state(100.0, 100.0);
        LpState s2 = redeem(s, "X", 100.0, mint("t0'", "t0"));
        CHECK(s2.wallets.at("X").balances.get("t0'") == 0.0);
        CHECK(s2.wallets.at("X").balances.get("t0") == 100.0);
        CHECK(s2.pool.minted.at("t0").supply == 0.0);
        CHECK(std::isinf(collateralization(s2, "X")));
        validate(s2);
    }

    SUBCASE("undercollateralized agent may not withdraw collateral") {
        LpState ref = example::initial_state();
        CHECK_ERR(redeem(ref, "B", 0.5, mint("t0'", "t0")), Undercollateralized);
        CHECK_ERR(redeem(ref, "C", 10.0, mint("t0'", "t0")), Undercollateralized);
    }

    SUBCASE("pool must hold the payout") {
        // ER = (10 + 190) / 100 = 2: redeeming 50 t0' pays 100 t0 but the
        // pool only holds 10.
        LpState s = simple_state(100.0, 10.0);
        s.wallets["Z"] = Wallet{"Z", {}, false};
        s.pool.loans["Z"].set("t0", 190.0);
        validate(s);
        REQUIRE(exchange_rate(s, mint("t0'", "t0")) == 2.0);
        CHECK_ERR(redeem(s, "X", 50.0, mint("t0'", "t0")), InsufficientPoolFunds);
    }

    SUBCASE("rejections") {
        LpState s = simple_state(100.0, 100.0);
        CHECK_ERR(redeem(s, "X", 101.0, mint("t0'", "t0")), InsufficientBalance);
        CHECK_ERR(redeem(s, "X", 0.0, mint("t0'", "t0")), NonPositiveAmount);
        CHECK_ERR(redeem(s, "X", 1.0, mint("zz'", "zz")), NotMinted);
    }
}

TEST_CASE("borrow") {
    SUBCASE("boundary sits exactly at the collateralization floor") {
        LpState s = simple_state(150.0, 150.0);
        LpState s2 = borrow(s, "X", 100.0, t("t0"));
        CHECK(collateralization(s2, "X") == 1.5);
        CHECK(s2.pool.funds.get("t0") == 50.0);
        CHECK(s2.wallets.at("X").balances.get("t0") == 100.0);
        CHECK(s2.pool.loans.at("X").get("t0") == 100.0);
        validate(s2);

        CHECK_ERR(borrow(s, "X", 100.0 * (1.0 + 1e-6), t("t0")), Undercollateralized);
    }

    SUBCASE("rejections") {
        LpState s = simple_state(150.0, 150.0);
        CHECK_ERR(borrow(s, "X", 151.0, t("t0")), InsufficientPoolFunds);
        CHECK_ERR(borrow(s, "X", 0.0, t("t0")), NonPositiveAmount);

        LpState drained = simple_state(150.0, 0.0);
        CHECK_ERR(borrow(drained, "X", 1.0, t("t0")), InsufficientPoolFunds);
    }
}

TEST_CASE("repay") {
    LpState ref = example::initial_state();

    SUBCASE("full repayment clears the loan entry") {
        LpState s2 = repay(ref, "B", 100.0, t("t1"));
        CHECK(s2.pool.loans.at("B").get("t1") == 0.0);
        CHECK(s2.pool.funds.get("t1") == 295.0);
        CHECK(s2.wallets.at("B").balances.get("t1") == 0.0);
        CHECK(std::isinf(collateralization(s2, "B")));
        validate(s2);
    }

    SUBCASE("rejections") {
        // The wallet check precedes the loan check, so give A spare funds to
        // reach the over-repayment rule.
        LpState rich = ref;
        rich.wallets.at("A").balances.set("t1", 200.0);
        CHECK_ERR(repay(rich, "A", 81.0, t("t1")), ExceedsLoan);
        CHECK_ERR(repay(ref, "B", 101.0, t("t1")), InsufficientBalance);
        CHECK_ERR(repay(ref, "A", 0.0, t("t1")), NonPositiveAmount);
    }
}

TEST_CASE("liquidation walkthrough values") {
    LpState ref = example::initial_state();
    TokenId t1 = t("t1");
    TokenId t0m = mint("t0'", "t0");

    SUBCASE("restoring liquidation of A") {
        LpState s2 = liquidate(ref, "D", "A", 50.0, t1, t0m);
        CHECK(s2.pool.funds.get("t1") == 245.0);
        CHECK(s2.pool.loans.at("A").get("t1") == 30.0);
        // 50 * 1.1 rounds one ulp off 55 in binary, so seized amounts get an
        // epsilon while the repaid side stays exact.
        CHECK(s2.wallets.at("A").balances.get("t0'") == doctest::Approx(45.0).epsilon(1e-12));
        CHECK(s2.wallets.at("D").balances.get("t1") == 450.0);
        CHECK(s2.wallets.at("D").balances.get("t0'") == doctest::Approx(55.0).epsilon(1e-12));
        CHECK(std::abs(collateralization(s2, "A") - 1.5) < 1e-9);
        validate(s2);

        // Once back at the floor the borrower is out of reach.
        CHECK_ERR(liquidate(s2, "D", "A", 1.0, t1, t0m), BorrowerSafe);
    }

    SUBCASE("collateral-exhausting liquidation of B") {
        double v = 1000.0 / 11.0;
        LpState s2 = liquidate(ref, "D", "B", v, t1, t0m);
        CHECK(s2.pool.loans.at("B").get("t1") == doctest::Approx(100.0 / 11.0).epsilon(1e-12));
        CHECK(s2.wallets.at("B").balances.get("t0'") == doctest::Approx(0.0).scale(1.0));
        CHECK(s2.wallets.at("B").balances.get("t0'") < 1e-9);
        CHECK(s2.wallets.at("D").balances.get("t0'") == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(collateralization(s2, "B") < 1e-10); // all collateral gone, debt remains
        validate(s2);
    }
}

TEST_CASE("liquidation preconditions fire in rule order") {
    LpState ref = example::initial_state();
    TokenId t1 = t("t1");
    TokenId t0m = mint("t0'", "t0");

    // Unregistered seize token is checked before anything else.
    CHECK_ERR(liquidate(ref, "D", "A", 50.0, t1, mint("zz'", "zz")), NotMinted);

    // C holds 125 t1: a repayment of 126 fails on the liquidator's balance
    // even though it also exceeds the max_liq share of A's loan.
    CHECK_ERR(liquidate(ref, "C", "A", 126.0, t1, t0m), InsufficientBalance);

    // D holds 500 t1, so the same oversized repayment reaches the loan cap.
    CHECK_ERR(liquidate(ref, "D", "A", 81.0, t1, t0m), ExceedsMaxLiq);

    // Repaying 100 of B's loan would seize 110 of its 100 t0'.
    CHECK_ERR(liquidate(ref, "D", "B", 100.0, t1, t0m), InsufficientCollateralHeld);

    // Repaying A's full loan leaves it debt-free, far above the floor.
    CHECK_ERR(liquidate(ref, "D", "A", 80.0, t1, t0m), OverLiquidation);

    CHECK_ERR(liquidate(ref, "D", "A", 0.0, t1, t0m), NonPositiveAmount);
    CHECK_ERR(liquidate(ref, "D", "nobody", 1.0, t1, t0m), UnknownAgent);
}

TEST_CASE("interest accrual") {
    LpState ref = example::initial_state();

    SUBCASE("zero rate is the identity") {
        CHECK(accrue_interest(ref) == ref);
    }

    SUBCASE("positive rate scales every loan entry") {
        LpState s = ref;
        s.params.interest_rate = 0.01;
        LpState s2 = accrue_interest(s);
        CHECK(s2.pool.loans.at("A").get("t1") == doctest::Approx(80.80).epsilon(1e-12));
        CHECK(s2.pool.loans.at("B").get("t1") == doctest::Approx(101.0).epsilon(1e-12));
        CHECK(s2.pool.loans.at("C").get("t1") == doctest::Approx(126.25).epsilon(1e-12));
        CHECK(s2.pool.funds == s.pool.funds);
        CHECK(s2.wallets == s.wallets);
        validate(s2);
    }

    SUBCASE("empty loan book is the identity") {
        LpState s = simple_state(100.0, 100.0);
        s.params.interest_rate = 0.25;
        CHECK(accrue_interest(s) == s);
    }
}

TEST_CASE("price updates") {
    LpState ref = example::initial_state();

    SUBCASE("identical prices reproduce the state") {
        CHECK(update_prices(ref, ref.prices) == ref);
    }

    SUBCASE("halving the collateral price halves every collateralization") {
        LpState s2 = update_prices(ref, {{"t0", 0.5}, {"t1", 1.0}});
        CHECK(collateralization(s2, "A") == 0.625);
        CHECK(collateralization(s2, "B") == 0.5);
        CHECK(collateralization(s2, "C") == 0.4);
        CHECK(s2.wallets == ref.wallets);
        CHECK(s2.pool == ref.pool);
    }

    SUBCASE("rejections") {
        CHECK_ERR(update_prices(ref, {{"t0", 1.0}}), DomainMismatch);
        CHECK_ERR(update_prices(ref, {{"t0", 1.0}, {"t1", 1.0}, {"t2", 1.0}}), DomainMismatch);
        CHECK_ERR(update_prices(ref, {{"t0", 1.0}, {"t2", 1.0}}), DomainMismatch);
        CHECK_ERR(update_prices(ref, {{"t0", 0.0}, {"t1", 1.0}}), NonPositivePrice);
        CHECK_ERR(update_prices(ref, {{"t0", -2.0}, {"t1", 1.0}}), NonPositivePrice);
    }
}

TEST_CASE("reference walkthrough replays identically in all orders") {
    example::ReplayReport rep = example::run_replay();
    CHECK(rep.orders_total == 6);
    CHECK(rep.orders_converged == 6);
    CHECK(rep.states_checked == rep.states_ok);
    CHECK(rep.states_checked >= 18); // three steps per order
    CHECK(rep.printed.cells_checked == rep.printed.cells_ok);
    CHECK(rep.printed.cells_corrected == 2); // see the fixture notes
    CHECK_MESSAGE(rep.ok(), rep.first_failure);
}

TEST_CASE("restoring amount lands exactly on the floor") {
    // Property over random states: whenever the restoring repayment passes
    // every cap, executing it leaves the borrower at c_min.
    ts::Gen g(0x5eed0001);
    int verified = 0;
    for (int iter = 0; iter < 1500; ++iter) {
        LpState s = ts::random_state(g);
        Wallet liq;
        liq.owner = "zz_liq";
        liq.unbounded_funds = true;
        s.wallets["zz_liq"] = liq;

        for (const auto& [bid, loans] : s.pool.loans) {
            if (bid == "zz_liq") continue;
            if (!strictly_lt(collateralization(s, bid), s.params.c_min)) continue;
            for (const auto& [loan_sym, owed] : loans.entries()) {
                if (owed <= 0.0) continue;
                for (const auto& [under, reg] : s.pool.minted) {
                    double v = 0.0;
                    try {
                        v = restoring_repay_amount(s, bid, free_token(loan_sym), reg.minted);
                    } catch (const LpError&) {
                        continue; // ill-posed for this pair
                    }
                    if (v <= 0.0) continue;
                    LpState s2;
                    try {
                        s2 = liquidate(s, "zz_liq", bid, v, free_token(loan_sym), reg.minted);
                    } catch (const LpError&) {
                        continue; // some cap (max_liq, balance) rejects the full amount
                    }
                    double c = collateralization(s2, bid);
                    CHECK_MESSAGE(ts::close_rel(c, s.params.c_min, 1e-9),
                                  "post C ", c, " vs c_min ", s.params.c_min);
                    verified++;
                }
            }
        }
    }
    CHECK(verified > 50); // the property must not pass vacuously
}

TEST_CASE("liquidation value identities") {
    ts::Gen g(0x5eed0002);
    int verified = 0;
    for (int iter = 0; iter < 500; ++iter) {
        LpState s = ts::random_state(g);
        std::vector<AgentId> agents;
        for (const auto& [id, w] : s.wallets) agents.push_back(id);
        const AgentId& liq = g.pick(agents);

        for (const auto& [bid, loans] : s.pool.loans) {
            for (const auto& [loan_sym, owed] : loans.entries()) {
                if (owed <= 0.0) continue;
                for (const auto& [under, reg] : s.pool.minted) {
                    double v = owed * s.params.max_liq * g.amount(0.05, 0.95);
                    LpState s2;
                    try {
                        s2 = liquidate(s, liq, bid, v, free_token(loan_sym), reg.minted);
                    } catch (const LpError&) {
                        continue;
                    }
                    double rhs = v * price_of(s, loan_sym);
                    double bal0 = s.wallets.at(bid).balances.get(reg.minted.symbol);
                    double bal1 = s2.wallets.at(bid).balances.get(reg.minted.symbol);
                    if (liq == bid) {
                        // Seizing your own collateral nets to zero, so only
                        // the repayment side of the trade is visible.
                        CHECK(ts::close_rel(bal1, bal0, 1e-9));
                    } else {
                        // Differencing the balances cancels most of their
                        // digits, so the comparison runs at the global
                        // tolerance rather than at a few ulps.
                        double seized = bal0 - bal1;
                        double gained = s2.wallets.at(liq).balances.get(reg.minted.symbol) -
                                        s.wallets.at(liq).balances.get(reg.minted.symbol);
                        CHECK(ts::close_rel(seized * price_of(s, under) / s.params.r_liq, rhs, 1e-9));
                        CHECK(ts::close_rel(gained, seized, 1e-9));
                    }
                    CHECK(ts::close_rel(value_lent(s, bid) - value_lent(s2, bid), rhs, 1e-9));
                    verified++;
                }
            }
        }
    }
    CHECK(verified > 100);
}

TEST_CASE("conservation and purity under random action sequences") {
    ts::Gen g(0x5eed0003);
    int accepted = 0, rejected = 0;
    for (int iter = 0; iter < 300; ++iter) {
        LpState s = ts::random_state(g);
        std::map<std::string, double> baseline = ts::free_totals(s);

        for (int step = 0; step < 12; ++step) {
            Action a = ts::random_action(g, s);
            LpState snapshot = s;
            try {
                LpState s2 = apply_action(s, a);
                validate(s2); // non-negativity and supply conservation
                s = std::move(s2);
                accepted++;
            } catch (const LpError&) {
                CHECK(s == snapshot); // rejected actions leave no trace
                rejected++;
            }

            std::map<std::string, double> now = ts::free_totals(s);
            REQUIRE(now.size() == baseline.size());
            for (const auto& [sym, total] : baseline)
                CHECK_MESSAGE(ts::close_rel(now.at(sym), total, 1e-9), "token ", sym,
                              " drifted from ", total, " to ", now.at(sym));

            std::map<std::string, double> held = ts::minted_totals(s);
            for (const auto& [under, reg] : s.pool.minted)
                CHECK(ts::close_rel(held.at(reg.minted.symbol), reg.supply, 1e-9));
        }
    }
    // Both outcomes must actually occur for the purity claim to mean much.
    CHECK(accepted > 500);
    CHECK(rejected > 500);
}
