#include "lendpool/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace lendpool {

double restoring_repay_amount(const LpState& s, const AgentId& borrower,
                              const TokenId& tau_hat, const TokenId& tau_m) {
    double rate = exchange_rate(s, tau_m);
    double reward = s.params.r_liq * rate;
    if (approx_ge(reward, s.params.c_min))
        fail(Err::IllPosed, "r_liq * exchange_rate reaches c_min; no repayment restores");
    double lent = value_lent(s, borrower);
    double minted = value_minted(s, borrower);
    return (s.params.c_min * lent - minted) / (price_of(s, tau_hat.symbol) * (s.params.c_min - reward));
}

double max_seizable_repay_amount(const LpState& s, const AgentId& liquidator,
                                 const AgentId& borrower, const TokenId& tau_hat,
                                 const TokenId& tau_m) {
    const MintRegistration& reg = registration_for_minted(s, tau_m.symbol);
    double p_hat = price_of(s, tau_hat.symbol);
    double p_under = price_of(s, reg.minted.underlying);

    auto loans_it = s.pool.loans.find(borrower);
    double owed = loans_it == s.pool.loans.end() ? 0.0 : loans_it->second.get(tau_hat.symbol);
    double cap = s.params.max_liq * owed;

    auto borrower_it = s.wallets.find(borrower);
    if (borrower_it == s.wallets.end()) fail(Err::UnknownAgent, "no wallet for " + borrower);
    double held = borrower_it->second.balances.get(tau_m.symbol);
    cap = std::min(cap, held * p_under / (p_hat * s.params.r_liq));

    auto liq_it = s.wallets.find(liquidator);
    if (liq_it == s.wallets.end()) fail(Err::UnknownAgent, "no wallet for " + liquidator);
    if (!liq_it->second.unbounded_funds) cap = std::min(cap, liq_it->second.balances.get(tau_hat.symbol));

    // Seizing from yourself hands the collateral straight back, so a
    // self-liquidation is a plain repayment: the reward leg drops out of the
    // restoring equation and can never make it ill-posed.
    double reward = liquidator == borrower ? 0.0 : s.params.r_liq * exchange_rate(s, tau_m);
    if (!approx_ge(reward, s.params.c_min)) {
        double lent = value_lent(s, borrower);
        double minted = value_minted(s, borrower);
        double restoring = (s.params.c_min * lent - minted) / (p_hat * (s.params.c_min - reward));
        cap = std::min(cap, restoring);
    }

    if (!(cap > 0.0)) fail(Err::NoRepayableLoan, "no positive repayment admissible for " + borrower);
    return cap;
}

std::optional<LiquidationPlan> select_plan(const LpState& s, const AgentId& liquidator) {
    if (s.wallets.count(liquidator) == 0) fail(Err::UnknownAgent, "no wallet for " + liquidator);

    std::vector<TokenId> seizable; // sorted by minted symbol so ties resolve on it
    for (const auto& [underlying, reg] : s.pool.minted) seizable.push_back(reg.minted);
    std::sort(seizable.begin(), seizable.end());

    std::optional<LiquidationPlan> best;
    for (const auto& [borrower, wallet] : s.wallets) {
        if (!strictly_lt(collateralization(s, borrower), s.params.c_min)) continue;

        auto loans_it = s.pool.loans.find(borrower);
        if (loans_it == s.pool.loans.end()) continue;
        for (const auto& [loan_sym, owed] : loans_it->second.entries()) {
            if (owed <= 0.0) continue;
            TokenId tau_hat = free_token(loan_sym);
            for (const TokenId& tau_m : seizable) {
                if (wallet.balances.get(tau_m.symbol) <= 0.0) continue;
                double v;
                try {
                    v = max_seizable_repay_amount(s, liquidator, borrower, tau_hat, tau_m);
                } catch (const LpError& e) {
                    if (e.kind() == Err::NoRepayableLoan) continue;
                    throw;
                }
                double seize_value = v * price_of(s, loan_sym) * s.params.r_liq;
                if (!best || seize_value > best->expected_seize_value)
                    best = LiquidationPlan{borrower, v, tau_hat, tau_m, seize_value};
            }
        }
    }
    return best;
}

std::pair<LpState, std::vector<Action>> liquidation_round(const LpState& s,
                                                          const std::vector<AgentId>& liquidators) {
    LpState state = s;
    std::vector<Action> executed;
    for (const AgentId& liq : liquidators) {
        std::optional<LiquidationPlan> plan = select_plan(state, liq);
        if (!plan) continue;
        try {
            state = liquidate(state, liq, plan->borrower, plan->repay_amount,
                              plan->repay_token, plan->seize_token);
        } catch (const LpError& e) {
            fail(Err::InternalInconsistency,
                 "selected plan rejected by the liquidate rule: " + std::string(e.what()));
        }
        Action a;
        a.kind = ActionKind::Liquidate;
        a.agent = liq;
        a.borrower = plan->borrower;
        a.amount = plan->repay_amount;
        a.token = plan->repay_token.symbol;
        a.seize_token = plan->seize_token.symbol;
        executed.push_back(std::move(a));
    }
    return {std::move(state), std::move(executed)};
}

} // namespace lendpool
