#include "lendpool/ops.hpp"

#include <cmath>
#include <limits>

namespace lendpool {

namespace {

const Wallet& wallet_at(const LpState& s, const AgentId& a) {
    auto it = s.wallets.find(a);
    if (it == s.wallets.end()) fail(Err::UnknownAgent, "no wallet for " + a);
    return it->second;
}

void require_positive_amount(double v) {
    if (!(v > 0.0)) fail(Err::NonPositiveAmount, "amount must be positive");
}

const TokenId& require_free_priced(const LpState& s, const TokenId& tau) {
    if (tau.cls != TokenClass::Free || s.prices.count(tau.symbol) == 0)
        fail(Err::UnknownToken, tau.symbol + " is not a priced free token");
    return tau;
}

double sub_clamped(double have, double take) {
    double left = have - take;
    return left < 0.0 ? 0.0 : left; // callers verified approx_ge(have, take)
}

// Free-token debit. Unbounded wallets never fail and keep their recorded
// balance, so their books are outside any conservation statement.
void debit_free(Wallet& w, const std::string& symbol, double v) {
    if (w.unbounded_funds) return;
    double have = w.balances.get(symbol);
    if (!approx_ge(have, v))
        fail(Err::InsufficientBalance, w.owner + " holds " + std::to_string(have) + " " + symbol);
    w.balances.set(symbol, sub_clamped(have, v));
}

void credit(Wallet& w, const std::string& symbol, double v) {
    w.balances.set(symbol, w.balances.get(symbol) + v);
}

} // namespace

double exchange_rate(const LpState& s, const TokenId& tau_m) {
    const MintRegistration& reg = registration_for_minted(s, tau_m.symbol);
    if (reg.supply <= 0.0) return 1.0;
    const std::string& tau = reg.minted.underlying;
    double lent = 0.0;
    for (const auto& [agent, loans] : s.pool.loans) lent += loans.get(tau);
    return (s.pool.funds.get(tau) + lent) / reg.supply;
}

double value_lent(const LpState& s, const AgentId& a) {
    wallet_at(s, a);
    auto it = s.pool.loans.find(a);
    if (it == s.pool.loans.end()) return 0.0;
    double total = 0.0;
    for (const auto& [sym, amt] : it->second.entries()) total += amt * price_of(s, sym);
    return total;
}

double value_minted(const LpState& s, const AgentId& a) {
    const Wallet& w = wallet_at(s, a);
    double total = 0.0;
    for (const auto& [underlying, reg] : s.pool.minted) {
        double held = w.balances.get(reg.minted.symbol);
        if (held == 0.0) continue;
        total += held * exchange_rate(s, reg.minted) * price_of(s, underlying);
    }
    return total;
}

double collateralization(const LpState& s, const AgentId& a) {
    double lent = value_lent(s, a);
    if (lent <= 0.0) return std::numeric_limits<double>::infinity();
    return value_minted(s, a) / lent;
}

LpState deposit(const LpState& s, const AgentId& a, double v, const TokenId& tau) {
    wallet_at(s, a);
    require_free_priced(s, tau);
    require_positive_amount(v);

    const Wallet& w = wallet_at(s, a);
    if (!w.unbounded_funds && !approx_ge(w.balances.get(tau.symbol), v))
        fail(Err::InsufficientBalance, a + " cannot deposit " + std::to_string(v) + " " + tau.symbol);

    LpState out = s;
    if (out.pool.minted.count(tau.symbol) == 0) {
        TokenId fresh = minted_token(tau.symbol + "'", tau.symbol);
        if (is_registered_minted(out, fresh.symbol) || out.prices.count(fresh.symbol) > 0)
            fail(Err::InternalInconsistency, "symbol clash registering " + fresh.symbol);
        out.pool.minted[tau.symbol] = MintRegistration{fresh, 0.0};
    }

    MintRegistration& reg = out.pool.minted.at(tau.symbol);
    double rate = exchange_rate(out, reg.minted); // amounts still pre-state here
    double minted_units = v / rate;

    debit_free(out.wallets.at(a), tau.symbol, v);
    out.pool.funds.set(tau.symbol, out.pool.funds.get(tau.symbol) + v);
    credit(out.wallets.at(a), reg.minted.symbol, minted_units);
    reg.supply += minted_units;
    return out;
}

LpState redeem(const LpState& s, const AgentId& a, double v, const TokenId& tau_m) {
    wallet_at(s, a);
    const MintRegistration* reg = nullptr;
    for (const auto& [underlying, r] : s.pool.minted)
        if (r.minted.symbol == tau_m.symbol) reg = &r;
    if (!reg) fail(Err::NotMinted, tau_m.symbol + " is not a registered minted token");
    require_positive_amount(v);

    const std::string& tau = reg->minted.underlying;
    const Wallet& w = wallet_at(s, a);
    if (!approx_ge(w.balances.get(tau_m.symbol), v))
        fail(Err::InsufficientBalance, a + " cannot redeem " + std::to_string(v) + " " + tau_m.symbol);

    double rate = exchange_rate(s, reg->minted);
    double payout = v * rate;
    if (!approx_ge(s.pool.funds.get(tau), payout))
        fail(Err::InsufficientPoolFunds, "pool cannot pay out " + std::to_string(payout) + " " + tau);

    LpState out = s;
    Wallet& wallet = out.wallets.at(a);
    wallet.balances.set(tau_m.symbol, sub_clamped(wallet.balances.get(tau_m.symbol), v));
    MintRegistration& mreg = out.pool.minted.at(tau);
    mreg.supply = sub_clamped(mreg.supply, v);
    credit(wallet, tau, payout);
    out.pool.funds.set(tau, sub_clamped(out.pool.funds.get(tau), payout));

    if (strictly_lt(collateralization(out, a), out.params.c_min))
        fail(Err::Undercollateralized, a + " would fall below c_min by redeeming");
    return out;
}

LpState borrow(const LpState& s, const AgentId& a, double v, const TokenId& tau) {
    wallet_at(s, a);
    require_free_priced(s, tau);
    require_positive_amount(v);

    if (!approx_ge(s.pool.funds.get(tau.symbol), v))
        fail(Err::InsufficientPoolFunds, "pool cannot lend " + std::to_string(v) + " " + tau.symbol);

    LpState out = s;
    out.pool.funds.set(tau.symbol, sub_clamped(out.pool.funds.get(tau.symbol), v));
    TokenMap& loans = out.pool.loans[a];
    loans.set(tau.symbol, loans.get(tau.symbol) + v);
    credit(out.wallets.at(a), tau.symbol, v);

    if (strictly_lt(collateralization(out, a), out.params.c_min))
        fail(Err::Undercollateralized, a + " would fall below c_min by borrowing");
    return out;
}

LpState repay(const LpState& s, const AgentId& a, double v, const TokenId& tau) {
    wallet_at(s, a);
    require_free_priced(s, tau);
    require_positive_amount(v);

    const Wallet& w = wallet_at(s, a);
    if (!w.unbounded_funds && !approx_ge(w.balances.get(tau.symbol), v))
        fail(Err::InsufficientBalance, a + " cannot repay " + std::to_string(v) + " " + tau.symbol);

    auto loans_it = s.pool.loans.find(a);
    double owed = loans_it == s.pool.loans.end() ? 0.0 : loans_it->second.get(tau.symbol);
    if (!approx_ge(owed, v)) fail(Err::ExceedsLoan, a + " owes only " + std::to_string(owed) + " " + tau.symbol);

    LpState out = s;
    debit_free(out.wallets.at(a), tau.symbol, v);
    TokenMap& loans = out.pool.loans[a];
    loans.set(tau.symbol, sub_clamped(loans.get(tau.symbol), v));
    out.pool.funds.set(tau.symbol, out.pool.funds.get(tau.symbol) + v);
    return out;
}

LpState liquidate(const LpState& s, const AgentId& liquidator, const AgentId& borrower,
                  double v, const TokenId& tau_hat, const TokenId& tau_m) {
    wallet_at(s, liquidator);
    wallet_at(s, borrower);
    require_free_priced(s, tau_hat);
    require_positive_amount(v);

    if (!is_registered_minted(s, tau_m.symbol))
        fail(Err::NotMinted, tau_m.symbol + " is not a registered minted token");
    const MintRegistration& reg = registration_for_minted(s, tau_m.symbol);
    const std::string& tau = reg.minted.underlying;

    const Wallet& liq = wallet_at(s, liquidator);
    if (!liq.unbounded_funds && !approx_ge(liq.balances.get(tau_hat.symbol), v))
        fail(Err::InsufficientBalance,
             liquidator + " holds " + std::to_string(liq.balances.get(tau_hat.symbol)) + " " + tau_hat.symbol);

    auto loans_it = s.pool.loans.find(borrower);
    double owed = loans_it == s.pool.loans.end() ? 0.0 : loans_it->second.get(tau_hat.symbol);
    if (!approx_ge(owed * s.params.max_liq, v))
        fail(Err::ExceedsMaxLiq, "repayment above max_liq share of the " + tau_hat.symbol + " loan");

    double seized = v * (price_of(s, tau_hat.symbol) / price_of(s, tau)) * s.params.r_liq;
    if (!approx_ge(wallet_at(s, borrower).balances.get(tau_m.symbol), seized))
        fail(Err::InsufficientCollateralHeld,
             borrower + " holds too little " + tau_m.symbol + " to seize " + std::to_string(seized));

    if (!strictly_lt(collateralization(s, borrower), s.params.c_min))
        fail(Err::BorrowerSafe, borrower + " is not below c_min");

    LpState out = s;
    out.pool.funds.set(tau_hat.symbol, out.pool.funds.get(tau_hat.symbol) + v);
    TokenMap& loans = out.pool.loans[borrower];
    loans.set(tau_hat.symbol, sub_clamped(loans.get(tau_hat.symbol), v));
    debit_free(out.wallets.at(liquidator), tau_hat.symbol, v);
    credit(out.wallets.at(liquidator), reg.minted.symbol, seized);
    Wallet& victim = out.wallets.at(borrower);
    victim.balances.set(tau_m.symbol, sub_clamped(victim.balances.get(tau_m.symbol), seized));

    if (!approx_le(collateralization(out, borrower), out.params.c_min))
        fail(Err::OverLiquidation, "repayment would push " + borrower + " above c_min");
    return out;
}

LpState accrue_interest(const LpState& s) {
    LpState out = s;
    for (auto& [agent, loans] : out.pool.loans)
        for (const auto& [sym, amt] : loans.entries()) loans.set(sym, amt * (1.0 + s.params.interest_rate));
    return out;
}

LpState update_prices(const LpState& s, const std::map<std::string, double>& new_prices) {
    if (new_prices.size() != s.prices.size()) fail(Err::DomainMismatch, "price domains differ");
    for (const auto& [sym, price] : new_prices)
        if (s.prices.count(sym) == 0) fail(Err::DomainMismatch, "price for unknown token " + sym);
    for (const auto& [sym, price] : new_prices)
        if (!(price > 0.0)) fail(Err::NonPositivePrice, "price of " + sym + " must be positive");
    LpState out = s;
    out.prices = new_prices;
    return out;
}

LpState apply_action(const LpState& s, const Action& a) {
    switch (a.kind) {
        case ActionKind::Deposit: return deposit(s, a.agent, a.amount, free_token(a.token));
        case ActionKind::Redeem: {
            TokenId tau_m{a.token, TokenClass::Minted, {}};
            return redeem(s, a.agent, a.amount, tau_m);
        }
        case ActionKind::Borrow: return borrow(s, a.agent, a.amount, free_token(a.token));
        case ActionKind::Repay: return repay(s, a.agent, a.amount, free_token(a.token));
        case ActionKind::Liquidate: {
            TokenId tau_m{a.seize_token, TokenClass::Minted, {}};
            return liquidate(s, a.agent, a.borrower, a.amount, free_token(a.token), tau_m);
        }
        case ActionKind::Interest: return accrue_interest(s);
        case ActionKind::Price: return update_prices(s, a.prices);
    }
    fail(Err::InternalInconsistency, "unhandled action kind");
}

const char* action_name(ActionKind k) {
    switch (k) {
        case ActionKind::Deposit: return "deposit";
        case ActionKind::Redeem: return "redeem";
        case ActionKind::Borrow: return "borrow";
        case ActionKind::Repay: return "repay";
        case ActionKind::Liquidate: return "liquidate";
        case ActionKind::Interest: return "interest";
        case ActionKind::Price: return "price";
    }
    return "unknown";
}

} // namespace lendpool
