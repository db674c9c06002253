#include "lendpool/state.hpp"

#include <cmath>

namespace lendpool {

const char* err_name(Err e) {
    switch (e) {
        case Err::UndefinedResult: return "UndefinedResult";
        case Err::UnknownToken: return "UnknownToken";
        case Err::UnknownAgent: return "UnknownAgent";
        case Err::NotMinted: return "NotMinted";
        case Err::NonPositiveAmount: return "NonPositiveAmount";
        case Err::InsufficientBalance: return "InsufficientBalance";
        case Err::InsufficientPoolFunds: return "InsufficientPoolFunds";
        case Err::Undercollateralized: return "Undercollateralized";
        case Err::ExceedsLoan: return "ExceedsLoan";
        case Err::ExceedsMaxLiq: return "ExceedsMaxLiq";
        case Err::InsufficientCollateralHeld: return "InsufficientCollateralHeld";
        case Err::BorrowerSafe: return "BorrowerSafe";
        case Err::OverLiquidation: return "OverLiquidation";
        case Err::IllPosed: return "IllPosed";
        case Err::NoRepayableLoan: return "NoRepayableLoan";
        case Err::DomainMismatch: return "DomainMismatch";
        case Err::NonPositivePrice: return "NonPositivePrice";
        case Err::TooShort: return "TooShort";
        case Err::InvalidGrid: return "InvalidGrid";
        case Err::ConfigInvalid: return "ConfigInvalid";
        case Err::ParseError: return "ParseError";
        case Err::ValidationError: return "ValidationError";
        case Err::InternalInconsistency: return "InternalInconsistency";
        case Err::SimulationFault: return "SimulationFault";
    }
    return "UnknownError";
}

TokenMap map_apply(const TokenMap& f, const std::function<double(double, double)>& op,
                   double v, const TokenId& tau) {
    TokenMap out = f;
    if (!f.contains(tau.symbol)) {
        out.set(tau.symbol, v);
        return out;
    }
    double combined = op(f.get(tau.symbol), v);
    if (std::isnan(combined) || strictly_lt(combined, 0.0))
        fail(Err::UndefinedResult, "combining " + tau.symbol + " would leave a negative amount");
    out.set(tau.symbol, combined < 0.0 ? 0.0 : combined);
    return out;
}

bool is_registered_minted(const LpState& s, const std::string& symbol) {
    for (const auto& [underlying, reg] : s.pool.minted)
        if (reg.minted.symbol == symbol) return true;
    return false;
}

const MintRegistration& registration_for_minted(const LpState& s, const std::string& minted_symbol) {
    for (const auto& [underlying, reg] : s.pool.minted)
        if (reg.minted.symbol == minted_symbol) return reg;
    fail(Err::UnknownToken, "no minted token " + minted_symbol + " registered");
}

const std::string& underlying_of(const LpState& s, const std::string& minted_symbol) {
    return registration_for_minted(s, minted_symbol).minted.underlying;
}

double price_of(const LpState& s, const std::string& free_symbol) {
    auto it = s.prices.find(free_symbol);
    if (it == s.prices.end()) fail(Err::UnknownToken, "no price for " + free_symbol);
    return it->second;
}

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) fail(Err::InternalInconsistency, "state invariant violated: " + what);
}

} // namespace

void validate(const LpState& s) {
    const LpParams& p = s.params;
    require(p.c_min > 1.0, "c_min must exceed 1");
    require(p.r_liq >= 1.0 && p.r_liq < p.c_min, "r_liq must lie in [1, c_min)");
    require(p.max_liq > 0.0 && p.max_liq <= 1.0, "max_liq must lie in (0, 1]");
    require(p.interest_rate >= 0.0, "interest_rate must be non-negative");

    for (const auto& [sym, price] : s.prices) require(price > 0.0, "price of " + sym);

    for (const auto& [sym, amt] : s.pool.funds.entries()) {
        require(amt >= 0.0, "pool funds of " + sym);
        require(s.prices.count(sym) > 0, "pool funds of unpriced token " + sym);
    }

    for (const auto& [agent, loans] : s.pool.loans)
        for (const auto& [sym, amt] : loans.entries()) {
            require(amt >= 0.0, "loan of " + sym + " to " + agent);
            require(s.prices.count(sym) > 0, "loan in unpriced token " + sym);
        }

    for (const auto& [agent, w] : s.wallets)
        for (const auto& [sym, amt] : w.balances.entries()) require(amt >= 0.0, agent + " balance of " + sym);

    // Minted registry: distinct symbols, free priced underlyings, supply equal
    // to the column sum over wallets.
    for (const auto& [underlying, reg] : s.pool.minted) {
        require(reg.minted.cls == TokenClass::Minted, reg.minted.symbol + " registered as minted");
        require(reg.minted.underlying == underlying, "registry key mismatch for " + reg.minted.symbol);
        require(s.prices.count(underlying) > 0, "unpriced underlying " + underlying);
        require(s.prices.count(reg.minted.symbol) == 0, "minted token " + reg.minted.symbol + " must not be priced");
        require(reg.supply >= 0.0, "supply of " + reg.minted.symbol);

        double held = 0.0;
        for (const auto& [agent, w] : s.wallets) held += w.balances.get(reg.minted.symbol);
        double scale = std::max({1.0, held, reg.supply});
        require(std::abs(held - reg.supply) <= kRelTol * scale,
                "supply of " + reg.minted.symbol + " out of sync with wallets");
    }
}

} // namespace lendpool
