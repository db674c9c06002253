#pragma once

#include <algorithm>
#include <map>
#include <string>

#include "lendpool/tokens.hpp"

namespace lendpool {

// Comparison tolerance for amounts and collateralization thresholds. All
// precondition checks treat values closer than this (relative) as equal, so a
// liquidation computed to exactly exhaust a balance is not rejected over a
// final-ulp rounding.
inline constexpr double kRelTol = 1e-9;

inline bool approx_ge(double a, double b) {
    return a >= b - kRelTol * std::max({1.0, a < 0 ? -a : a, b < 0 ? -b : b});
}

inline bool approx_le(double a, double b) { return approx_ge(b, a); }

// Strict comparison used for "undercollateralized": true only when a is below
// b by more than the tolerance.
inline bool strictly_lt(double a, double b) { return !approx_ge(a, b); }

struct Wallet {
    AgentId owner;
    TokenMap balances;
    // Liquidators in the experiments have effectively infinite funds: debits
    // of free tokens never fail and leave the recorded balance untouched.
    bool unbounded_funds = false;

    friend bool operator==(const Wallet&, const Wallet&) = default;
};

struct MintRegistration {
    TokenId minted;
    double supply = 0.0;

    friend bool operator==(const MintRegistration&, const MintRegistration&) = default;
};

struct Pool {
    TokenMap funds;                                   // free tokens held by the pool
    std::map<AgentId, TokenMap> loans;                // outstanding free-token debt per agent
    std::map<std::string, MintRegistration> minted;   // keyed by the underlying free symbol

    friend bool operator==(const Pool&, const Pool&) = default;
};

struct LpParams {
    double c_min = 1.5;         // collateralization floor, > 1
    double r_liq = 1.1;         // liquidation reward factor, in [1, c_min)
    double max_liq = 0.5;       // max repayable fraction of one loan entry per liquidation
    double interest_rate = 0.0; // per-round multiplicative loan growth

    friend bool operator==(const LpParams&, const LpParams&) = default;
};

struct LpState {
    std::map<AgentId, Wallet> wallets;
    Pool pool;
    std::map<std::string, double> prices; // free-token symbol -> positive price
    LpParams params;

    friend bool operator==(const LpState&, const LpState&) = default;
};

// Structural well-formedness: non-negative amounts, positive prices covering
// all pool funds, registered minted tokens with free underlyings, and minted
// supply equal to the wallet column sums. Throws on violation.
void validate(const LpState& s);

// Lookup helpers over the minted registry; throw UnknownToken/NotMinted when
// the symbol is not registered.
const MintRegistration& registration_for_minted(const LpState& s, const std::string& minted_symbol);
const std::string& underlying_of(const LpState& s, const std::string& minted_symbol);
bool is_registered_minted(const LpState& s, const std::string& symbol);

double price_of(const LpState& s, const std::string& free_symbol);

} // namespace lendpool
