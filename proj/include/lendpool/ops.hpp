#pragma once

#include <utility>
#include <vector>

#include "lendpool/state.hpp"

namespace lendpool {

// ------------------------------------------------------------------
// State observation
// ------------------------------------------------------------------

// Units of τ one unit of the minted token τ′ redeems for:
// (pool funds of τ + total outstanding loans of τ) / supply(τ′), and 1 while
// nothing has been minted yet.
double exchange_rate(const LpState& s, const TokenId& tau_m);

// Sum over the agent's loan entries, valued at current prices.
double value_lent(const LpState& s, const AgentId& a);

// Sum over the agent's minted-token holdings, each converted through its
// exchange rate and the underlying's price.
double value_minted(const LpState& s, const AgentId& a);

// value_minted / value_lent; +infinity when the agent has no debt.
double collateralization(const LpState& s, const AgentId& a);

// ------------------------------------------------------------------
// Transitions. All are pure: the input state is never modified, a new state
// is returned on success and an LpError is thrown on the first violated
// precondition.
// ------------------------------------------------------------------

// Agent hands v units of free τ to the pool and receives v / ER(τ′,τ) freshly
// minted τ′ (the rate is read on the pre-state). First deposit of a new τ
// registers its minted counterpart.
LpState deposit(const LpState& s, const AgentId& a, double v, const TokenId& tau);

// Agent burns v units of minted τ′ for v·ER units of the underlying. The
// agent must stay at or above c_min afterwards.
LpState redeem(const LpState& s, const AgentId& a, double v, const TokenId& tau_m);

// Agent takes v units of free τ from the pool as debt; the post-state
// collateralization must be at least c_min.
LpState borrow(const LpState& s, const AgentId& a, double v, const TokenId& tau);

// Agent returns v units of free τ against its own loan entry.
LpState repay(const LpState& s, const AgentId& a, double v, const TokenId& tau);

// Liquidator repays v units of free τ̂ of the borrower's debt and seizes
// v · (p(τ̂)/p(τ)) · r_liq units of the borrower's minted τ′ (τ = underlying
// of τ′). Requires the borrower below c_min before and at most c_min after.
LpState liquidate(const LpState& s, const AgentId& liquidator, const AgentId& borrower,
                  double v, const TokenId& tau_hat, const TokenId& tau_m);

// Multiplies every loan entry by (1 + interest_rate).
LpState accrue_interest(const LpState& s);

// Replaces the whole price map; the new domain must match the old one exactly.
LpState update_prices(const LpState& s, const std::map<std::string, double>& new_prices);

// ------------------------------------------------------------------
// Actions and traces
// ------------------------------------------------------------------

enum class ActionKind { Deposit, Redeem, Borrow, Repay, Liquidate, Interest, Price };

struct Action {
    ActionKind kind = ActionKind::Interest;
    AgentId agent;                        // acting agent (liquidator for Liquidate)
    AgentId borrower;                     // Liquidate only
    double amount = 0.0;
    std::string token;                    // τ for Dep/Rdm/Bor/Rep, τ̂ for Liquidate
    std::string seize_token;              // τ′ for Liquidate
    std::map<std::string, double> prices; // Price only
};

using Trace = std::vector<std::pair<Action, LpState>>;

LpState apply_action(const LpState& s, const Action& a);

const char* action_name(ActionKind k);

} // namespace lendpool
