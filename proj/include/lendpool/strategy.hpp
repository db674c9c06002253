#pragma once

#include <optional>
#include <vector>

#include "lendpool/ops.hpp"

namespace lendpool {

struct LiquidationPlan {
    AgentId borrower;
    double repay_amount = 0.0;       // v, in units of repay_token
    TokenId repay_token;             // τ̂, a loan entry of the borrower
    TokenId seize_token;             // τ′, a minted token the borrower holds
    double expected_seize_value = 0.0; // v · p(τ̂) · r_liq

    friend bool operator==(const LiquidationPlan&, const LiquidationPlan&) = default;
};

// Repayment in τ̂ that lifts the borrower exactly back to c_min:
//   (c_min · V_lent − V_minted) / (p(τ̂) · (c_min − r_liq · ER(τ′,τ)))
// Ill-posed when r_liq · ER reaches c_min: no repayment can restore then, every
// liquidation only drags the borrower further down.
double restoring_repay_amount(const LpState& s, const AgentId& borrower,
                              const TokenId& tau_hat, const TokenId& tau_m);

// Largest admissible repayment for the triple: the max_liq share of the loan
// entry, the borrower's seizable collateral, the liquidator's own funds
// (unless unbounded), and the restoring amount where that is well-posed.
// A self-liquidation hands the seized collateral straight back, so its
// restoring amount is computed with a zero reward leg.
// Throws NoRepayableLoan when nothing positive remains.
double max_seizable_repay_amount(const LpState& s, const AgentId& liquidator,
                                 const AgentId& borrower, const TokenId& tau_hat,
                                 const TokenId& tau_m);

// Rational one-shot choice: over every borrower below c_min and every
// (loan entry, held minted token) pair, pick the plan with the largest seized
// value v · p(τ̂) · r_liq. Ties fall to the smallest borrower id, then repay
// token, then seize token. Empty when no liquidation is admissible.
std::optional<LiquidationPlan> select_plan(const LpState& s, const AgentId& liquidator);

// One round: each liquidator in turn re-plans against the current state and
// executes its plan if any. Returns the resulting state and the executed
// liquidations in order.
std::pair<LpState, std::vector<Action>> liquidation_round(const LpState& s,
                                                          const std::vector<AgentId>& liquidators);

} // namespace lendpool
