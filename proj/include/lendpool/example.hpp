#pragma once

#include <string>
#include <vector>

#include "lendpool/ops.hpp"

namespace lendpool::example {

// Hand-checked reference scenario: two priced tokens t0/t1 (both at 1), three
// borrowers A/B/C at collateralization 1.25 / 1.0 / 0.8 and a liquidator D,
// with c_min = 1.5, r_liq = 1.1, max_liq = 1. D liquidates A with the exact
// restoring amount (50) and drains B and C entirely (1000/11 each). The three
// liquidations commute, so all six execution orders reach the same final
// state; every intermediate state is pinned numerically below.

LpState initial_state();

// The three liquidations in borrower order A, B, C.
std::vector<Action> liquidation_actions();

// One pinned state of the walkthrough: the amounts below are derived by hand
// from the transition definitions (never by running the code under test).
struct RefState {
    std::string key; // which borrowers have been liquidated, e.g. "", "A", "BC"
    double pool_t1;
    double loan_a, loan_b, loan_c; // t1 loan entries
    double a_m0, b_m0, c_m0;       // borrowers' minted t0' balances
    double d_t1, d_m0;             // liquidator's t1 and t0' balances
    double c_a, c_b, c_c;          // collateralization of A, B, C
};

const std::vector<RefState>& expected_states();

// The same states as published, rounded to integers. Two d_t1 cells in the
// published rows (keys "B" and "C") contradict the funds column of their own
// row under token conservation; for those the conservation-consistent value
// is used and the cell is counted as corrected.
struct PrintedCheck {
    int cells_checked = 0;
    int cells_ok = 0;
    int cells_corrected = 0;
    std::string first_failure;
};

PrintedCheck check_against_printed_rows();

struct ReplayReport {
    int orders_total = 0;
    int orders_converged = 0;    // orders whose final state matches key "ABC"
    int states_checked = 0;
    int states_ok = 0;           // intermediate states matching the pinned values
    PrintedCheck printed;
    std::string first_failure;
    bool ok() const {
        return orders_converged == orders_total && states_ok == states_checked &&
               printed.cells_ok == printed.cells_checked;
    }
};

ReplayReport run_replay();

// Tolerant state comparison over the union of agents, tokens and entries.
bool states_close(const LpState& a, const LpState& b, double rel_tol);

} // namespace lendpool::example
