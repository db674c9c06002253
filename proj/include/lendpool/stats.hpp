#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lendpool/gbm.hpp"
#include "lendpool/state.hpp"

namespace lendpool {

struct StatsParams {
    double alpha = 0.05;  // CI level is 1 - alpha
    double delta = 0.1;   // stop once the full CI width is at most delta
    int n_min = 30;
    int n_max = 5010;
    int block = 30;       // convergence is re-checked every `block` samples
    double c_cap = 10.0;  // infinite collateralization recorded as this
};

struct CiEstimate {
    double mean = 0.0;
    double half_width = 0.0; // Student-t (1 - alpha) half width
    int n = 0;
    double alpha = 0.05;
    bool converged = false;  // 2 * half_width <= delta at the final n
};

// Sequential mean estimation: draws sampler(0), sampler(1), ... in blocks and
// stops at the first checkpoint (n_min, then every `block`) where the full CI
// width reaches delta, or at n_max.
CiEstimate estimate_mean(const std::function<double(int)>& sampler, double alpha, double delta,
                         int n_min, int n_max, int block);

// Per-borrower, per-round capped collateralization of one simulated horizon.
struct ObservableMatrix {
    std::vector<AgentId> borrowers;
    int rounds = 0; // row length is rounds + 1, round 0 is the initial state

    std::vector<double> values;

    double at(size_t borrower, int round) const {
        return values[borrower * (static_cast<size_t>(rounds) + 1) + static_cast<size_t>(round)];
    }
};

struct SimulationResult {
    ObservableMatrix observables;
    LpState final_state;
    int liquidation_count = 0;
    PricePath path;
};

// One seeded run: per round the prices move along a generated path, interest
// accrues, then every liquidator in turn executes its selected liquidation.
// Observed agents are all wallets except the liquidators, in id order.
// Invariant violations surface as SimulationFault.
SimulationResult run_simulation(const ScenarioSpec& spec, const LpState& init,
                                const std::vector<AgentId>& liquidators, uint64_t seed,
                                double c_cap);

// (c_min, r_liq) pairs in tenths: c_min 1.2..1.5 crossed with r_liq from 1.1
// up to c_min - 0.1. Bounds are kept in integer tenths so grid enumeration
// and CSV labels are exact.
std::vector<std::pair<int, int>> grid_cells(int c_min_lo_deci, int c_min_hi_deci,
                                            int r_liq_lo_deci, int step_deci = 1);

// One grid cell ready to run: the scenario, the initial state built for the
// cell's parameters, and the liquidator order.
struct CellTask {
    std::string scenario;
    int c_min_deci = 0;
    int r_liq_deci = 0;
    ScenarioSpec spec;
    LpState init;
    std::vector<AgentId> liquidators;
};

struct SweepCell {
    std::string scenario;
    int c_min_deci = 0;
    int r_liq_deci = 0;
    std::vector<AgentId> borrowers;
    int rounds = 0;
    int n = 0;
    std::vector<CiEstimate> estimates; // borrower-major, rounds + 1 per borrower

    const CiEstimate& at(size_t borrower, int round) const {
        return estimates[borrower * (static_cast<size_t>(rounds) + 1) + static_cast<size_t>(round)];
    }

    // Smallest per-round mean for one borrower.
    double min_mean(size_t borrower) const;
};

// Runs every cell until each (borrower, round) estimate converges or n_max is
// reached. Simulation i of cell c draws seed derive_seed(base_seed, c, i), so
// no two simulations anywhere in the sweep share a seed and the result is a
// pure function of (cells, params, base_seed) regardless of thread count.
std::vector<SweepCell> sweep(const std::vector<CellTask>& cells, const StatsParams& params,
                             uint64_t base_seed, int threads);

// results CSV: one row per (cell, borrower, round), 9 significant digits.
std::string sweep_csv(const std::vector<SweepCell>& cells);

std::string format_sig9(double v);
std::string format_deci(int deci);

} // namespace lendpool
