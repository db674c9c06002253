#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lendpool/stats.hpp"

namespace lendpool {

// Per-asset price model; when csv is non-empty, mu and sigma are re-estimated
// from that file (resolved against the fixtures directory) and p0 is kept.
struct AssetSpec {
    GbmParams gbm;
    std::string csv;
};

struct GridBounds {
    int c_min_lo_deci = 12; // 1.2
    int c_min_hi_deci = 15; // 1.5
    int r_liq_lo_deci = 11; // 1.1, upper bound per c_min is c_min - 0.1
    int step_deci = 1;
};

struct BorrowerLadder {
    int count = 10;
    double c_start = 1.0;
    double c_step = 0.1;
    double loan_value_usd = 10000.0;
};

// Every field has a default; an empty config file runs the full experiment.
struct ExperimentConfig {
    std::vector<std::string> scenarios = {"eth-wbtc", "eth-usdc", "usdc-wbtc"};
    GridBounds grid;
    StatsParams stats;
    double max_liq = 0.5;
    double interest_rate = 0.0;
    BorrowerLadder borrowers;
    int liquidators = 3;
    uint64_t seed = 1;
    int horizon = 91;
    double rho = -1.0;
    std::string fixtures_dir = "fixtures";
    std::string output = "results.csv";
    std::map<std::string, AssetSpec> assets; // keyed by symbol, e.g. "ETH"
};

ExperimentConfig default_config();

// Reads a JSON config; a missing value falls back to its default, an unknown
// key is a ValidationError and an empty file yields the defaults. The
// LENDPOOL_FIXTURES environment variable overrides fixtures_dir.
ExperimentConfig load_config(const std::string& path);

void validate_config(const ExperimentConfig& cfg);

std::string config_to_json(const ExperimentConfig& cfg);

std::string resolved_fixtures_dir(const ExperimentConfig& cfg);

// "date,close" rows with strictly ascending ISO dates and positive closes.
std::vector<double> load_close_csv(const std::string& path);

// Asset params with any configured CSV re-estimation applied.
GbmParams resolved_asset_params(const ExperimentConfig& cfg, const std::string& symbol);

// Scenario names have the shape "<collateral>-<loan>" over configured assets,
// e.g. "eth-wbtc".
ScenarioSpec make_scenario(const ExperimentConfig& cfg, const std::string& name);

// Borrowers b01..bNN hold one loan of loan_value_usd (in the scenario's loan
// token) and minted collateral placing them at c_start, c_start + c_step, ...;
// pool funds and minted supply are seeded so the exchange rate starts at
// exactly 1. Liquidators l01.. have unbounded funds.
LpState build_initial_state(const ExperimentConfig& cfg, const ScenarioSpec& spec,
                            double c_min, double r_liq);

std::vector<AgentId> borrower_ids(const ExperimentConfig& cfg);
std::vector<AgentId> liquidator_ids(const ExperimentConfig& cfg);

// Cell tasks for the configured scenarios crossed with the configured grid.
std::vector<CellTask> cell_tasks(const ExperimentConfig& cfg);

// Same, with an explicit scenario subset and cell list (CLI overrides).
std::vector<CellTask> cell_tasks(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& scenario_names,
                                 const std::vector<std::pair<int, int>>& cells);

// "1.5:1.1,1.4:1.1" -> {(15, 11), (14, 11)}
std::vector<std::pair<int, int>> parse_cell_list(const std::string& arg);

int to_deci(double v); // exact multiple-of-0.1 check

} // namespace lendpool
