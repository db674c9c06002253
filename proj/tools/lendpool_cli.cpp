// Command-line front end: single simulations, parameter estimation, the full
// (CMin, Rliq) sweep and the built-in reference-scenario replay.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lendpool/example.hpp"
#include "lendpool/scenario.hpp"

namespace lp = lendpool;

namespace {

lp::ExperimentConfig load_or_default(const std::string& path) {
    if (path.empty()) return lp::default_config();
    return lp::load_config(path);
}

// "-" writes to stdout.
void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) lp::fail(lp::Err::ValidationError, "cannot open " + path + " for writing");
    out << text;
    out.flush();
    if (!out) lp::fail(lp::Err::ValidationError, "write to " + path + " failed");
}

std::string simulation_csv(const lp::ScenarioSpec& spec, const lp::SimulationResult& r) {
    std::ostringstream out;
    out << "round,price_" << spec.collateral_token.symbol << ",price_" << spec.loan_token.symbol;
    for (const lp::AgentId& b : r.observables.borrowers) out << ",c_" << b;
    out << "\n";
    for (int round = 0; round <= r.observables.rounds; ++round) {
        out << round << ',' << lp::format_sig9(r.path[static_cast<size_t>(round)].collateral)
            << ',' << lp::format_sig9(r.path[static_cast<size_t>(round)].loan);
        for (size_t b = 0; b < r.observables.borrowers.size(); ++b)
            out << ',' << lp::format_sig9(r.observables.at(b, round));
        out << "\n";
    }
    return out.str();
}

struct SimulateArgs {
    std::string config;
    std::string scenario = "eth-usdc";
    double c_min = 1.5;
    double r_liq = 1.1;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string out = "-";
};

int run_simulate(const SimulateArgs& a) {
    lp::ExperimentConfig cfg = load_or_default(a.config);
    lp::ScenarioSpec spec = lp::make_scenario(cfg, a.scenario);
    lp::LpState init = lp::build_initial_state(cfg, spec, a.c_min, a.r_liq);
    uint64_t seed = a.seed_set ? a.seed : cfg.seed;

    lp::SimulationResult r =
        lp::run_simulation(spec, init, lp::liquidator_ids(cfg), seed, cfg.stats.c_cap);
    write_text(a.out, simulation_csv(spec, r));
    if (a.out != "-")
        std::printf("wrote %s (%d rounds, %d liquidations)\n", a.out.c_str(),
                    r.observables.rounds, r.liquidation_count);
    return 0;
}

struct EstimateArgs {
    std::string csv;
    double p0 = 0.0;
    bool p0_set = false;
};

int run_estimate(const EstimateArgs& a) {
    std::vector<double> closes = lp::load_close_csv(a.csv);
    double p0 = a.p0_set ? a.p0 : closes.back();
    lp::GbmParams g = lp::estimate_params(closes, p0);
    std::printf("samples %zu\n", closes.size());
    std::printf("mu %s\n", lp::format_sig9(g.mu).c_str());
    std::printf("sigma %s\n", lp::format_sig9(g.sigma).c_str());
    std::printf("p0 %s\n", lp::format_sig9(g.p0).c_str());
    return 0;
}

struct SweepArgs {
    std::string config;
    std::vector<std::string> scenarios;
    std::string grid;
    std::string out;
    uint64_t seed = 0;
    bool seed_set = false;
    double delta = 0.0;
    bool delta_set = false;
    double alpha = 0.0;
    bool alpha_set = false;
    int max_sims = 0;
    bool max_sims_set = false;
    int threads = 0;
};

int run_sweep(const SweepArgs& a) {
    lp::ExperimentConfig cfg = load_or_default(a.config);
    if (a.seed_set) cfg.seed = a.seed;
    if (a.delta_set) cfg.stats.delta = a.delta;
    if (a.alpha_set) cfg.stats.alpha = a.alpha;
    if (a.max_sims_set) {
        cfg.stats.n_max = a.max_sims;
        cfg.stats.n_min = std::min(cfg.stats.n_min, a.max_sims);
    }
    if (!a.out.empty()) cfg.output = a.out;
    if (!a.scenarios.empty()) cfg.scenarios = a.scenarios;
    lp::validate_config(cfg);

    std::vector<lp::CellTask> tasks =
        a.grid.empty() ? lp::cell_tasks(cfg)
                       : lp::cell_tasks(cfg, cfg.scenarios, lp::parse_cell_list(a.grid));

    std::vector<lp::SweepCell> result = lp::sweep(tasks, cfg.stats, cfg.seed, a.threads);

    size_t rows = 0;
    for (const lp::SweepCell& cell : result) {
        bool converged = true;
        for (const lp::CiEstimate& e : cell.estimates) converged = converged && e.converged;
        std::printf("%-10s c_min=%s r_liq=%s sims=%d converged=%s\n", cell.scenario.c_str(),
                    lp::format_deci(cell.c_min_deci).c_str(),
                    lp::format_deci(cell.r_liq_deci).c_str(), cell.n, converged ? "yes" : "no");
        rows += cell.estimates.size();
    }
    write_text(cfg.output, lp::sweep_csv(result));
    if (cfg.output != "-") std::printf("wrote %s (%zu data rows)\n", cfg.output.c_str(), rows);
    return 0;
}

int run_replay() {
    lp::example::ReplayReport rep = lp::example::run_replay();
    std::printf("orders converging to the common final state: %d/%d\n", rep.orders_converged,
                rep.orders_total);
    std::printf("intermediate states matching the pinned walkthrough: %d/%d\n", rep.states_ok,
                rep.states_checked);
    std::printf("published cells: %d checked, %d ok, %d corrected\n", rep.printed.cells_checked,
                rep.printed.cells_ok, rep.printed.cells_corrected);
    if (!rep.ok()) {
        std::cerr << "error: InternalInconsistency: replay diverged: " << rep.first_failure
                  << "\n";
        return 1;
    }
    std::printf("PASS\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lending-pool liquidation simulator and statistics harness"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "Run one seeded simulation and emit a per-round CSV");
    sim->add_option("--config", sim_args.config, "JSON config path (defaults apply when omitted)");
    sim->add_option("--scenario", sim_args.scenario, "scenario name, e.g. eth-wbtc")
        ->capture_default_str();
    sim->add_option("--c-min", sim_args.c_min, "collateralization floor")->capture_default_str();
    sim->add_option("--r-liq", sim_args.r_liq, "liquidation reward factor")->capture_default_str();
    sim->add_option("--seed", sim_args.seed, "simulation seed (default: config seed)")
        ->each([&](const std::string&) { sim_args.seed_set = true; });
    sim->add_option("--out", sim_args.out, "output path, - for stdout")->capture_default_str();

    EstimateArgs est_args;
    CLI::App* est = app.add_subcommand("estimate-params",
                                       "Estimate drift and volatility from a date,close CSV");
    est->add_option("csv", est_args.csv, "price history CSV")->required();
    est->add_option("--p0", est_args.p0, "initial price override (default: last close)")
        ->each([&](const std::string&) { est_args.p0_set = true; });

    SweepArgs sweep_args;
    CLI::App* swp = app.add_subcommand("sweep", "Run the grid experiment and write the results CSV");
    swp->add_option("--config", sweep_args.config, "JSON config path (defaults apply when omitted)");
    swp->add_option("--scenario", sweep_args.scenarios, "scenario subset (repeatable)");
    swp->add_option("--grid", sweep_args.grid, "explicit cells, e.g. 1.5:1.1,1.4:1.1");
    swp->add_option("--out", sweep_args.out, "results CSV path, - for stdout");
    swp->add_option("--seed", sweep_args.seed, "base seed")
        ->each([&](const std::string&) { sweep_args.seed_set = true; });
    swp->add_option("--delta", sweep_args.delta, "target full CI width")
        ->each([&](const std::string&) { sweep_args.delta_set = true; });
    swp->add_option("--alpha", sweep_args.alpha, "CI significance level")
        ->each([&](const std::string&) { sweep_args.alpha_set = true; });
    swp->add_option("--max-sims", sweep_args.max_sims, "per-cell simulation cap")
        ->each([&](const std::string&) { sweep_args.max_sims_set = true; });
    swp->add_option("--threads", sweep_args.threads, "worker threads (0 = all cores)");

    CLI::App* rep = app.add_subcommand("replay-example",
                                       "Replay the reference scenario in all execution orders");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(sim_args);
        if (est->parsed()) return run_estimate(est_args);
        if (swp->parsed()) return run_sweep(sweep_args);
        if (rep->parsed()) return run_replay();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
