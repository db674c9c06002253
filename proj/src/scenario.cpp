#include "lendpool/scenario.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lendpool/ops.hpp"

namespace lendpool {

using nlohmann::json;

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.assets["ETH"] = AssetSpec{GbmParams{-0.012, 0.12, 3269.08}, ""};
    cfg.assets["USDC"] = AssetSpec{GbmParams{-7.84e-5, 0.005, 0.99}, ""};
    cfg.assets["WBTC"] = AssetSpec{GbmParams{0.012, 0.094, 57260.0}, ""};
    return cfg;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) fail(Err::ValidationError, "unknown key '" + it.key() + "' in " + ctx);
    }
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(Err::ValidationError, std::string("wrong type for '") + key + "'");
    }
}

void read_deci(const json& j, const char* key, int& out_deci) {
    if (!j.contains(key)) return;
    double v = 0.0;
    read_into(j, key, v);
    out_deci = to_deci(v);
}

std::pair<std::string, std::string> scenario_assets(const ExperimentConfig& cfg,
                                                    const std::string& name) {
    auto dash = name.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= name.size())
        fail(Err::ValidationError, "scenario '" + name + "' is not of the form <collateral>-<loan>");
    std::string col = lower(name.substr(0, dash));
    std::string loan = lower(name.substr(dash + 1));
    std::string col_sym, loan_sym;
    for (const auto& [sym, asset] : cfg.assets) {
        if (lower(sym) == col) col_sym = sym;
        if (lower(sym) == loan) loan_sym = sym;
    }
    if (col_sym.empty() || loan_sym.empty())
        fail(Err::ValidationError, "scenario '" + name + "' names an unconfigured asset");
    if (col_sym == loan_sym)
        fail(Err::ValidationError, "scenario '" + name + "' must use two distinct assets");
    return {col_sym, loan_sym};
}

std::string pad_id(const std::string& prefix, int index, int count) {
    size_t width = std::max<size_t>(std::to_string(count).size(), 2);
    std::string digits = std::to_string(index);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return prefix + digits;
}

} // namespace

int to_deci(double v) {
    double scaled = v * 10.0;
    long long rounded = std::llround(scaled);
    if (std::abs(scaled - static_cast<double>(rounded)) > 1e-6)
        fail(Err::ValidationError, "value " + format_sig9(v) + " is not a multiple of 0.1");
    return static_cast<int>(rounded);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::ParseError, "cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    ExperimentConfig cfg = default_config();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        validate_config(cfg);
        return cfg;
    }

    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(Err::ParseError, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(Err::ParseError, "config root must be a JSON object");

    check_keys(j,
               {"scenarios", "grid", "stats", "pool", "borrowers", "liquidators", "seed", "horizon",
                "rho", "fixtures_dir", "output", "assets"},
               "config");

    read_into(j, "scenarios", cfg.scenarios);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, {"c_min_lo", "c_min_hi", "r_liq_lo", "step"}, "grid");
        read_deci(g, "c_min_lo", cfg.grid.c_min_lo_deci);
        read_deci(g, "c_min_hi", cfg.grid.c_min_hi_deci);
        read_deci(g, "r_liq_lo", cfg.grid.r_liq_lo_deci);
        read_deci(g, "step", cfg.grid.step_deci);
    }
    if (j.contains("stats")) {
        const json& st = j.at("stats");
        check_keys(st, {"alpha", "delta", "n_min", "n_max", "block", "c_cap"}, "stats");
        read_into(st, "alpha", cfg.stats.alpha);
        read_into(st, "delta", cfg.stats.delta);
        read_into(st, "n_min", cfg.stats.n_min);
        read_into(st, "n_max", cfg.stats.n_max);
        read_into(st, "block", cfg.stats.block);
        read_into(st, "c_cap", cfg.stats.c_cap);
    }
    if (j.contains("pool")) {
        const json& p = j.at("pool");
        check_keys(p, {"max_liq", "interest_rate"}, "pool");
        read_into(p, "max_liq", cfg.max_liq);
        read_into(p, "interest_rate", cfg.interest_rate);
    }
    if (j.contains("borrowers")) {
        const json& b = j.at("borrowers");
        check_keys(b, {"count", "c_start", "c_step", "loan_value_usd"}, "borrowers");
        read_into(b, "count", cfg.borrowers.count);
        read_into(b, "c_start", cfg.borrowers.c_start);
        read_into(b, "c_step", cfg.borrowers.c_step);
        read_into(b, "loan_value_usd", cfg.borrowers.loan_value_usd);
    }
    read_into(j, "liquidators", cfg.liquidators);
    read_into(j, "seed", cfg.seed);
    read_into(j, "horizon", cfg.horizon);
    read_into(j, "rho", cfg.rho);
    read_into(j, "fixtures_dir", cfg.fixtures_dir);
    read_into(j, "output", cfg.output);
    if (j.contains("assets")) {
        const json& assets = j.at("assets");
        if (!assets.is_object()) fail(Err::ValidationError, "'assets' must be an object");
        for (auto it = assets.begin(); it != assets.end(); ++it) {
            const json& a = it.value();
            check_keys(a, {"mu", "sigma", "p0", "csv"}, "asset " + it.key());
            AssetSpec spec = cfg.assets.count(it.key()) ? cfg.assets.at(it.key()) : AssetSpec{};
            read_into(a, "mu", spec.gbm.mu);
            read_into(a, "sigma", spec.gbm.sigma);
            read_into(a, "p0", spec.gbm.p0);
            read_into(a, "csv", spec.csv);
            cfg.assets[it.key()] = spec;
        }
    }

    validate_config(cfg);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.scenarios.empty()) fail(Err::ValidationError, "at least one scenario is required");
    for (const std::string& name : cfg.scenarios) scenario_assets(cfg, name);

    try {
        grid_cells(cfg.grid.c_min_lo_deci, cfg.grid.c_min_hi_deci, cfg.grid.r_liq_lo_deci,
                   cfg.grid.step_deci);
    } catch (const LpError& e) {
        fail(Err::ValidationError, e.what());
    }

    if (!(cfg.stats.alpha > 0.0 && cfg.stats.alpha < 1.0)) fail(Err::ValidationError, "alpha must lie in (0, 1)");
    if (!(cfg.stats.delta > 0.0)) fail(Err::ValidationError, "delta must be positive");
    if (cfg.stats.n_min < 2) fail(Err::ValidationError, "n_min must be at least 2");
    if (cfg.stats.n_max < cfg.stats.n_min) fail(Err::ValidationError, "n_max must be at least n_min");
    if (cfg.stats.block < 1) fail(Err::ValidationError, "block must be at least 1");
    if (!(cfg.stats.c_cap > 0.0)) fail(Err::ValidationError, "c_cap must be positive");
    if (!(cfg.max_liq > 0.0 && cfg.max_liq <= 1.0)) fail(Err::ValidationError, "max_liq must lie in (0, 1]");
    if (cfg.interest_rate < 0.0) fail(Err::ValidationError, "interest_rate must be non-negative");
    if (cfg.borrowers.count < 1) fail(Err::ValidationError, "at least one borrower is required");
    if (!(cfg.borrowers.c_start > 0.0)) fail(Err::ValidationError, "c_start must be positive");
    if (cfg.borrowers.c_step < 0.0) fail(Err::ValidationError, "c_step must be non-negative");
    if (!(cfg.borrowers.loan_value_usd > 0.0)) fail(Err::ValidationError, "loan_value_usd must be positive");
    if (cfg.liquidators < 0) fail(Err::ValidationError, "liquidators must be non-negative");
    if (cfg.horizon < 1) fail(Err::ValidationError, "horizon must be at least 1");
    if (!(cfg.rho >= -1.0 && cfg.rho <= 1.0)) fail(Err::ValidationError, "rho must lie in [-1, 1]");
    for (const auto& [sym, asset] : cfg.assets) {
        if (sym.empty()) fail(Err::ValidationError, "asset symbols must be non-empty");
        if (!(asset.gbm.p0 > 0.0)) fail(Err::ValidationError, "p0 of " + sym + " must be positive");
        if (asset.gbm.sigma < 0.0) fail(Err::ValidationError, "sigma of " + sym + " must be non-negative");
    }
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["scenarios"] = cfg.scenarios;
    j["grid"] = {{"c_min_lo", cfg.grid.c_min_lo_deci / 10.0},
                 {"c_min_hi", cfg.grid.c_min_hi_deci / 10.0},
                 {"r_liq_lo", cfg.grid.r_liq_lo_deci / 10.0},
                 {"step", cfg.grid.step_deci / 10.0}};
    j["stats"] = {{"alpha", cfg.stats.alpha}, {"delta", cfg.stats.delta}, {"n_min", cfg.stats.n_min},
                  {"n_max", cfg.stats.n_max}, {"block", cfg.stats.block}, {"c_cap", cfg.stats.c_cap}};
    j["pool"] = {{"max_liq", cfg.max_liq}, {"interest_rate", cfg.interest_rate}};
    j["borrowers"] = {{"count", cfg.borrowers.count},
                      {"c_start", cfg.borrowers.c_start},
                      {"c_step", cfg.borrowers.c_step},
                      {"loan_value_usd", cfg.borrowers.loan_value_usd}};
    j["liquidators"] = cfg.liquidators;
    j["seed"] = cfg.seed;
    j["horizon"] = cfg.horizon;
    j["rho"] = cfg.rho;
    j["fixtures_dir"] = cfg.fixtures_dir;
    j["output"] = cfg.output;
    json assets = json::object();
    for (const auto& [sym, asset] : cfg.assets)
        assets[sym] = {{"mu", asset.gbm.mu}, {"sigma", asset.gbm.sigma}, {"p0", asset.gbm.p0},
                       {"csv", asset.csv}};
    j["assets"] = assets;
    return j.dump(2) + "\n";
}

std::string resolved_fixtures_dir(const ExperimentConfig& cfg) {
    const char* env = std::getenv("LENDPOOL_FIXTURES");
    if (env && *env) return env;
    return cfg.fixtures_dir;
}

std::vector<double> load_close_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::ParseError, "cannot open " + path);

    auto strip_cr = [](std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    };

    std::string line;
    if (!std::getline(in, line)) fail(Err::ParseError, path + " is empty");
    strip_cr(line);
    if (line != "date,close") fail(Err::ParseError, path + ": expected header 'date,close'");

    auto iso_date = [](const std::string& d) {
        if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
        for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
            if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
        return true;
    };

    std::vector<double> closes;
    std::string prev_date;
    int lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        strip_cr(line);
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            fail(Err::ParseError, path + ":" + std::to_string(lineno) + ": expected 'date,close'");
        std::string date = line.substr(0, comma);
        if (!iso_date(date))
            fail(Err::ParseError, path + ":" + std::to_string(lineno) + ": bad ISO date '" + date + "'");
        if (!prev_date.empty() && date <= prev_date)
            fail(Err::ValidationError, path + ":" + std::to_string(lineno) + ": dates must ascend");
        prev_date = date;
        double close = 0.0;
        try {
            size_t used = 0;
            close = std::stod(line.substr(comma + 1), &used);
            if (used != line.size() - comma - 1) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            fail(Err::ParseError, path + ":" + std::to_string(lineno) + ": bad close value");
        }
        if (!(close > 0.0))
            fail(Err::ValidationError, path + ":" + std::to_string(lineno) + ": closes must be positive");
        closes.push_back(close);
    }
    return closes;
}

GbmParams resolved_asset_params(const ExperimentConfig& cfg, const std::string& symbol) {
    auto it = cfg.assets.find(symbol);
    if (it == cfg.assets.end()) fail(Err::ValidationError, "asset " + symbol + " is not configured");
    if (it->second.csv.empty()) return it->second.gbm;

    std::string path = it->second.csv;
    if (!path.empty() && path.front() != '/') path = resolved_fixtures_dir(cfg) + "/" + path;
    return estimate_params(load_close_csv(path), it->second.gbm.p0);
}

ScenarioSpec make_scenario(const ExperimentConfig& cfg, const std::string& name) {
    auto [col_sym, loan_sym] = scenario_assets(cfg, name);
    ScenarioSpec spec;
    spec.name = name;
    spec.collateral_token = free_token(col_sym);
    spec.collateral = resolved_asset_params(cfg, col_sym);
    spec.loan_token = free_token(loan_sym);
    spec.loan = resolved_asset_params(cfg, loan_sym);
    spec.rho = cfg.rho;
    spec.horizon = cfg.horizon;
    spec.dt = kTrimesterYears / kTrimesterDays;
    return spec;
}

std::vector<AgentId> borrower_ids(const ExperimentConfig& cfg) {
    std::vector<AgentId> out;
    for (int i = 1; i <= cfg.borrowers.count; ++i)
        out.push_back(pad_id("b", i, cfg.borrowers.count));
    return out;
}

std::vector<AgentId> liquidator_ids(const ExperimentConfig& cfg) {
    std::vector<AgentId> out;
    for (int i = 1; i <= cfg.liquidators; ++i) out.push_back(pad_id("l", i, cfg.liquidators));
    return out;
}

LpState build_initial_state(const ExperimentConfig& cfg, const ScenarioSpec& spec,
                            double c_min, double r_liq) {
    const std::string& col = spec.collateral_token.symbol;
    const std::string& loan = spec.loan_token.symbol;

    LpState s;
    s.params = LpParams{c_min, r_liq, cfg.max_liq, cfg.interest_rate};
    s.prices = {{col, spec.collateral.p0}, {loan, spec.loan.p0}};

    TokenId minted = minted_token(col + "'", col);
    double loan_units = cfg.borrowers.loan_value_usd / spec.loan.p0;
    double supply = 0.0;

    std::vector<AgentId> borrowers = borrower_ids(cfg);
    for (size_t i = 0; i < borrowers.size(); ++i) {
        double target_c = cfg.borrowers.c_start + cfg.borrowers.c_step * static_cast<double>(i);
        double minted_units = target_c * cfg.borrowers.loan_value_usd / spec.collateral.p0;

        Wallet w;
        w.owner = borrowers[i];
        w.balances.set(minted.symbol, minted_units);
        w.balances.set(loan, loan_units);
        s.wallets[borrowers[i]] = std::move(w);
        s.pool.loans[borrowers[i]].set(loan, loan_units);
        supply += minted_units;
    }

    for (const AgentId& id : liquidator_ids(cfg)) {
        Wallet w;
        w.owner = id;
        w.unbounded_funds = true;
        s.wallets[id] = std::move(w);
    }

    // No loans exist in the collateral token, so funds equal to the minted
    // supply pin the exchange rate at exactly 1.
    s.pool.funds.set(col, supply);
    s.pool.funds.set(loan, loan_units * static_cast<double>(cfg.borrowers.count));
    s.pool.minted[col] = MintRegistration{minted, supply};

    validate(s);
    return s;
}

std::vector<CellTask> cell_tasks(const ExperimentConfig& cfg) {
    return cell_tasks(cfg, cfg.scenarios,
                      grid_cells(cfg.grid.c_min_lo_deci, cfg.grid.c_min_hi_deci,
                                 cfg.grid.r_liq_lo_deci, cfg.grid.step_deci));
}

std::vector<CellTask> cell_tasks(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& scenario_names,
                                 const std::vector<std::pair<int, int>>& cells) {
    std::vector<CellTask> tasks;
    for (const std::string& name : scenario_names) {
        ScenarioSpec spec = make_scenario(cfg, name);
        for (const auto& [c_min_deci, r_liq_deci] : cells) {
            if (r_liq_deci < 10 || r_liq_deci > c_min_deci - 1)
                fail(Err::InvalidGrid, "cell " + format_deci(c_min_deci) + ":" +
                                           format_deci(r_liq_deci) + " violates r_liq < c_min");
            CellTask task;
            task.scenario = name;
            task.c_min_deci = c_min_deci;
            task.r_liq_deci = r_liq_deci;
            task.spec = spec;
            task.init = build_initial_state(cfg, spec, c_min_deci / 10.0, r_liq_deci / 10.0);
            task.liquidators = liquidator_ids(cfg);
            tasks.push_back(std::move(task));
        }
    }
    return tasks;
}

std::vector<std::pair<int, int>> parse_cell_list(const std::string& arg) {
    std::vector<std::pair<int, int>> cells;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos)
            fail(Err::ValidationError, "grid cell '" + item + "' must look like c_min:r_liq");
        try {
            cells.emplace_back(to_deci(std::stod(item.substr(0, colon))),
                               to_deci(std::stod(item.substr(colon + 1))));
        } catch (const LpError&) {
            throw;
        } catch (const std::exception&) {
            fail(Err::ValidationError, "grid cell '" + item + "' must look like c_min:r_liq");
        }
    }
    if (cells.empty()) fail(Err::ValidationError, "empty grid cell list");
    return cells;
}

} // namespace lendpool
