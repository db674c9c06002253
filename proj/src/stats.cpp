#include "lendpool/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

#include "lendpool/ops.hpp"
#include "lendpool/rng.hpp"
#include "lendpool/strategy.hpp"

namespace lendpool {

namespace {

void check_stats_params(double alpha, double delta, int n_min, int n_max, int block) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(Err::ValidationError, "alpha must lie in (0, 1)");
    if (!(delta > 0.0)) fail(Err::ValidationError, "delta must be positive");
    if (n_min < 2) fail(Err::ValidationError, "n_min must be at least 2");
    if (n_max < n_min) fail(Err::ValidationError, "n_max must be at least n_min");
    if (block < 1) fail(Err::ValidationError, "block must be at least 1");
}

double t_quantile(double alpha, int n) {
    boost::math::students_t dist(static_cast<double>(n - 1));
    return boost::math::quantile(dist, 1.0 - alpha / 2.0);
}

struct Welford {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n++;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

double half_width_of(const Welford& w, double alpha) {
    if (w.n < 2) return std::numeric_limits<double>::infinity();
    double var = w.variance();
    if (var <= 0.0) return 0.0;
    return t_quantile(alpha, static_cast<int>(w.n)) * std::sqrt(var / static_cast<double>(w.n));
}

bool is_checkpoint(int n, int n_min, int block) {
    return n >= n_min && (n == n_min || (n - n_min) % block == 0);
}

CiEstimate finalize(const Welford& w, double alpha, double delta) {
    CiEstimate e;
    e.mean = w.mean;
    e.half_width = half_width_of(w, alpha);
    e.n = static_cast<int>(w.n);
    e.alpha = alpha;
    e.converged = 2.0 * e.half_width <= delta;
    return e;
}

} // namespace

CiEstimate estimate_mean(const std::function<double(int)>& sampler, double alpha, double delta,
                         int n_min, int n_max, int block) {
    check_stats_params(alpha, delta, n_min, n_max, block);
    Welford acc;
    for (int i = 0; i < n_max; ++i) {
        acc.add(sampler(i));
        int n = i + 1;
        if (is_checkpoint(n, n_min, block) && 2.0 * half_width_of(acc, alpha) <= delta) break;
    }
    return finalize(acc, alpha, delta);
}

SimulationResult run_simulation(const ScenarioSpec& spec, const LpState& init,
                                const std::vector<AgentId>& liquidators, uint64_t seed,
                                double c_cap) {
    SimulationResult result;
    try {
        validate(init);

        result.path = generate_path(spec, seed);
        ObservableMatrix& obs = result.observables;
        obs.rounds = spec.horizon;
        for (const auto& [id, w] : init.wallets)
            if (std::find(liquidators.begin(), liquidators.end(), id) == liquidators.end())
                obs.borrowers.push_back(id);
        obs.values.assign(obs.borrowers.size() * (static_cast<size_t>(spec.horizon) + 1), 0.0);

        auto record = [&](const LpState& s, int round) {
            for (size_t b = 0; b < obs.borrowers.size(); ++b) {
                double c = collateralization(s, obs.borrowers[b]);
                if (std::isinf(c)) c = c_cap;
                obs.values[b * (static_cast<size_t>(spec.horizon) + 1) + static_cast<size_t>(round)] = c;
            }
        };

        LpState state = init;
        record(state, 0);
        for (int r = 1; r <= spec.horizon; ++r) {
            std::map<std::string, double> prices = {
                {spec.collateral_token.symbol, result.path[static_cast<size_t>(r)].collateral},
                {spec.loan_token.symbol, result.path[static_cast<size_t>(r)].loan},
            };
            state = update_prices(state, prices);
            state = accrue_interest(state);
            auto [next, acts] = liquidation_round(state, liquidators);
            state = std::move(next);
            result.liquidation_count += static_cast<int>(acts.size());
            record(state, r);
        }
        validate(state);
        result.final_state = std::move(state);
    } catch (const LpError& e) {
        if (e.kind() == Err::SimulationFault) throw;
        fail(Err::SimulationFault, e.what());
    }
    return result;
}

std::vector<std::pair<int, int>> grid_cells(int c_min_lo_deci, int c_min_hi_deci,
                                            int r_liq_lo_deci, int step_deci) {
    if (step_deci < 1) fail(Err::InvalidGrid, "step must be positive");
    if (c_min_lo_deci > c_min_hi_deci) fail(Err::InvalidGrid, "empty c_min range");
    if (r_liq_lo_deci < 10) fail(Err::InvalidGrid, "r_liq must be at least 1.0");
    if (c_min_lo_deci <= 10) fail(Err::InvalidGrid, "c_min must exceed 1.0");

    std::vector<std::pair<int, int>> cells;
    for (int c = c_min_lo_deci; c <= c_min_hi_deci; c += step_deci)
        for (int r = r_liq_lo_deci; r <= c - 1; r += step_deci) cells.emplace_back(c, r);
    if (cells.empty()) fail(Err::InvalidGrid, "r_liq lower bound leaves no admissible pair");
    return cells;
}

double SweepCell::min_mean(size_t borrower) const {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= rounds; ++r) best = std::min(best, at(borrower, r).mean);
    return best;
}

namespace {

SweepCell run_cell(const CellTask& cell, const StatsParams& p, uint64_t base_seed,
                   uint64_t cell_index) {
    SweepCell out;
    out.scenario = cell.scenario;
    out.c_min_deci = cell.c_min_deci;
    out.r_liq_deci = cell.r_liq_deci;
    out.rounds = cell.spec.horizon;
    for (const auto& [id, w] : cell.init.wallets)
        if (std::find(cell.liquidators.begin(), cell.liquidators.end(), id) == cell.liquidators.end())
            out.borrowers.push_back(id);

    size_t width = static_cast<size_t>(out.rounds) + 1;
    std::vector<Welford> acc(out.borrowers.size() * width);

    int n = 0;
    while (n < p.n_max) {
        SimulationResult sim = run_simulation(cell.spec, cell.init, cell.liquidators,
                                              derive_seed(base_seed, cell_index, static_cast<uint64_t>(n)),
                                              p.c_cap);
        if (sim.observables.borrowers != out.borrowers)
            fail(Err::SimulationFault, "observable set changed between simulations");
        for (size_t i = 0; i < acc.size(); ++i) acc[i].add(sim.observables.values[i]);
        n++;

        if (is_checkpoint(n, p.n_min, p.block)) {
            bool all = true;
            for (const Welford& w : acc)
                if (2.0 * half_width_of(w, p.alpha) > p.delta) {
                    all = false;
                    break;
                }
            if (all) break;
        }
    }

    out.n = n;
    out.estimates.reserve(acc.size());
    for (const Welford& w : acc) out.estimates.push_back(finalize(w, p.alpha, p.delta));
    return out;
}

} // namespace

std::vector<SweepCell> sweep(const std::vector<CellTask>& cells, const StatsParams& params,
                             uint64_t base_seed, int threads) {
    check_stats_params(params.alpha, params.delta, params.n_min, params.n_max, params.block);
    if (!(params.c_cap > 0.0)) fail(Err::ValidationError, "c_cap must be positive");

    std::vector<SweepCell> out(cells.size());
    if (cells.empty()) return out;

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp<int>(threads, 1, static_cast<int>(cells.size()));

    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                out[i] = run_cell(cells[i], params, base_seed, static_cast<uint64_t>(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

std::string format_sig9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string format_deci(int deci) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%d.%d", deci / 10, deci % 10);
    return buf;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::string out = "scenario,c_min,r_liq,borrower,round,mean_c,ci_half_width,n_sims,converged\n";
    for (const SweepCell& cell : cells) {
        for (size_t b = 0; b < cell.borrowers.size(); ++b) {
            for (int r = 0; r <= cell.rounds; ++r) {
                const CiEstimate& e = cell.at(b, r);
                out += cell.scenario;
                out += ',';
                out += format_deci(cell.c_min_deci);
                out += ',';
                out += format_deci(cell.r_liq_deci);
                out += ',';
                out += cell.borrowers[b];
                out += ',';
                out += std::to_string(r);
                out += ',';
                out += format_sig9(e.mean);
                out += ',';
                out += format_sig9(e.half_width);
                out += ',';
                out += std::to_string(e.n);
                out += ',';
                out += e.converged ? "true" : "false";
                out += '\n';
            }
        }
    }
    return out;
}

} // namespace lendpool
