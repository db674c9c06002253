#include "lendpool/example.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace lendpool::example {

namespace {

constexpr double kVA = 50.0;          // restoring amount for A: (1.5*80 - 100) / 0.4
constexpr double kVBC = 1000.0 / 11.0; // full-collateral amount for B and C: 100 / 1.1

bool close(double a, double b, double rel_tol) {
    double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= rel_tol * scale;
}

LpState from_ref(const RefState& r) {
    LpState s;
    s.params = LpParams{1.5, 1.1, 1.0, 0.0};
    s.prices = {{"t0", 1.0}, {"t1", 1.0}};

    auto wallet = [&](const AgentId& id, std::initializer_list<std::pair<std::string, double>> bal) {
        Wallet w;
        w.owner = id;
        for (const auto& [sym, amt] : bal) w.balances.set(sym, amt);
        s.wallets[id] = std::move(w);
    };
    wallet("A", {{"t1", 80.0}, {"t0'", r.a_m0}});
    wallet("B", {{"t1", 100.0}, {"t0'", r.b_m0}});
    wallet("C", {{"t1", 125.0}, {"t0'", r.c_m0}});
    wallet("D", {{"t1", r.d_t1}, {"t0'", r.d_m0}, {"t1'", 500.0}});

    s.pool.funds.set("t0", 300.0);
    s.pool.funds.set("t1", r.pool_t1);
    s.pool.loans["A"].set("t1", r.loan_a);
    s.pool.loans["B"].set("t1", r.loan_b);
    s.pool.loans["C"].set("t1", r.loan_c);
    s.pool.minted["t0"] = MintRegistration{minted_token("t0'", "t0"), 300.0};
    s.pool.minted["t1"] = MintRegistration{minted_token("t1'", "t1"), 500.0};
    return s;
}

} // namespace

LpState initial_state() { return from_ref(expected_states().front()); }

std::vector<Action> liquidation_actions() {
    auto liq = [](const AgentId& borrower, double v) {
        Action a;
        a.kind = ActionKind::Liquidate;
        a.agent = "D";
        a.borrower = borrower;
        a.amount = v;
        a.token = "t1";
        a.seize_token = "t0'";
        return a;
    };
    return {liq("A", kVA), liq("B", kVBC), liq("C", kVBC)};
}

const std::vector<RefState>& expected_states() {
    // key, pool_t1, loans a/b/c, minted balances a/b/c, d_t1, d_m0, C a/b/c
    static const std::vector<RefState> states = {
        {"", 195.0, 80.0, 100.0, 125.0, 100.0, 100.0, 100.0, 500.0, 0.0, 1.25, 1.0, 0.8},
        {"A", 245.0, 30.0, 100.0, 125.0, 45.0, 100.0, 100.0, 450.0, 55.0, 1.5, 1.0, 0.8},
        {"B", 195.0 + kVBC, 80.0, 100.0 - kVBC, 125.0, 100.0, 0.0, 100.0, 500.0 - kVBC, 100.0, 1.25, 0.0, 0.8},
        {"C", 195.0 + kVBC, 80.0, 100.0, 125.0 - kVBC, 100.0, 100.0, 0.0, 500.0 - kVBC, 100.0, 1.25, 1.0, 0.0},
        {"AB", 245.0 + kVBC, 30.0, 100.0 - kVBC, 125.0, 45.0, 0.0, 100.0, 450.0 - kVBC, 155.0, 1.5, 0.0, 0.8},
        {"AC", 245.0 + kVBC, 30.0, 100.0, 125.0 - kVBC, 45.0, 100.0, 0.0, 450.0 - kVBC, 155.0, 1.5, 1.0, 0.0},
        {"BC", 195.0 + 2 * kVBC, 80.0, 100.0 - kVBC, 125.0 - kVBC, 100.0, 0.0, 0.0, 500.0 - 2 * kVBC, 200.0, 1.25, 0.0, 0.0},
        {"ABC", 245.0 + 2 * kVBC, 30.0, 100.0 - kVBC, 125.0 - kVBC, 45.0, 0.0, 0.0, 450.0 - 2 * kVBC, 255.0, 1.5, 0.0, 0.0},
    };
    return states;
}

namespace {

struct PrintedState {
    std::string key;
    double pool_t1, loan_a, loan_b, loan_c, a_m0, b_m0, c_m0, d_t1, d_m0, c_a, c_b, c_c;
    bool d_t1_reliable; // false where the published integer contradicts its own row
};

const std::vector<PrintedState>& printed_states() {
    static const std::vector<PrintedState> rows = {
        {"", 195, 80, 100, 125, 100, 100, 100, 500, 0, 1.25, 1.0, 0.8, true},
        {"A", 245, 30, 100, 125, 45, 100, 100, 450, 55, 1.5, 1.0, 0.8, true},
        {"B", 286, 80, 9, 125, 100, 0, 100, 410, 100, 1.25, 0.0, 0.8, false},
        {"C", 286, 80, 100, 34, 100, 100, 0, 410, 100, 1.25, 1.0, 0.0, false},
        {"AB", 336, 30, 9, 125, 45, 0, 100, 359, 155, 1.5, 0.0, 0.8, true},
        {"AC", 336, 30, 100, 34, 45, 100, 0, 359, 155, 1.5, 1.0, 0.0, true},
        {"BC", 377, 80, 9, 34, 100, 0, 0, 318, 200, 1.25, 0.0, 0.0, true},
        {"ABC", 427, 30, 9, 34, 45, 0, 0, 268, 255, 1.5, 0.0, 0.0, true},
    };
    return rows;
}

const RefState& ref_by_key(const std::string& key) {
    for (const RefState& r : expected_states())
        if (r.key == key) return r;
    fail(Err::InternalInconsistency, "no reference state for key " + key);
}

} // namespace

PrintedCheck check_against_printed_rows() {
    PrintedCheck out;
    auto cell = [&](const std::string& key, const char* name, double exact, double printed,
                    bool reliable) {
        out.cells_checked++;
        double reference = reliable ? printed : std::round(exact);
        if (!reliable) out.cells_corrected++;
        if (std::abs(exact - reference) <= 0.5) {
            out.cells_ok++;
        } else if (out.first_failure.empty()) {
            std::ostringstream os;
            os << "state " << (key.empty() ? "initial" : key) << " cell " << name << ": exact "
               << exact << " vs published " << printed;
            out.first_failure = os.str();
        }
    };
    for (const PrintedState& p : printed_states()) {
        const RefState& r = ref_by_key(p.key);
        cell(p.key, "pool_t1", r.pool_t1, p.pool_t1, true);
        cell(p.key, "loan_a", r.loan_a, p.loan_a, true);
        cell(p.key, "loan_b", r.loan_b, p.loan_b, true);
        cell(p.key, "loan_c", r.loan_c, p.loan_c, true);
        cell(p.key, "a_m0", r.a_m0, p.a_m0, true);
        cell(p.key, "b_m0", r.b_m0, p.b_m0, true);
        cell(p.key, "c_m0", r.c_m0, p.c_m0, true);
        cell(p.key, "d_t1", r.d_t1, p.d_t1, p.d_t1_reliable);
        cell(p.key, "d_m0", r.d_m0, p.d_m0, true);
        cell(p.key, "c_a", r.c_a, p.c_a, true);
        cell(p.key, "c_b", r.c_b, p.c_b, true);
        cell(p.key, "c_c", r.c_c, p.c_c, true);
    }
    return out;
}

bool states_close(const LpState& a, const LpState& b, double rel_tol) {
    std::set<AgentId> agents;
    for (const auto& [id, w] : a.wallets) agents.insert(id);
    for (const auto& [id, w] : b.wallets) agents.insert(id);
    std::set<std::string> symbols;
    auto collect = [&](const TokenMap& m) {
        for (const auto& [sym, amt] : m.entries()) symbols.insert(sym);
    };
    for (const AgentId& id : agents) {
        auto ia = a.wallets.find(id);
        auto ib = b.wallets.find(id);
        if (ia == a.wallets.end() || ib == b.wallets.end()) return false;
        if (ia->second.unbounded_funds != ib->second.unbounded_funds) return false;
        symbols.clear();
        collect(ia->second.balances);
        collect(ib->second.balances);
        for (const std::string& sym : symbols)
            if (!close(ia->second.balances.get(sym), ib->second.balances.get(sym), rel_tol)) return false;
    }

    symbols.clear();
    collect(a.pool.funds);
    collect(b.pool.funds);
    for (const std::string& sym : symbols)
        if (!close(a.pool.funds.get(sym), b.pool.funds.get(sym), rel_tol)) return false;

    for (const AgentId& id : agents) {
        auto la = a.pool.loans.find(id);
        auto lb = b.pool.loans.find(id);
        symbols.clear();
        if (la != a.pool.loans.end()) collect(la->second);
        if (lb != b.pool.loans.end()) collect(lb->second);
        for (const std::string& sym : symbols) {
            double va = la == a.pool.loans.end() ? 0.0 : la->second.get(sym);
            double vb = lb == b.pool.loans.end() ? 0.0 : lb->second.get(sym);
            if (!close(va, vb, rel_tol)) return false;
        }
    }

    if (a.pool.minted.size() != b.pool.minted.size()) return false;
    for (const auto& [underlying, reg] : a.pool.minted) {
        auto it = b.pool.minted.find(underlying);
        if (it == b.pool.minted.end()) return false;
        if (it->second.minted.symbol != reg.minted.symbol) return false;
        if (!close(it->second.supply, reg.supply, rel_tol)) return false;
    }

    if (a.prices != b.prices) return false;
    return a.params == b.params;
}

ReplayReport run_replay() {
    ReplayReport report;
    report.printed = check_against_printed_rows();

    std::vector<Action> base = liquidation_actions();
    std::vector<int> order = {0, 1, 2};
    const LpState final_expected = from_ref(ref_by_key("ABC"));

    std::sort(order.begin(), order.end());
    do {
        report.orders_total++;
        LpState state = initial_state();
        std::string key;
        bool all_ok = true;
        for (int idx : order) {
            const Action& act = base[idx];
            state = apply_action(state, act);
            key.push_back(act.borrower[0]);
            std::sort(key.begin(), key.end());
            report.states_checked++;
            if (states_close(state, from_ref(ref_by_key(key)), kRelTol)) {
                report.states_ok++;
            } else {
                all_ok = false;
                if (report.first_failure.empty())
                    report.first_failure = "state " + key + " diverges from the pinned values";
            }
        }
        if (all_ok && states_close(state, final_expected, kRelTol)) {
            report.orders_converged++;
        } else if (report.first_failure.empty()) {
            report.first_failure = "an execution order failed to converge";
        }
    } while (std::next_permutation(order.begin(), order.end()));

    return report;
}

} // namespace lendpool::example
