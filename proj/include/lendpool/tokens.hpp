#pragma once

#include <functional>
#include <map>
#include <string>

#include "lendpool/errors.hpp"

namespace lendpool {

using AgentId = std::string;

enum class TokenClass { Free, Minted };

// A token is identified by its symbol, unique within one state. Minted tokens
// carry the symbol of the free token they were minted against.
struct TokenId {
    std::string symbol;
    TokenClass cls = TokenClass::Free;
    std::string underlying; // empty for free tokens

    friend bool operator==(const TokenId& a, const TokenId& b) { return a.symbol == b.symbol; }
    friend bool operator<(const TokenId& a, const TokenId& b) { return a.symbol < b.symbol; }
};

inline TokenId free_token(std::string symbol) {
    return TokenId{std::move(symbol), TokenClass::Free, {}};
}

inline TokenId minted_token(std::string symbol, std::string underlying) {
    return TokenId{std::move(symbol), TokenClass::Minted, std::move(underlying)};
}

// Finite map from token symbols to non-negative amounts. Absent keys read as
// zero, but absence is observable: the point-wise update operator inserts on
// absent keys and arithmetically combines on present ones.
class TokenMap {
public:
    double get(const std::string& symbol) const {
        auto it = amounts_.find(symbol);
        return it == amounts_.end() ? 0.0 : it->second;
    }

    bool contains(const std::string& symbol) const { return amounts_.count(symbol) > 0; }

    void set(const std::string& symbol, double v) { amounts_[symbol] = v; }

    const std::map<std::string, double>& entries() const { return amounts_; }

    friend bool operator==(const TokenMap& a, const TokenMap& b) { return a.amounts_ == b.amounts_; }

private:
    std::map<std::string, double> amounts_;
};

// Point-wise update f ∘ v : τ. If τ is present, combine and require a
// non-negative result; if absent, insert v as-is. A combined result below
// zero (or NaN) is undefined.
TokenMap map_apply(const TokenMap& f, const std::function<double(double, double)>& op,
                   double v, const TokenId& tau);

} // namespace lendpool
