#pragma once

#include <stdexcept>
#include <string>

namespace lendpool {

// Every rejected transition or malformed input maps to exactly one of these.
enum class Err {
    UndefinedResult,            // point-wise map update would go negative
    UnknownToken,
    UnknownAgent,
    NotMinted,
    NonPositiveAmount,
    InsufficientBalance,
    InsufficientPoolFunds,
    Undercollateralized,
    ExceedsLoan,
    ExceedsMaxLiq,
    InsufficientCollateralHeld,
    BorrowerSafe,
    OverLiquidation,
    IllPosed,
    NoRepayableLoan,
    DomainMismatch,
    NonPositivePrice,
    TooShort,
    InvalidGrid,
    ConfigInvalid,
    ParseError,
    ValidationError,
    InternalInconsistency,
    SimulationFault,
};

const char* err_name(Err e);

class LpError : public std::runtime_error {
public:
    LpError(Err kind, const std::string& msg)
        : std::runtime_error(std::string(err_name(kind)) + ": " + msg), kind_(kind) {}

    Err kind() const { return kind_; }

private:
    Err kind_;
};

[[noreturn]] inline void fail(Err kind, const std::string& msg) { throw LpError(kind, msg); }

} // namespace lendpool
