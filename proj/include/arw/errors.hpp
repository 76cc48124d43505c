#pragma once

#include <stdexcept>
#include <string>

namespace arw {

// Error taxonomy maps onto CLI exit codes: usage errors are handled by the
// flag parser (exit 1); these cover the rest.
struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Toppling cap exceeded. Signals a runaway stabilization or a mis-set cap;
// never a silent truncation.
struct BudgetExceeded : EngineError {
    explicit BudgetExceeded(const std::string& what) : EngineError(what) {}
};

// Point-source run touched the window boundary.
struct WindowTooSmall : EngineError {
    explicit WindowTooSmall(const std::string& what) : EngineError(what) {}
};

struct SnapshotParseError : EngineError {
    explicit SnapshotParseError(const std::string& what) : EngineError(what) {}
};

// Critical-density bisection ended with a split vote; widen trials.
struct InconclusiveEstimate : std::runtime_error {
    explicit InconclusiveEstimate(const std::string& what) : std::runtime_error(what) {}
};

// No extended odometer candidate exists for the given boundary data
// within the configured window.
struct InfeasibleBoundary : std::runtime_error {
    explicit InfeasibleBoundary(const std::string& what) : std::runtime_error(what) {}
};

// Index scan for a prefix-count target ran past its limit.
struct SearchWindowExhausted : std::runtime_error {
    explicit SearchWindowExhausted(const std::string& what) : std::runtime_error(what) {}
};

// Odometer handed to phi_map fails class membership validation.
struct NotAMember : std::runtime_error {
    explicit NotAMember(const std::string& what) : std::runtime_error(what) {}
};

} // namespace arw
