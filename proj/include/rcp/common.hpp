#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcp {

using Vector = std::vector<double>;

/// Precondition or shape violation in a numeric kernel.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Bad or inconsistent run configuration (unknown env, malformed config file, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested quantity is not defined for this input (e.g. no oracle for an env).
struct NotAvailable : std::runtime_error {
    explicit NotAvailable(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed dataset/checkpoint file.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw ContractViolation(msg);
}

inline bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double clamp(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

enum class ActionKind { continuous, discrete };
enum class TerminalKind { none, goal, timeout };

/// Continuous actions use `c`; discrete actions use `d`.
struct Action {
    Vector c;
    int d = -1;
};

}  // namespace rcp
