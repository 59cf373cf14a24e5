// common.hpp
//
// Shared error type and small helpers used across the probred library.

#ifndef PROBRED_COMMON_HPP
#define PROBRED_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace probred {

// All library failures (domain errors, parse errors, rank deficiency, ...)
// throw Error with a human-readable message. Callers that need to map
// failures to process exit codes catch this one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw Error(message);
}

inline void require_finite(double x, const std::string& what) {
    if (!std::isfinite(x)) throw Error(what + " must be finite");
}

}  // namespace detail

// A probability: a finite real in [0, 1]. Constructing one out of range is a
// bug in the caller, reported as an Error. Converts implicitly to double so
// p-values participate in arithmetic and comparisons naturally.
class ProbValue {
public:
    ProbValue(double value) : value_(value) {  // NOLINT: implicit by design
        if (!(value >= 0.0 && value <= 1.0))
            throw Error("probability out of [0,1]: " + std::to_string(value));
    }
    operator double() const { return value_; }
    double value() const { return value_; }

private:
    double value_;
};

}  // namespace probred

#endif  // PROBRED_COMMON_HPP
