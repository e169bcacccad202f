#pragma once

#include <stdexcept>
#include <string>

namespace mla {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed game file. `line` is the 1-based line of the first offending token.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& message)
        : Error("parse error at line " + std::to_string(line) + ": " + message), line(line) {}
    int line;
};

/// Invalid solver or generator configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Generator parameter outside its documented range.
class ParamError : public Error {
public:
    using Error::Error;
};

/// An iterative solver ran out of its sweep budget.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& what, double residual, long sweeps)
        : Error(what + " (residual " + std::to_string(residual) + " after " +
                std::to_string(sweeps) + " sweeps)"),
          residual(residual), sweeps(sweeps) {}
    double residual;
    long sweeps;
};

/// Valuation length does not match the structure it is applied to.
class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

/// Every region over the imprecision threshold is already a singleton.
class CannotRefineError : public Error {
public:
    using Error::Error;
};

/// RegionId does not belong to this partition generation.
class StaleRegionError : public Error {
public:
    using Error::Error;
};

/// Requested initial partition depth outside [0, total_bits].
class DepthOutOfRangeError : public Error {
public:
    using Error::Error;
};

/// Region-local valuation was asked for a state it does not cover.
class ForeignStateError : public Error {
public:
    using Error::Error;
};

/// Operation requires an MDP (no player-2 states).
class NotAnMdpError : public Error {
public:
    using Error::Error;
};

/// Generator would materialize more states than the configured cap.
class StateSpaceTooLargeError : public Error {
public:
    using Error::Error;
};

/// Two engines disagreed beyond tolerance on the same model.
class CrossCheckError : public Error {
public:
    using Error::Error;
};

} // namespace mla
