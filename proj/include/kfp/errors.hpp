#pragma once

#include <stdexcept>
#include <string>

namespace kfp {

// A quadrature or iteration failed to reach its tolerance within budget.
class ToleranceError : public std::runtime_error {
public:
    explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical invariant the library asserts was violated at runtime
// (e.g. a denominator that a proved inequality forbids from vanishing).
class InvariantError : public std::runtime_error {
public:
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

// Ratio of the form 0/0: the quantity is undefined rather than wrong.
class UndefinedRatioError : public std::runtime_error {
public:
    explicit UndefinedRatioError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kfp
