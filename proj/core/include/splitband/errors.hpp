#pragma once

#include <stdexcept>
#include <string>

namespace splitband {

// Invalid or inconsistent input. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Anything that fails while computing. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularEvaluationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularSystemError : public NumericalError {
public:
    SingularSystemError(const std::string& what, double condition)
        : NumericalError(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class FitError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientDataError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace splitband
