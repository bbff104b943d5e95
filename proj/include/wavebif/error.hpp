#pragma once

#include <stdexcept>
#include <string>

namespace wavebif {

/// Broad failure category; the CLI maps these onto process exit codes.
enum class ErrorKind {
    invalid_input,      ///< violated precondition or malformed data (exit 2)
    empty_result,       ///< a search found nothing (exit 3)
    numerical_failure,  ///< integrator, solver or consistency failure (exit 4)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what) : Error(ErrorKind::numerical_failure, what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidInput(message);
}

inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_input: return 2;
        case ErrorKind::empty_result: return 3;
        case ErrorKind::numerical_failure: return 4;
    }
    return 4;
}

}  // namespace wavebif
