#pragma once

#include <stdexcept>
#include <string>

namespace epf {

// Exit codes used by the CLI: 2 config/validation, 3 data, 4 numerical.
enum class ErrorKind { validation = 2, data = 3, numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(ErrorKind::validation, msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(ErrorKind::numerical, msg) {}
};

// Equality-constrained frontier collapses when the candidate set is degenerate
// (models identical up to the constraint); callers usually fall back to the
// minimum-variance solution.
class DegenerateFrontierError : public NumericalError {
public:
    explicit DegenerateFrontierError(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace epf
