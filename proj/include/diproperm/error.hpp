#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>

namespace diproperm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    /// Short machine-readable name, e.g. "ParseError".
    virtual const char* kind() const noexcept { return "Error"; }
    /// Same error type with `prefix` prepended to the message.
    virtual std::exception_ptr with_context(const std::string& prefix) const {
        return std::make_exception_ptr(Error(prefix + what()));
    }
};

#define DIPROPERM_ERROR(Name)                                             \
    class Name : public Error {                                           \
    public:                                                               \
        using Error::Error;                                               \
        const char* kind() const noexcept override { return #Name; }      \
        std::exception_ptr with_context(const std::string& prefix) const override { \
            return std::make_exception_ptr(Name(prefix + what()));        \
        }                                                                 \
    }

DIPROPERM_ERROR(LabelError);
DIPROPERM_ERROR(EmptyGroupError);
DIPROPERM_ERROR(InvalidArgument);
DIPROPERM_ERROR(DegenerateDirection);
DIPROPERM_ERROR(ZeroVariance);
DIPROPERM_ERROR(PairingError);
DIPROPERM_ERROR(DegenerateNull);
DIPROPERM_ERROR(SingularCovariance);
DIPROPERM_ERROR(SpecError);

#undef DIPROPERM_ERROR

/// Malformed input file. Row and column are 1-based positions in the file.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row), column_(column) {}
    const char* kind() const noexcept override { return "ParseError"; }
    std::exception_ptr with_context(const std::string& prefix) const override {
        ParseError e(*this);
        e.message_ = prefix + what();
        return std::make_exception_ptr(e);
    }
    const char* what() const noexcept override { return message_.empty() ? Error::what() : message_.c_str(); }
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
    std::string message_;
};

/// Iterative solver failed to reach its optimality tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    const char* kind() const noexcept override { return "SolverError"; }
    std::exception_ptr with_context(const std::string& prefix) const override {
        SolverError e(*this);
        e.message_ = prefix + what();
        return std::make_exception_ptr(e);
    }
    const char* what() const noexcept override { return message_.empty() ? Error::what() : message_.c_str(); }
    double residual() const noexcept { return residual_; }

private:
    double residual_;
    std::string message_;
};

}  // namespace diproperm
