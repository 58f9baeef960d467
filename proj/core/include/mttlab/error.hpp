#pragma once

#include <stdexcept>
#include <string>

namespace mttlab {

enum class ErrorCode {
    path_out_of_range,
    non_nullary_symbol,
    param_out_of_arity,
    unknown_symbol,
    syntax_error,
    invalid_transducer,
    not_nondeleting,
    not_applicable,
    infinite_pout,
    missing_phi,
    iteration_cap_exceeded,
    alphabet_mismatch,
    internal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Raised by the textual parsers; line/column are 1-based.
class SyntaxError : public Error {
public:
    SyntaxError(int line, int column, const std::string& what)
        : Error(ErrorCode::syntax_error,
                std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace mttlab
