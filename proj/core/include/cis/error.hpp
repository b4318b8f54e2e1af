#ifndef CIS_ERROR_HPP
#define CIS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cis {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Syntax or structural error in an input file. Positions are 1-based.
class ParseError : public Error {
public:
    ParseError(int line, int col, const std::string& msg)
        : Error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line(line), col(col) {}
    int line;
    int col;
};

// A well-formed input that violates a model rule (bad anchor, duplicate name, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Arithmetic overflow in cycle math. Cycle counts must never silently wrap.
class OverflowError : public Error {
public:
    OverflowError() : Error("integer overflow in cycle arithmetic") {}
};

// Expression evaluation against an incomplete assignment.
class EvalError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& constraint)
        : Error("infeasible: " + constraint), failed_constraint(constraint) {}
    std::string failed_constraint;
};

class TimeoutError : public Error {
public:
    TimeoutError() : Error("solver time budget exhausted with no feasible solution") {}
};

// Runtime fault inside the simulated machine.
class SimError : public Error {
public:
    using Error::Error;
};

// Broken internal invariant; maps to exit code 3 in the CLI.
class InternalError : public Error {
public:
    using Error::Error;
};

#define CIS_ASSERT(cond, msg)                                   \
    do {                                                        \
        if (!(cond)) throw ::cis::InternalError(msg);           \
    } while (0)

}  // namespace cis

#endif
