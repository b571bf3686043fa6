#pragma once

#include <stdexcept>
#include <string>

namespace griddeploy {

// Base of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Environment-class errors: the input could not be read or understood at all.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, int line = 0, int column = 0)
        : Error(format(msg, line, column)), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        if (line <= 0) return msg;
        return msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
    }
    int line_ = 0;
    int column_ = 0;
};

// Domain-class errors: the input was well formed but the request cannot be honored.
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& msg) : Error(msg) {}
};

class LookupError : public Error {
public:
    explicit LookupError(const std::string& msg) : Error(msg) {}
};

// Two components constrained into one process can never agree on a platform.
class ContradictionError : public Error {
public:
    ContradictionError(std::string groupId, const std::string& msg)
        : Error(msg), groupId_(std::move(groupId)) {}

    const std::string& group_id() const { return groupId_; }

private:
    std::string groupId_;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(std::string groupId, const std::string& msg)
        : Error(msg), groupId_(std::move(groupId)) {}

    const std::string& group_id() const { return groupId_; }

private:
    std::string groupId_;
};

class SearchGuardError : public Error {
public:
    explicit SearchGuardError(const std::string& msg) : Error(msg) {}
};

class DigestMismatchError : public Error {
public:
    explicit DigestMismatchError(const std::string& msg) : Error(msg) {}
};

class PlanInvalidError : public Error {
public:
    explicit PlanInvalidError(const std::string& msg) : Error(msg) {}
};

// Illegal lifecycle transition, e.g. resume on a running process.
class TransitionError : public Error {
public:
    explicit TransitionError(const std::string& msg) : Error(msg) {}
};

// Simulated grid-access middleware refused a job submission.
class MiddlewareError : public Error {
public:
    explicit MiddlewareError(const std::string& msg) : Error(msg) {}
};

class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& msg) : Error(msg) {}
};

} // namespace griddeploy
