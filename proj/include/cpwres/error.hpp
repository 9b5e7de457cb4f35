#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpwres {

// Every library failure derives from Error; kind() drives CLI exit codes.
class Error : public std::runtime_error {
public:
    enum class Kind { validation, infeasible, io, numerical };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct InvalidGeometry : Error {
    explicit InvalidGeometry(const std::string& w) : Error(Kind::validation, w) {}
};
struct InvalidSubstrate : Error {
    explicit InvalidSubstrate(const std::string& w) : Error(Kind::validation, w) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(Kind::validation, w) {}
};
struct PoleError : Error {
    explicit PoleError(const std::string& w) : Error(Kind::validation, w) {}
};
struct NoSolution : Error {
    explicit NoSolution(const std::string& w) : Error(Kind::infeasible, w) {}
};
struct DesignInfeasible : Error {
    explicit DesignInfeasible(const std::string& w) : Error(Kind::infeasible, w) {}
};
struct NotFound : Error {
    explicit NotFound(const std::string& w) : Error(Kind::numerical, w) {}
};
struct ResolutionError : Error {
    explicit ResolutionError(const std::string& w) : Error(Kind::numerical, w) {}
};
struct DegenerateError : Error {
    explicit DegenerateError(const std::string& w) : Error(Kind::numerical, w) {}
};
struct InsufficientSpan : Error {
    explicit InsufficientSpan(const std::string& w) : Error(Kind::validation, w) {}
};
struct NoResonance : Error {
    explicit NoResonance(const std::string& w) : Error(Kind::numerical, w) {}
};
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& w) : Error(Kind::numerical, w) {}
};
struct InconsistentQ : Error {
    explicit InconsistentQ(const std::string& w) : Error(Kind::validation, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(Kind::io, w) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& msg)
        : Error(Kind::validation, source + (line > 0 ? ": line " + std::to_string(line) : std::string()) + ": " + msg),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace cpwres
