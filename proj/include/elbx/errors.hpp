#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace elbx {

// Base class for all toolkit errors so the CLI can map them to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    enum class Kind { Syntax, RejectedConstruct };

    ParseError(Kind kind, int line, int column, const std::string& msg)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          kind(kind), line(line), column(column) {}

    Kind kind;
    int line;
    int column;
};

class SerializationError : public Error {
public:
    explicit SerializationError(const std::string& msg) : Error(msg) {}
};

class InconsistentKbError : public Error {
public:
    InconsistentKbError() : Error("knowledge base is inconsistent") {}
};

class NotEntailedError : public Error {
public:
    explicit NotEntailedError(const std::string& msg) : Error(msg) {}
};

// The (kb, concept, fact, foil) tuple is not a contrastive problem.
class NotAProblemError : public Error {
public:
    enum class Side { Fact, Foil };

    NotAProblemError(Side side, const std::string& msg) : Error(msg), side(side) {}

    Side side;
};

class SpaceTooLargeError : public Error {
public:
    explicit SpaceTooLargeError(const std::string& msg) : Error(msg) {}
};

class InvalidCeError : public Error {
public:
    explicit InvalidCeError(const std::string& msg) : Error(msg) {}
};

class TimeoutError : public Error {
public:
    TimeoutError() : Error("deadline exceeded") {}
};

} // namespace elbx
