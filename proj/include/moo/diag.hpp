#pragma once

#include <stdexcept>
#include <string>

namespace moo {

/// Source position, 1-based. {0,0} marks synthesised nodes.
struct Pos {
    int line = 0;
    int col = 0;
};

inline std::string pos_str(Pos p) {
    return std::to_string(p.line) + ":" + std::to_string(p.col);
}

struct ParseError : std::runtime_error {
    Pos pos;
    ParseError(Pos p, const std::string& msg)
        : std::runtime_error(pos_str(p) + ": " + msg), pos(p) {}
};

struct CheckError : std::runtime_error {
    Pos pos;
    CheckError(Pos p, const std::string& msg)
        : std::runtime_error(pos_str(p) + ": " + msg), pos(p) {}
};

enum class RunErrorKind {
    General,    // null dereference, budget exhaustion, division by zero, ...
    Transport,  // node unreachable, connection dropped, malformed frame
};

struct RuntimeError : std::runtime_error {
    Pos pos;
    RunErrorKind kind;
    RuntimeError(Pos p, const std::string& msg, RunErrorKind k = RunErrorKind::General)
        : std::runtime_error(msg), pos(p), kind(k) {}
};

} // namespace moo
