#pragma once

#include "moo/diag.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace moo {

enum class Tok {
    End,
    Ident,
    IntLit,   // value in `num`
    LongLit,  // value in `num`
    StrLit,   // decoded text in `text`
    // keywords
    KwClass, KwInterface, KwExtends, KwImplements, KwBuiltin, KwNative,
    KwStatic, KwFinal, KwPublic, KwProtected, KwPrivate,
    KwInt, KwLong, KwBool, KwString, KwRef, KwVoid,
    KwNew, KwThis, KwSuper, KwIf, KwElse, KwWhile, KwReturn, KwPrint,
    KwTrue, KwFalse, KwNull,
    KwRemoteInvoke, KwPolicyCreate, KwPolicyDiscover, KwCtorInit,
    // punctuation / operators
    LParen, RParen, LBrace, RBrace, Semi, Comma, Dot, Assign,
    EqEq, NotEq, Lt, Le, Gt, Ge, Plus, Minus, Star, Slash, Percent,
    Bang, AndAnd, OrOr,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;   // identifier spelling / string contents
    int64_t num = 0;    // integer literals
    Pos pos;
};

/// Tokenise a whole compilation unit. Throws ParseError on malformed input
/// (bad escape, unterminated string, out-of-range literal, stray character).
std::vector<Token> lex(const std::string& src);

const char* tok_name(Tok t);

} // namespace moo
