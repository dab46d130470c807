#include "moo/lexer.hpp"

#include <cctype>
#include <unordered_map>

namespace moo {

namespace {

const std::unordered_map<std::string, Tok>& keywords() {
    static const std::unordered_map<std::string, Tok> kw = {
        {"class", Tok::KwClass},
        {"interface", Tok::KwInterface},
        {"extends", Tok::KwExtends},
        {"implements", Tok::KwImplements},
        {"builtin", Tok::KwBuiltin},
        {"native", Tok::KwNative},
        {"static", Tok::KwStatic},
        {"final", Tok::KwFinal},
        {"public", Tok::KwPublic},
        {"protected", Tok::KwProtected},
        {"private", Tok::KwPrivate},
        {"int", Tok::KwInt},
        {"long", Tok::KwLong},
        {"bool", Tok::KwBool},
        {"string", Tok::KwString},
        {"ref", Tok::KwRef},
        {"void", Tok::KwVoid},
        {"new", Tok::KwNew},
        {"this", Tok::KwThis},
        {"super", Tok::KwSuper},
        {"if", Tok::KwIf},
        {"else", Tok::KwElse},
        {"while", Tok::KwWhile},
        {"return", Tok::KwReturn},
        {"print", Tok::KwPrint},
        {"true", Tok::KwTrue},
        {"false", Tok::KwFalse},
        {"null", Tok::KwNull},
        {"remote_invoke", Tok::KwRemoteInvoke},
        {"policy_create", Tok::KwPolicyCreate},
        {"policy_discover", Tok::KwPolicyDiscover},
        {"ctor_init", Tok::KwCtorInit},
    };
    return kw;
}

struct Cursor {
    const std::string& src;
    size_t i = 0;
    int line = 1;
    int col = 1;

    bool done() const { return i >= src.size(); }
    char peek(size_t ahead = 0) const {
        return i + ahead < src.size() ? src[i + ahead] : '\0';
    }
    char take() {
        char c = src[i++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }
    Pos pos() const { return {line, col}; }
};

bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_' || c == '$'; }
bool ident_cont(char c) { return ident_start(c) || std::isdigit((unsigned char)c); }

} // namespace

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    Cursor c{src};

    while (!c.done()) {
        char ch = c.peek();
        if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
            c.take();
            continue;
        }
        if (ch == '/' && c.peek(1) == '/') {
            while (!c.done() && c.peek() != '\n') c.take();
            continue;
        }
        if (ch == '/' && c.peek(1) == '*') {
            Pos start = c.pos();
            c.take();
            c.take();
            while (true) {
                if (c.done()) throw ParseError(start, "unterminated block comment");
                if (c.peek() == '*' && c.peek(1) == '/') {
                    c.take();
                    c.take();
                    break;
                }
                c.take();
            }
            continue;
        }

        Pos p = c.pos();
        if (ident_start(ch)) {
            std::string word;
            while (!c.done() && ident_cont(c.peek())) word += c.take();
            auto it = keywords().find(word);
            if (it != keywords().end())
                out.push_back({it->second, word, 0, p});
            else
                out.push_back({Tok::Ident, std::move(word), 0, p});
            continue;
        }
        if (std::isdigit((unsigned char)ch)) {
            uint64_t v = 0;
            while (!c.done() && std::isdigit((unsigned char)c.peek())) {
                v = v * 10 + (uint64_t)(c.take() - '0');
                if (v > 9223372036854775807ull)
                    throw ParseError(p, "integer literal out of range");
            }
            if (!c.done() && (c.peek() == 'l' || c.peek() == 'L')) {
                c.take();
                out.push_back({Tok::LongLit, {}, (int64_t)v, p});
            } else {
                if (v > 2147483647ull)
                    throw ParseError(p, "int literal out of range (use an L suffix for long)");
                out.push_back({Tok::IntLit, {}, (int64_t)v, p});
            }
            if (!c.done() && ident_start(c.peek()))
                throw ParseError(c.pos(), "malformed numeric literal");
            continue;
        }
        if (ch == '"') {
            c.take();
            std::string s;
            while (true) {
                if (c.done()) throw ParseError(p, "unterminated string literal");
                char d = c.take();
                if (d == '"') break;
                if (d == '\n') throw ParseError(p, "unterminated string literal");
                if (d == '\\') {
                    if (c.done()) throw ParseError(p, "unterminated string literal");
                    char e = c.take();
                    switch (e) {
                        case 'n': s += '\n'; break;
                        case 't': s += '\t'; break;
                        case '"': s += '"'; break;
                        case '\\': s += '\\'; break;
                        default:
                            throw ParseError(c.pos(), std::string("unknown escape \\") + e);
                    }
                } else if ((unsigned char)d < 0x20) {
                    throw ParseError(c.pos(), "raw control character in string literal");
                } else {
                    s += d;
                }
            }
            out.push_back({Tok::StrLit, std::move(s), 0, p});
            continue;
        }

        auto two = [&](char a, char b) { return ch == a && c.peek(1) == b; };
        if (two('=', '=')) { c.take(); c.take(); out.push_back({Tok::EqEq, {}, 0, p}); continue; }
        if (two('!', '=')) { c.take(); c.take(); out.push_back({Tok::NotEq, {}, 0, p}); continue; }
        if (two('<', '=')) { c.take(); c.take(); out.push_back({Tok::Le, {}, 0, p}); continue; }
        if (two('>', '=')) { c.take(); c.take(); out.push_back({Tok::Ge, {}, 0, p}); continue; }
        if (two('&', '&')) { c.take(); c.take(); out.push_back({Tok::AndAnd, {}, 0, p}); continue; }
        if (two('|', '|')) { c.take(); c.take(); out.push_back({Tok::OrOr, {}, 0, p}); continue; }

        Tok k;
        switch (ch) {
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case '{': k = Tok::LBrace; break;
            case '}': k = Tok::RBrace; break;
            case ';': k = Tok::Semi; break;
            case ',': k = Tok::Comma; break;
            case '.': k = Tok::Dot; break;
            case '=': k = Tok::Assign; break;
            case '<': k = Tok::Lt; break;
            case '>': k = Tok::Gt; break;
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '/': k = Tok::Slash; break;
            case '%': k = Tok::Percent; break;
            case '!': k = Tok::Bang; break;
            default:
                throw ParseError(p, std::string("unexpected character '") + ch + "'");
        }
        c.take();
        out.push_back({k, {}, 0, p});
    }

    out.push_back({Tok::End, {}, 0, c.pos()});
    return out;
}

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::End: return "end of input";
        case Tok::Ident: return "identifier";
        case Tok::IntLit: return "int literal";
        case Tok::LongLit: return "long literal";
        case Tok::StrLit: return "string literal";
        case Tok::KwClass: return "'class'";
        case Tok::KwInterface: return "'interface'";
        case Tok::KwExtends: return "'extends'";
        case Tok::KwImplements: return "'implements'";
        case Tok::KwBuiltin: return "'builtin'";
        case Tok::KwNative: return "'native'";
        case Tok::KwStatic: return "'static'";
        case Tok::KwFinal: return "'final'";
        case Tok::KwPublic: return "'public'";
        case Tok::KwProtected: return "'protected'";
        case Tok::KwPrivate: return "'private'";
        case Tok::KwInt: return "'int'";
        case Tok::KwLong: return "'long'";
        case Tok::KwBool: return "'bool'";
        case Tok::KwString: return "'string'";
        case Tok::KwRef: return "'ref'";
        case Tok::KwVoid: return "'void'";
        case Tok::KwNew: return "'new'";
        case Tok::KwThis: return "'this'";
        case Tok::KwSuper: return "'super'";
        case Tok::KwIf: return "'if'";
        case Tok::KwElse: return "'else'";
        case Tok::KwWhile: return "'while'";
        case Tok::KwReturn: return "'return'";
        case Tok::KwPrint: return "'print'";
        case Tok::KwTrue: return "'true'";
        case Tok::KwFalse: return "'false'";
        case Tok::KwNull: return "'null'";
        case Tok::KwRemoteInvoke: return "'remote_invoke'";
        case Tok::KwPolicyCreate: return "'policy_create'";
        case Tok::KwPolicyDiscover: return "'policy_discover'";
        case Tok::KwCtorInit: return "'ctor_init'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::Assign: return "'='";
        case Tok::EqEq: return "'=='";
        case Tok::NotEq: return "'!='";
        case Tok::Lt: return "'<'";
        case Tok::Le: return "'<='";
        case Tok::Gt: return "'>'";
        case Tok::Ge: return "'>='";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Percent: return "'%'";
        case Tok::Bang: return "'!'";
        case Tok::AndAnd: return "'&&'";
        case Tok::OrOr: return "'||'";
    }
    return "?";
}

} // namespace moo
