#include "moo/parser.hpp"

#include "moo/lexer.hpp"

#include <set>
#include <utility>

namespace moo {

namespace {

struct Parser {
    std::vector<Token> toks;
    size_t idx = 0;

    const Token& cur() const { return toks[idx]; }
    const Token& peek(size_t ahead = 1) const {
        size_t j = idx + ahead;
        return j < toks.size() ? toks[j] : toks.back();
    }
    bool at(Tok k) const { return cur().kind == k; }
    Token take() { return toks[idx++]; }
    Token expect(Tok k, const char* what) {
        if (!at(k))
            throw ParseError(cur().pos, std::string("expected ") + what + ", found " +
                                            tok_name(cur().kind));
        return take();
    }

    // ---- types ----

    bool at_type_start() const {
        switch (cur().kind) {
            case Tok::KwInt:
            case Tok::KwLong:
            case Tok::KwBool:
            case Tok::KwString:
            case Tok::KwRef:
            case Tok::Ident:
                return true;
            default:
                return false;
        }
    }

    TypeRef parse_type() {
        Token t = take();
        switch (t.kind) {
            case Tok::KwInt: return TypeRef::int_();
            case Tok::KwLong: return TypeRef::long_();
            case Tok::KwBool: return TypeRef::bool_();
            case Tok::KwString: return TypeRef::string_();
            case Tok::KwRef: return TypeRef::handle();
            case Tok::Ident: return TypeRef::named(t.text);
            default:
                throw ParseError(t.pos, std::string("expected a type, found ") +
                                            tok_name(t.kind));
        }
    }

    TypeRef parse_return_type() {
        if (at(Tok::KwVoid)) {
            take();
            return TypeRef::void_();
        }
        return parse_type();
    }

    // ---- expressions ----

    std::vector<ExprPtr> parse_args() {
        std::vector<ExprPtr> args;
        expect(Tok::LParen, "'('");
        if (!at(Tok::RParen)) {
            args.push_back(parse_expr());
            while (at(Tok::Comma)) {
                take();
                args.push_back(parse_expr());
            }
        }
        expect(Tok::RParen, "')'");
        return args;
    }

    ExprPtr mk(Pos p, Expr e) {
        e.pos = p;
        return std::make_unique<Expr>(std::move(e));
    }

    ExprPtr parse_primary() {
        Pos p = cur().pos;
        switch (cur().kind) {
            case Tok::IntLit: return mk(p, {{}, IntLit{(int32_t)take().num}, {}, {}});
            case Tok::LongLit: return mk(p, {{}, LongLit{take().num}, {}, {}});
            case Tok::StrLit: return mk(p, {{}, StrLit{take().text}, {}, {}});
            case Tok::KwTrue: take(); return mk(p, {{}, BoolLit{true}, {}, {}});
            case Tok::KwFalse: take(); return mk(p, {{}, BoolLit{false}, {}, {}});
            case Tok::KwNull: take(); return mk(p, {{}, NullLit{}, {}, {}});
            case Tok::KwThis: take(); return mk(p, {{}, ThisExpr{}, {}, {}});
            case Tok::KwNew: {
                take();
                Token cls = expect(Tok::Ident, "class name after 'new'");
                auto args = parse_args();
                return mk(p, {{}, NewExpr{cls.text, std::move(args)}, {}, {}});
            }
            case Tok::LParen: {
                take();
                ExprPtr e = parse_expr();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::KwRemoteInvoke: {
                take();
                expect(Tok::LParen, "'('");
                Token member = expect(Tok::StrLit, "member name string");
                std::vector<ExprPtr> args;
                while (at(Tok::Comma)) {
                    take();
                    args.push_back(parse_expr());
                }
                expect(Tok::RParen, "')'");
                return mk(p, {{}, IntrinsicCall{Intrinsic::RemoteInvoke, member.text,
                                                std::move(args)}, {}, {}});
            }
            case Tok::KwPolicyCreate:
            case Tok::KwPolicyDiscover: {
                Intrinsic k = at(Tok::KwPolicyCreate) ? Intrinsic::PolicyCreate
                                                      : Intrinsic::PolicyDiscover;
                take();
                expect(Tok::LParen, "'('");
                Token cls = expect(Tok::StrLit, "class name string");
                expect(Tok::RParen, "')'");
                return mk(p, {{}, IntrinsicCall{k, cls.text, {}}, {}, {}});
            }
            case Tok::KwCtorInit: {
                take();
                expect(Tok::LParen, "'('");
                Token cls = expect(Tok::StrLit, "class name string");
                expect(Tok::Comma, "','");
                std::vector<ExprPtr> args;
                args.push_back(parse_expr());
                while (at(Tok::Comma)) {
                    take();
                    args.push_back(parse_expr());
                }
                expect(Tok::RParen, "')'");
                return mk(p, {{}, IntrinsicCall{Intrinsic::CtorInit, cls.text,
                                                std::move(args)}, {}, {}});
            }
            case Tok::Ident: {
                Token id = take();
                if (at(Tok::LParen)) {
                    auto args = parse_args();
                    return mk(p, {{}, CallExpr{nullptr, id.text, std::move(args)}, {}, {}});
                }
                return mk(p, {{}, NameRef{id.text}, {}, {}});
            }
            default:
                throw ParseError(p, std::string("expected an expression, found ") +
                                        tok_name(cur().kind));
        }
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (at(Tok::Dot)) {
            Pos p = take().pos;
            Token member = expect(Tok::Ident, "member name after '.'");
            if (at(Tok::LParen)) {
                auto args = parse_args();
                e = mk(p, {{}, CallExpr{std::move(e), member.text, std::move(args)}, {}, {}});
            } else {
                e = mk(p, {{}, FieldAccess{std::move(e), member.text}, {}, {}});
            }
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (at(Tok::Bang)) {
            Pos p = take().pos;
            return mk(p, {{}, UnaryExpr{UnOp::Not, parse_unary()}, {}, {}});
        }
        if (at(Tok::Minus)) {
            Pos p = take().pos;
            return mk(p, {{}, UnaryExpr{UnOp::Neg, parse_unary()}, {}, {}});
        }
        return parse_postfix();
    }

    ExprPtr parse_mul() {
        ExprPtr e = parse_unary();
        while (at(Tok::Star) || at(Tok::Slash) || at(Tok::Percent)) {
            Token op = take();
            BinOp b = op.kind == Tok::Star    ? BinOp::Mul
                      : op.kind == Tok::Slash ? BinOp::Div
                                              : BinOp::Mod;
            e = mk(op.pos, {{}, BinaryExpr{b, std::move(e), parse_unary()}, {}, {}});
        }
        return e;
    }

    ExprPtr parse_add() {
        ExprPtr e = parse_mul();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            Token op = take();
            BinOp b = op.kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
            e = mk(op.pos, {{}, BinaryExpr{b, std::move(e), parse_mul()}, {}, {}});
        }
        return e;
    }

    ExprPtr parse_rel() {
        ExprPtr e = parse_add();
        while (at(Tok::Lt) || at(Tok::Le) || at(Tok::Gt) || at(Tok::Ge)) {
            Token op = take();
            BinOp b = op.kind == Tok::Lt   ? BinOp::Lt
                      : op.kind == Tok::Le ? BinOp::Le
                      : op.kind == Tok::Gt ? BinOp::Gt
                                           : BinOp::Ge;
            e = mk(op.pos, {{}, BinaryExpr{b, std::move(e), parse_add()}, {}, {}});
        }
        return e;
    }

    ExprPtr parse_eq() {
        ExprPtr e = parse_rel();
        while (at(Tok::EqEq) || at(Tok::NotEq)) {
            Token op = take();
            BinOp b = op.kind == Tok::EqEq ? BinOp::Eq : BinOp::Ne;
            e = mk(op.pos, {{}, BinaryExpr{b, std::move(e), parse_rel()}, {}, {}});
        }
        return e;
    }

    ExprPtr parse_and() {
        ExprPtr e = parse_eq();
        while (at(Tok::AndAnd)) {
            Pos p = take().pos;
            e = mk(p, {{}, BinaryExpr{BinOp::And, std::move(e), parse_eq()}, {}, {}});
        }
        return e;
    }

    ExprPtr parse_expr() {
        ExprPtr e = parse_and();
        while (at(Tok::OrOr)) {
            Pos p = take().pos;
            e = mk(p, {{}, BinaryExpr{BinOp::Or, std::move(e), parse_and()}, {}, {}});
        }
        return e;
    }

    // ---- statements ----

    StmtPtr mks(Pos p, Stmt s) {
        s.pos = p;
        return std::make_unique<Stmt>(std::move(s));
    }

    Block parse_block() {
        expect(Tok::LBrace, "'{'");
        Block b;
        while (!at(Tok::RBrace)) {
            if (at(Tok::End)) throw ParseError(cur().pos, "unexpected end of input in block");
            b.stmts.push_back(parse_stmt());
        }
        take();
        return b;
    }

    StmtPtr parse_stmt() {
        Pos p = cur().pos;
        switch (cur().kind) {
            case Tok::LBrace:
                return mks(p, {{}, BlockStmt{parse_block()}});
            case Tok::KwIf: {
                take();
                expect(Tok::LParen, "'('");
                ExprPtr cond = parse_expr();
                expect(Tok::RParen, "')'");
                Block then_blk = parse_block();
                std::optional<Block> else_blk;
                if (at(Tok::KwElse)) {
                    take();
                    if (at(Tok::KwIf)) {
                        Block chain;
                        chain.stmts.push_back(parse_stmt());
                        else_blk = std::move(chain);
                    } else {
                        else_blk = parse_block();
                    }
                }
                return mks(p, {{}, IfStmt{std::move(cond), std::move(then_blk),
                                          std::move(else_blk)}});
            }
            case Tok::KwWhile: {
                take();
                expect(Tok::LParen, "'('");
                ExprPtr cond = parse_expr();
                expect(Tok::RParen, "')'");
                Block body = parse_block();
                return mks(p, {{}, WhileStmt{std::move(cond), std::move(body)}});
            }
            case Tok::KwReturn: {
                take();
                ExprPtr e;
                if (!at(Tok::Semi)) e = parse_expr();
                expect(Tok::Semi, "';'");
                return mks(p, {{}, ReturnStmt{std::move(e)}});
            }
            case Tok::KwPrint: {
                take();
                expect(Tok::LParen, "'('");
                ExprPtr e = parse_expr();
                expect(Tok::RParen, "')'");
                expect(Tok::Semi, "';'");
                return mks(p, {{}, PrintStmt{std::move(e)}});
            }
            case Tok::KwSuper: {
                take();
                auto args = parse_args();
                expect(Tok::Semi, "';'");
                return mks(p, {{}, SuperCall{std::move(args)}});
            }
            default:
                break;
        }

        // Local declaration: a type followed by an identifier.
        bool local_decl = false;
        switch (cur().kind) {
            case Tok::KwInt:
            case Tok::KwLong:
            case Tok::KwBool:
            case Tok::KwString:
            case Tok::KwRef:
                local_decl = true;
                break;
            case Tok::Ident:
                local_decl = peek().kind == Tok::Ident;
                break;
            default:
                break;
        }
        if (local_decl) {
            TypeRef t = parse_type();
            Token name = expect(Tok::Ident, "variable name");
            ExprPtr init;
            if (at(Tok::Assign)) {
                take();
                init = parse_expr();
            }
            expect(Tok::Semi, "';'");
            return mks(p, {{}, LocalDecl{std::move(t), name.text, std::move(init)}});
        }

        ExprPtr e = parse_expr();
        if (at(Tok::Assign)) {
            take();
            if (!e->is<NameRef>() && !e->is<FieldAccess>())
                throw ParseError(p, "invalid assignment target");
            ExprPtr rhs = parse_expr();
            expect(Tok::Semi, "';'");
            return mks(p, {{}, AssignStmt{std::move(e), std::move(rhs)}});
        }
        expect(Tok::Semi, "';'");
        return mks(p, {{}, ExprStmt{std::move(e)}});
    }

    // ---- declarations ----

    struct Mods {
        std::optional<Visibility> vis;
        bool is_static = false;
        bool is_final = false;
        bool is_native = false;
        Pos pos;
    };

    Mods parse_mods() {
        Mods m;
        m.pos = cur().pos;
        while (true) {
            switch (cur().kind) {
                case Tok::KwPublic:
                case Tok::KwProtected:
                case Tok::KwPrivate: {
                    if (m.vis) throw ParseError(cur().pos, "duplicate visibility modifier");
                    Tok k = take().kind;
                    m.vis = k == Tok::KwPublic      ? Visibility::Public
                            : k == Tok::KwProtected ? Visibility::Protected
                                                    : Visibility::Private;
                    break;
                }
                case Tok::KwStatic:
                    // `static {` introduces the initialiser block, not a modifier.
                    if (peek().kind == Tok::LBrace) return m;
                    if (m.is_static) throw ParseError(cur().pos, "duplicate 'static'");
                    take();
                    m.is_static = true;
                    break;
                case Tok::KwFinal:
                    if (m.is_final) throw ParseError(cur().pos, "duplicate 'final'");
                    take();
                    m.is_final = true;
                    break;
                case Tok::KwNative:
                    if (m.is_native) throw ParseError(cur().pos, "duplicate 'native'");
                    take();
                    m.is_native = true;
                    break;
                default:
                    return m;
            }
        }
    }

    std::vector<Param> parse_params() {
        std::vector<Param> params;
        expect(Tok::LParen, "'('");
        if (!at(Tok::RParen)) {
            while (true) {
                TypeRef t = parse_type();
                Token n = expect(Tok::Ident, "parameter name");
                for (const auto& q : params)
                    if (q.name == n.text)
                        throw ParseError(n.pos, "duplicate parameter '" + n.text + "'");
                params.push_back({std::move(t), n.text});
                if (!at(Tok::Comma)) break;
                take();
            }
        }
        expect(Tok::RParen, "')'");
        return params;
    }

    ClassDecl parse_class(bool is_builtin) {
        ClassDecl cls;
        cls.is_builtin = is_builtin;
        cls.pos = expect(Tok::KwClass, "'class'").pos;
        cls.name = expect(Tok::Ident, "class name").text;
        if (at(Tok::KwExtends)) {
            take();
            cls.superclass = expect(Tok::Ident, "superclass name").text;
        }
        if (at(Tok::KwImplements)) {
            take();
            cls.implements_iface = expect(Tok::Ident, "interface name").text;
        }
        expect(Tok::LBrace, "'{'");

        std::vector<StmtPtr> static_init_stmts;
        bool saw_static_block = false;
        std::set<std::string> field_names, static_field_names;
        std::set<std::pair<std::string, size_t>> method_keys, static_method_keys;
        std::set<size_t> ctor_arities;

        while (!at(Tok::RBrace)) {
            if (at(Tok::End))
                throw ParseError(cur().pos, "unexpected end of input in class body");

            // static initialiser block
            if (at(Tok::KwStatic) && peek().kind == Tok::LBrace) {
                Pos p = take().pos;
                if (is_builtin)
                    throw ParseError(p, "builtin classes cannot have a static initialiser");
                if (saw_static_block)
                    throw ParseError(p, "duplicate static initialiser block");
                saw_static_block = true;
                Block b = parse_block();
                for (auto& s : b.stmts) static_init_stmts.push_back(std::move(s));
                continue;
            }

            Mods m = parse_mods();
            Visibility vis = m.vis.value_or(Visibility::Public);

            // constructor: the class name immediately followed by '('
            if (at(Tok::Ident) && cur().text == cls.name && peek().kind == Tok::LParen) {
                if (m.is_static || m.is_final || m.is_native)
                    throw ParseError(cur().pos, "invalid modifier on constructor");
                CtorDecl ct;
                ct.pos = take().pos;
                ct.vis = vis;
                ct.params = parse_params();
                if (!ctor_arities.insert(ct.params.size()).second)
                    throw ParseError(ct.pos, "duplicate constructor arity in class '" +
                                                 cls.name + "'");
                if (is_builtin) {
                    expect(Tok::Semi, "';' (builtin members have no bodies)");
                } else {
                    ct.body = parse_block();
                }
                cls.ctors.push_back(std::move(ct));
                continue;
            }

            Pos decl_pos = cur().pos;
            TypeRef t = at(Tok::KwVoid) ? (take(), TypeRef::void_()) : parse_type();
            Token name = expect(Tok::Ident, "member name");

            if (at(Tok::LParen)) {
                MethodDecl md;
                md.pos = decl_pos;
                md.name = name.text;
                md.ret = t;
                md.vis = vis;
                md.is_static = m.is_static;
                md.is_native = m.is_native || is_builtin;
                if (m.is_final) throw ParseError(decl_pos, "'final' is not valid on methods");
                md.params = parse_params();
                auto& keys = md.is_static ? static_method_keys : method_keys;
                if (!keys.insert({md.name, md.params.size()}).second)
                    throw ParseError(decl_pos, "duplicate declaration of method '" +
                                                   md.name + "' in class '" + cls.name + "'");
                if (md.is_native) {
                    expect(Tok::Semi, "';' after native method signature");
                } else {
                    md.body = parse_block();
                }
                (md.is_static ? cls.static_methods : cls.methods).push_back(std::move(md));
                continue;
            }

            // field
            if (m.is_native) throw ParseError(decl_pos, "'native' is not valid on fields");
            if (t.is_void()) throw ParseError(decl_pos, "fields cannot have type void");
            FieldDecl fd;
            fd.pos = decl_pos;
            fd.name = name.text;
            fd.type = t;
            fd.vis = vis;
            fd.is_final = m.is_final;
            fd.is_static = m.is_static;
            auto& names = fd.is_static ? static_field_names : field_names;
            if (!names.insert(fd.name).second)
                throw ParseError(decl_pos, "duplicate declaration of field '" + fd.name +
                                               "' in class '" + cls.name + "'");
            if (at(Tok::Assign)) {
                Pos ap = take().pos;
                if (!fd.is_static)
                    throw ParseError(ap, "instance field initialisers are not supported");
                if (is_builtin)
                    throw ParseError(ap, "builtin fields cannot have initialisers");
                ExprPtr init = parse_expr();
                Expr lhs;
                lhs.pos = ap;
                lhs.node = NameRef{fd.name};
                Stmt st;
                st.pos = ap;
                st.node = AssignStmt{std::make_unique<Expr>(std::move(lhs)), std::move(init)};
                static_init_stmts.push_back(std::make_unique<Stmt>(std::move(st)));
            }
            expect(Tok::Semi, "';'");
            (fd.is_static ? cls.static_fields : cls.fields).push_back(std::move(fd));
        }
        take();  // RBrace

        if (!static_init_stmts.empty())
            cls.static_init = Block{std::move(static_init_stmts)};
        return cls;
    }

    InterfaceDecl parse_interface() {
        InterfaceDecl ifc;
        ifc.pos = expect(Tok::KwInterface, "'interface'").pos;
        ifc.name = expect(Tok::Ident, "interface name").text;
        if (at(Tok::KwExtends)) {
            take();
            ifc.extends_iface = expect(Tok::Ident, "interface name").text;
        }
        expect(Tok::LBrace, "'{'");
        std::set<std::pair<std::string, size_t>> keys;
        while (!at(Tok::RBrace)) {
            if (at(Tok::End))
                throw ParseError(cur().pos, "unexpected end of input in interface body");
            MethodDecl md;
            md.pos = cur().pos;
            md.ret = at(Tok::KwVoid) ? (take(), TypeRef::void_()) : parse_type();
            md.name = expect(Tok::Ident, "method name").text;
            md.params = parse_params();
            md.vis = Visibility::Public;
            if (!keys.insert({md.name, md.params.size()}).second)
                throw ParseError(md.pos, "duplicate declaration of method '" + md.name +
                                             "' in interface '" + ifc.name + "'");
            expect(Tok::Semi, "';'");
            ifc.methods.push_back(std::move(md));
        }
        take();
        return ifc;
    }

    Program parse() {
        Program prog;
        std::set<std::string> decl_names;
        while (!at(Tok::End)) {
            Decl d = [&]() -> Decl {
                if (at(Tok::KwBuiltin)) {
                    take();
                    return parse_class(true);
                }
                if (at(Tok::KwClass)) return parse_class(false);
                if (at(Tok::KwInterface)) return parse_interface();
                throw ParseError(cur().pos,
                                 std::string("expected a class or interface declaration, "
                                             "found ") +
                                     tok_name(cur().kind));
            }();
            const std::string& n = decl_name(d);
            if (!decl_names.insert(n).second)
                throw ParseError(std::visit([](const auto& x) { return x.pos; }, d),
                                 "duplicate declaration of '" + n + "'");
            prog.decls.push_back(std::move(d));
        }

        // Entry convention: the unique public static void main() with no params.
        int candidates = 0;
        for (const auto& d : prog.decls) {
            auto* c = std::get_if<ClassDecl>(&d);
            if (!c) continue;
            for (const auto& m : c->static_methods) {
                if (m.name == "main" && m.params.empty() && m.ret.is_void() &&
                    m.vis == Visibility::Public) {
                    ++candidates;
                    prog.entry_class = c->name;
                    prog.entry_method = m.name;
                }
            }
        }
        if (candidates != 1) {
            prog.entry_class.clear();
            prog.entry_method.clear();
        }
        return prog;
    }
};

} // namespace

Program parse_program(const std::string& src) {
    Parser p;
    p.toks = lex(src);
    return p.parse();
}

} // namespace moo
