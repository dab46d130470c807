#include "moo/printer.hpp"

#include <sstream>

namespace moo {

namespace {

std::string escape_string(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    out += '"';
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

const char* binop_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "%";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "&&";
        case BinOp::Or: return "||";
    }
    return "?";
}

int binop_prec(BinOp op) {
    switch (op) {
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Eq:
        case BinOp::Ne: return 3;
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge: return 4;
        case BinOp::Add:
        case BinOp::Sub: return 5;
        case BinOp::Mul:
        case BinOp::Div:
        case BinOp::Mod: return 6;
    }
    return 0;
}

constexpr int kUnaryPrec = 7;
constexpr int kPostfixPrec = 8;
constexpr int kPrimaryPrec = 9;

struct Printer {
    std::ostringstream out;

    void indent(int n) {
        for (int i = 0; i < n; ++i) out << "    ";
    }

    // ---- expressions ----

    int prec_of(const Expr& e) {
        if (auto* b = e.as<BinaryExpr>()) return binop_prec(b->op);
        if (e.is<UnaryExpr>()) return kUnaryPrec;
        if (e.is<FieldAccess>()) return kPostfixPrec;
        if (auto* c = e.as<CallExpr>()) return c->target ? kPostfixPrec : kPrimaryPrec;
        return kPrimaryPrec;
    }

    void expr(const Expr& e, int min_prec = 0) {
        int p = prec_of(e);
        bool parens = p < min_prec;
        if (parens) out << '(';
        std::visit([&](const auto& n) { expr_node(n); }, e.node);
        if (parens) out << ')';
    }

    void args(const std::vector<ExprPtr>& xs) {
        out << '(';
        for (size_t i = 0; i < xs.size(); ++i) {
            if (i) out << ", ";
            expr(*xs[i]);
        }
        out << ')';
    }

    void expr_node(const IntLit& n) { out << n.value; }
    void expr_node(const LongLit& n) { out << n.value << 'L'; }
    void expr_node(const BoolLit& n) { out << (n.value ? "true" : "false"); }
    void expr_node(const StrLit& n) { out << escape_string(n.value); }
    void expr_node(const NullLit&) { out << "null"; }
    void expr_node(const ThisExpr&) { out << "this"; }
    void expr_node(const NameRef& n) { out << n.name; }

    void expr_node(const FieldAccess& n) {
        expr(*n.target, kPostfixPrec);
        out << '.' << n.field;
    }

    void expr_node(const CallExpr& n) {
        if (n.target) {
            expr(*n.target, kPostfixPrec);
            out << '.';
        }
        out << n.name;
        args(n.args);
    }

    void expr_node(const NewExpr& n) {
        out << "new " << n.class_name;
        args(n.args);
    }

    void expr_node(const UnaryExpr& n) {
        out << (n.op == UnOp::Not ? '!' : '-');
        // Parenthesise a nested unary so `--x` / `!!b` never appear.
        expr(*n.operand, n.operand->is<UnaryExpr>() ? kPrimaryPrec : kUnaryPrec);
    }

    void expr_node(const BinaryExpr& n) {
        int p = binop_prec(n.op);
        expr(*n.lhs, p);
        out << ' ' << binop_text(n.op) << ' ';
        expr(*n.rhs, p + 1);
    }

    void expr_node(const IntrinsicCall& n) {
        switch (n.kind) {
            case Intrinsic::RemoteInvoke: out << "remote_invoke"; break;
            case Intrinsic::PolicyCreate: out << "policy_create"; break;
            case Intrinsic::PolicyDiscover: out << "policy_discover"; break;
            case Intrinsic::CtorInit: out << "ctor_init"; break;
        }
        out << '(' << escape_string(n.symbol);
        for (const auto& a : n.args) {
            out << ", ";
            expr(*a);
        }
        out << ')';
    }

    // ---- statements ----

    void block_lines(const Block& b, int ind) {
        for (const auto& s : b.stmts) stmt(*s, ind);
    }

    void stmt(const Stmt& s, int ind) {
        indent(ind);
        std::visit([&](const auto& n) { stmt_node(n, ind); }, s.node);
        out << '\n';
    }

    // Renders a statement without indentation or trailing newline; only valid
    // for the simple kinds (used for single-line bodies).
    void stmt_inline(const Stmt& s) {
        std::visit([&](const auto& n) { stmt_node(n, 0); }, s.node);
    }

    void stmt_node(const LocalDecl& n, int) {
        out << type_name(n.type) << ' ' << n.name;
        if (n.init) {
            out << " = ";
            expr(*n.init);
        }
        out << ';';
    }

    void stmt_node(const AssignStmt& n, int) {
        expr(*n.lhs);
        out << " = ";
        expr(*n.rhs);
        out << ';';
    }

    void stmt_node(const ExprStmt& n, int) {
        expr(*n.expr);
        out << ';';
    }

    void stmt_node(const PrintStmt& n, int) {
        out << "print(";
        expr(*n.expr);
        out << ");";
    }

    void stmt_node(const ReturnStmt& n, int) {
        out << "return";
        if (n.expr) {
            out << ' ';
            expr(*n.expr);
        }
        out << ';';
    }

    void stmt_node(const SuperCall& n, int) {
        out << "super";
        args(n.args);
        out << ';';
    }

    void stmt_node(const BlockStmt& n, int ind) {
        out << "{\n";
        block_lines(n.block, ind + 1);
        indent(ind);
        out << '}';
    }

    void stmt_node(const WhileStmt& n, int ind) {
        out << "while (";
        expr(*n.cond);
        out << ") {\n";
        block_lines(n.body, ind + 1);
        indent(ind);
        out << '}';
    }

    void stmt_node(const IfStmt& n, int ind) {
        out << "if (";
        expr(*n.cond);
        out << ") {\n";
        block_lines(n.then_block, ind + 1);
        indent(ind);
        out << '}';
        const IfStmt* cur = &n;
        while (cur->else_block) {
            const Block& eb = *cur->else_block;
            // Re-sugar `else { if ... }` with a lone nested if into `else if`.
            if (eb.stmts.size() == 1 && eb.stmts[0]->is<IfStmt>()) {
                const IfStmt& next = *eb.stmts[0]->as<IfStmt>();
                out << " else if (";
                expr(*next.cond);
                out << ") {\n";
                block_lines(next.then_block, ind + 1);
                indent(ind);
                out << '}';
                cur = &next;
            } else {
                out << " else {\n";
                block_lines(eb, ind + 1);
                indent(ind);
                out << '}';
                break;
            }
        }
    }

    // ---- members ----

    bool is_simple(const Stmt& s) {
        return !s.is<IfStmt>() && !s.is<WhileStmt>() && !s.is<BlockStmt>();
    }

    void body(const Block& b, int ind) {
        if (b.stmts.empty()) {
            out << "{ }";
            return;
        }
        if (b.stmts.size() == 1 && is_simple(*b.stmts[0])) {
            out << "{ ";
            stmt_inline(*b.stmts[0]);
            out << " }";
            return;
        }
        out << "{\n";
        block_lines(b, ind + 1);
        indent(ind);
        out << '}';
    }

    void visibility(Visibility v) {
        switch (v) {
            case Visibility::Public: out << "public "; break;
            case Visibility::Protected: out << "protected "; break;
            case Visibility::Private: out << "private "; break;
        }
    }

    void field(const FieldDecl& f) {
        indent(1);
        visibility(f.vis);
        if (f.is_static) out << "static ";
        if (f.is_final) out << "final ";
        out << type_name(f.type) << ' ' << f.name << ";\n";
    }

    void params(const std::vector<Param>& ps) {
        out << '(';
        for (size_t i = 0; i < ps.size(); ++i) {
            if (i) out << ", ";
            out << type_name(ps[i].type) << ' ' << ps[i].name;
        }
        out << ')';
    }

    void method(const MethodDecl& m, bool in_builtin) {
        indent(1);
        visibility(m.vis);
        if (m.is_static) out << "static ";
        if (m.is_native && !in_builtin) out << "native ";
        out << type_name(m.ret) << ' ' << m.name;
        params(m.params);
        if (m.body) {
            out << ' ';
            body(*m.body, 1);
        } else {
            out << ';';
        }
        out << '\n';
    }

    void ctor(const CtorDecl& c, const std::string& cls_name) {
        indent(1);
        visibility(c.vis);
        out << cls_name;
        params(c.params);
        if (c.body) {
            out << ' ';
            body(*c.body, 1);
        } else {
            out << ';';
        }
        out << '\n';
    }

    void class_decl(const ClassDecl& c) {
        if (c.is_builtin) out << "builtin ";
        out << "class " << c.name;
        if (c.superclass) out << " extends " << *c.superclass;
        if (c.implements_iface) out << " implements " << *c.implements_iface;
        out << " {\n";

        bool any = false;
        auto gap = [&]() {
            if (any) out << '\n';
            any = true;
        };

        if (!c.fields.empty()) {
            gap();
            for (const auto& f : c.fields) field(f);
        }
        for (const auto& ct : c.ctors) {
            gap();
            ctor(ct, c.name);
        }
        for (const auto& m : c.methods) {
            gap();
            method(m, c.is_builtin);
        }
        if (!c.static_fields.empty()) {
            gap();
            for (const auto& f : c.static_fields) field(f);
        }
        if (c.static_init) {
            gap();
            indent(1);
            out << "static ";
            body(*c.static_init, 1);
            out << '\n';
        }
        for (const auto& m : c.static_methods) {
            gap();
            method(m, c.is_builtin);
        }
        out << "}\n";
    }

    void interface_decl(const InterfaceDecl& i) {
        out << "interface " << i.name;
        if (i.extends_iface) out << " extends " << *i.extends_iface;
        out << " {\n";
        for (const auto& m : i.methods) {
            indent(1);
            out << type_name(m.ret) << ' ' << m.name;
            params(m.params);
            out << ";\n";
        }
        out << "}\n";
    }
};

} // namespace

std::string print_expr(const Expr& e) {
    Printer p;
    p.expr(e);
    return p.out.str();
}

std::string print_stmt(const Stmt& s, int indent) {
    Printer p;
    p.stmt(s, indent);
    return p.out.str();
}

std::string print_decl(const Decl& d) {
    Printer p;
    if (auto* c = std::get_if<ClassDecl>(&d))
        p.class_decl(*c);
    else
        p.interface_decl(std::get<InterfaceDecl>(d));
    return p.out.str();
}

std::string print_program(const Program& p) {
    Printer pr;
    bool first = true;
    for (const auto& d : p.decls) {
        if (!first) pr.out << '\n';
        first = false;
        if (auto* c = std::get_if<ClassDecl>(&d))
            pr.class_decl(*c);
        else
            pr.interface_decl(std::get<InterfaceDecl>(d));
    }
    return pr.out.str();
}

} // namespace moo
