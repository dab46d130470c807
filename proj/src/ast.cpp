#include "moo/ast.hpp"

namespace moo {

std::string type_name(const TypeRef& t) {
    switch (t.kind) {
        case TypeKind::Int: return "int";
        case TypeKind::Long: return "long";
        case TypeKind::Bool: return "bool";
        case TypeKind::String: return "string";
        case TypeKind::Void: return "void";
        case TypeKind::Handle: return "ref";
        case TypeKind::Null: return "null";
        case TypeKind::Named: return t.name;
    }
    return "?";
}

const ClassDecl* Program::find_class(const std::string& name) const {
    for (const auto& d : decls)
        if (auto* c = std::get_if<ClassDecl>(&d))
            if (c->name == name) return c;
    return nullptr;
}

const InterfaceDecl* Program::find_interface(const std::string& name) const {
    for (const auto& d : decls)
        if (auto* i = std::get_if<InterfaceDecl>(&d))
            if (i->name == name) return i;
    return nullptr;
}

// ---------------------------------------------------------------------------
// clone

static std::vector<ExprPtr> clone_exprs(const std::vector<ExprPtr>& v) {
    std::vector<ExprPtr> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(clone(*e));
    return out;
}

ExprPtr clone(const Expr& e) {
    Expr out;
    out.pos = e.pos;
    out.type = e.type;
    out.res = e.res;
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, FieldAccess>) {
                out.node = FieldAccess{n.target ? clone(*n.target) : nullptr, n.field};
            } else if constexpr (std::is_same_v<T, CallExpr>) {
                out.node = CallExpr{n.target ? clone(*n.target) : nullptr, n.name,
                                    clone_exprs(n.args)};
            } else if constexpr (std::is_same_v<T, NewExpr>) {
                out.node = NewExpr{n.class_name, clone_exprs(n.args)};
            } else if constexpr (std::is_same_v<T, UnaryExpr>) {
                out.node = UnaryExpr{n.op, clone(*n.operand)};
            } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                out.node = BinaryExpr{n.op, clone(*n.lhs), clone(*n.rhs)};
            } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
                out.node = IntrinsicCall{n.kind, n.symbol, clone_exprs(n.args)};
            } else {
                out.node = n;  // leaf nodes copy directly
            }
        },
        e.node);
    return std::make_unique<Expr>(std::move(out));
}

Block clone(const Block& b) {
    Block out;
    out.stmts.reserve(b.stmts.size());
    for (const auto& s : b.stmts) out.stmts.push_back(clone(*s));
    return out;
}

StmtPtr clone(const Stmt& s) {
    Stmt out;
    out.pos = s.pos;
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, LocalDecl>) {
                out.node = LocalDecl{n.type, n.name, n.init ? clone(*n.init) : nullptr};
            } else if constexpr (std::is_same_v<T, AssignStmt>) {
                out.node = AssignStmt{clone(*n.lhs), clone(*n.rhs)};
            } else if constexpr (std::is_same_v<T, ExprStmt>) {
                out.node = ExprStmt{clone(*n.expr)};
            } else if constexpr (std::is_same_v<T, PrintStmt>) {
                out.node = PrintStmt{clone(*n.expr)};
            } else if constexpr (std::is_same_v<T, ReturnStmt>) {
                out.node = ReturnStmt{n.expr ? clone(*n.expr) : nullptr};
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                IfStmt i{clone(*n.cond), clone(n.then_block), std::nullopt};
                if (n.else_block) i.else_block = clone(*n.else_block);
                out.node = std::move(i);
            } else if constexpr (std::is_same_v<T, WhileStmt>) {
                out.node = WhileStmt{clone(*n.cond), clone(n.body)};
            } else if constexpr (std::is_same_v<T, SuperCall>) {
                out.node = SuperCall{clone_exprs(n.args)};
            } else if constexpr (std::is_same_v<T, BlockStmt>) {
                out.node = BlockStmt{clone(n.block)};
            }
        },
        s.node);
    return std::make_unique<Stmt>(std::move(out));
}

MethodDecl clone(const MethodDecl& m) {
    MethodDecl out;
    out.pos = m.pos;
    out.name = m.name;
    out.params = m.params;
    out.ret = m.ret;
    out.vis = m.vis;
    out.is_static = m.is_static;
    out.is_native = m.is_native;
    if (m.body) out.body = clone(*m.body);
    return out;
}

CtorDecl clone(const CtorDecl& c) {
    CtorDecl out;
    out.pos = c.pos;
    out.params = c.params;
    out.vis = c.vis;
    if (c.body) out.body = clone(*c.body);
    return out;
}

ClassDecl clone(const ClassDecl& c) {
    ClassDecl out;
    out.pos = c.pos;
    out.name = c.name;
    out.superclass = c.superclass;
    out.implements_iface = c.implements_iface;
    out.is_builtin = c.is_builtin;
    out.fields = c.fields;
    out.static_fields = c.static_fields;
    for (const auto& ct : c.ctors) out.ctors.push_back(clone(ct));
    for (const auto& m : c.methods) out.methods.push_back(clone(m));
    for (const auto& m : c.static_methods) out.static_methods.push_back(clone(m));
    if (c.static_init) out.static_init = clone(*c.static_init);
    return out;
}

InterfaceDecl clone(const InterfaceDecl& i) {
    InterfaceDecl out;
    out.pos = i.pos;
    out.name = i.name;
    out.extends_iface = i.extends_iface;
    for (const auto& m : i.methods) out.methods.push_back(clone(m));
    return out;
}

Program clone(const Program& p) {
    Program out;
    out.entry_class = p.entry_class;
    out.entry_method = p.entry_method;
    out.decls.reserve(p.decls.size());
    for (const auto& d : p.decls) {
        if (auto* c = std::get_if<ClassDecl>(&d))
            out.decls.emplace_back(clone(*c));
        else
            out.decls.emplace_back(clone(std::get<InterfaceDecl>(d)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// structural equality

static bool eq_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!structurally_equal(*a[i], *b[i])) return false;
    return true;
}

static bool eq_opt_expr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return structurally_equal(*a, *b);
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, IntLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, LongLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, BoolLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, StrLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, NullLit>) return true;
            else if constexpr (std::is_same_v<T, ThisExpr>) return true;
            else if constexpr (std::is_same_v<T, NameRef>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, FieldAccess>)
                return x.field == y.field && eq_opt_expr(x.target, y.target);
            else if constexpr (std::is_same_v<T, CallExpr>)
                return x.name == y.name && eq_opt_expr(x.target, y.target) &&
                       eq_exprs(x.args, y.args);
            else if constexpr (std::is_same_v<T, NewExpr>)
                return x.class_name == y.class_name && eq_exprs(x.args, y.args);
            else if constexpr (std::is_same_v<T, UnaryExpr>)
                return x.op == y.op && structurally_equal(*x.operand, *y.operand);
            else if constexpr (std::is_same_v<T, BinaryExpr>)
                return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) &&
                       structurally_equal(*x.rhs, *y.rhs);
            else if constexpr (std::is_same_v<T, IntrinsicCall>)
                return x.kind == y.kind && x.symbol == y.symbol && eq_exprs(x.args, y.args);
            else
                return false;
        },
        a.node);
}

bool structurally_equal(const Block& a, const Block& b) {
    if (a.stmts.size() != b.stmts.size()) return false;
    for (size_t i = 0; i < a.stmts.size(); ++i)
        if (!structurally_equal(*a.stmts[i], *b.stmts[i])) return false;
    return true;
}

static bool eq_opt_block(const std::optional<Block>& a, const std::optional<Block>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || structurally_equal(*a, *b);
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, LocalDecl>)
                return x.type == y.type && x.name == y.name && eq_opt_expr(x.init, y.init);
            else if constexpr (std::is_same_v<T, AssignStmt>)
                return structurally_equal(*x.lhs, *y.lhs) &&
                       structurally_equal(*x.rhs, *y.rhs);
            else if constexpr (std::is_same_v<T, ExprStmt>)
                return structurally_equal(*x.expr, *y.expr);
            else if constexpr (std::is_same_v<T, PrintStmt>)
                return structurally_equal(*x.expr, *y.expr);
            else if constexpr (std::is_same_v<T, ReturnStmt>)
                return eq_opt_expr(x.expr, y.expr);
            else if constexpr (std::is_same_v<T, IfStmt>)
                return structurally_equal(*x.cond, *y.cond) &&
                       structurally_equal(x.then_block, y.then_block) &&
                       eq_opt_block(x.else_block, y.else_block);
            else if constexpr (std::is_same_v<T, WhileStmt>)
                return structurally_equal(*x.cond, *y.cond) &&
                       structurally_equal(x.body, y.body);
            else if constexpr (std::is_same_v<T, SuperCall>)
                return eq_exprs(x.args, y.args);
            else if constexpr (std::is_same_v<T, BlockStmt>)
                return structurally_equal(x.block, y.block);
            else
                return false;
        },
        a.node);
}

static bool eq_params(const std::vector<Param>& a, const std::vector<Param>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].type != b[i].type || a[i].name != b[i].name) return false;
    return true;
}

static bool eq_field(const FieldDecl& a, const FieldDecl& b) {
    return a.name == b.name && a.type == b.type && a.vis == b.vis &&
           a.is_final == b.is_final && a.is_static == b.is_static;
}

bool structurally_equal(const MethodDecl& a, const MethodDecl& b) {
    if (a.name != b.name || a.ret != b.ret || a.vis != b.vis ||
        a.is_static != b.is_static || a.is_native != b.is_native)
        return false;
    if (!eq_params(a.params, b.params)) return false;
    if (a.body.has_value() != b.body.has_value()) return false;
    return !a.body || structurally_equal(*a.body, *b.body);
}

static bool eq_ctor(const CtorDecl& a, const CtorDecl& b) {
    if (a.vis != b.vis || !eq_params(a.params, b.params)) return false;
    if (a.body.has_value() != b.body.has_value()) return false;
    return !a.body || structurally_equal(*a.body, *b.body);
}

bool structurally_equal(const ClassDecl& a, const ClassDecl& b) {
    if (a.name != b.name || a.superclass != b.superclass ||
        a.implements_iface != b.implements_iface || a.is_builtin != b.is_builtin)
        return false;
    if (a.fields.size() != b.fields.size() ||
        a.static_fields.size() != b.static_fields.size() ||
        a.ctors.size() != b.ctors.size() || a.methods.size() != b.methods.size() ||
        a.static_methods.size() != b.static_methods.size())
        return false;
    for (size_t i = 0; i < a.fields.size(); ++i)
        if (!eq_field(a.fields[i], b.fields[i])) return false;
    for (size_t i = 0; i < a.static_fields.size(); ++i)
        if (!eq_field(a.static_fields[i], b.static_fields[i])) return false;
    for (size_t i = 0; i < a.ctors.size(); ++i)
        if (!eq_ctor(a.ctors[i], b.ctors[i])) return false;
    for (size_t i = 0; i < a.methods.size(); ++i)
        if (!structurally_equal(a.methods[i], b.methods[i])) return false;
    for (size_t i = 0; i < a.static_methods.size(); ++i)
        if (!structurally_equal(a.static_methods[i], b.static_methods[i])) return false;
    return eq_opt_block(a.static_init, b.static_init);
}

bool structurally_equal(const InterfaceDecl& a, const InterfaceDecl& b) {
    if (a.name != b.name || a.extends_iface != b.extends_iface) return false;
    if (a.methods.size() != b.methods.size()) return false;
    for (size_t i = 0; i < a.methods.size(); ++i)
        if (!structurally_equal(a.methods[i], b.methods[i])) return false;
    return true;
}

bool structurally_equal(const Decl& a, const Decl& b) {
    if (a.index() != b.index()) return false;
    if (auto* c = std::get_if<ClassDecl>(&a))
        return structurally_equal(*c, std::get<ClassDecl>(b));
    return structurally_equal(std::get<InterfaceDecl>(a), std::get<InterfaceDecl>(b));
}

bool structurally_equal(const Program& a, const Program& b) {
    if (a.entry_class != b.entry_class || a.entry_method != b.entry_method) return false;
    if (a.decls.size() != b.decls.size()) return false;
    for (size_t i = 0; i < a.decls.size(); ++i)
        if (!structurally_equal(a.decls[i], b.decls[i])) return false;
    return true;
}

} // namespace moo
