#include "moo/checker.hpp"

#include <set>
#include <unordered_set>

namespace moo {

// ---------------------------------------------------------------------------
// CheckedProgram lookup API

void CheckedProgram::index() {
    classes_.clear();
    ifaces_.clear();
    for (auto& d : program.decls) {
        if (auto* c = std::get_if<ClassDecl>(&d))
            classes_[c->name] = c;
        else {
            auto& i = std::get<InterfaceDecl>(d);
            ifaces_[i.name] = &i;
        }
    }
}

const ClassDecl* CheckedProgram::find_class(const std::string& name) const {
    auto it = classes_.find(name);
    return it == classes_.end() ? nullptr : it->second;
}

const InterfaceDecl* CheckedProgram::find_interface(const std::string& name) const {
    auto it = ifaces_.find(name);
    return it == ifaces_.end() ? nullptr : it->second;
}

const MethodDecl* CheckedProgram::resolve_instance_method(const std::string& cls,
                                                          const std::string& name,
                                                          size_t arity,
                                                          const ClassDecl** owner_out) const {
    for (const ClassDecl* c = find_class(cls); c;
         c = c->superclass ? find_class(*c->superclass) : nullptr) {
        for (const auto& m : c->methods) {
            if (m.name == name && m.params.size() == arity) {
                if (owner_out) *owner_out = c;
                return &m;
            }
        }
    }
    return nullptr;
}

const MethodDecl* CheckedProgram::find_static_method(const std::string& cls,
                                                     const std::string& name,
                                                     size_t arity) const {
    const ClassDecl* c = find_class(cls);
    if (!c) return nullptr;
    for (const auto& m : c->static_methods)
        if (m.name == name && m.params.size() == arity) return &m;
    return nullptr;
}

const FieldDecl* CheckedProgram::find_static_field(const std::string& cls,
                                                   const std::string& name) const {
    const ClassDecl* c = find_class(cls);
    if (!c) return nullptr;
    for (const auto& f : c->static_fields)
        if (f.name == name) return &f;
    return nullptr;
}

const CtorDecl* CheckedProgram::find_ctor(const std::string& cls, size_t arity) const {
    const ClassDecl* c = find_class(cls);
    if (!c) return nullptr;
    for (const auto& ct : c->ctors)
        if (ct.params.size() == arity) return &ct;
    return nullptr;
}

const FieldDecl* CheckedProgram::resolve_instance_field(const std::string& cls,
                                                        const std::string& name,
                                                        const ClassDecl** owner_out) const {
    for (const ClassDecl* c = find_class(cls); c;
         c = c->superclass ? find_class(*c->superclass) : nullptr) {
        for (const auto& f : c->fields) {
            if (f.name == name) {
                if (owner_out) *owner_out = c;
                return &f;
            }
        }
    }
    return nullptr;
}

std::vector<const FieldDecl*> CheckedProgram::all_instance_fields(const std::string& cls) const {
    std::vector<const ClassDecl*> chain;
    for (const ClassDecl* c = find_class(cls); c;
         c = c->superclass ? find_class(*c->superclass) : nullptr)
        chain.push_back(c);
    std::vector<const FieldDecl*> out;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        for (const auto& f : (*it)->fields) out.push_back(&f);
    return out;
}

bool CheckedProgram::is_subclass_of(const std::string& sub, const std::string& sup) const {
    for (const ClassDecl* c = find_class(sub); c;
         c = c->superclass ? find_class(*c->superclass) : nullptr)
        if (c->name == sup) return true;
    return false;
}

bool CheckedProgram::iface_extends(const std::string& sub, const std::string& sup) const {
    for (const InterfaceDecl* i = find_interface(sub); i;
         i = i->extends_iface ? find_interface(*i->extends_iface) : nullptr)
        if (i->name == sup) return true;
    return false;
}

bool CheckedProgram::class_implements(const std::string& cls, const std::string& iface) const {
    for (const ClassDecl* c = find_class(cls); c;
         c = c->superclass ? find_class(*c->superclass) : nullptr)
        if (c->implements_iface && iface_extends(*c->implements_iface, iface)) return true;
    return false;
}

const MethodDecl* CheckedProgram::find_interface_method(const std::string& iface,
                                                        const std::string& name, size_t arity,
                                                        const InterfaceDecl** owner_out) const {
    for (const InterfaceDecl* i = find_interface(iface); i;
         i = i->extends_iface ? find_interface(*i->extends_iface) : nullptr) {
        for (const auto& m : i->methods) {
            if (m.name == name && m.params.size() == arity) {
                if (owner_out) *owner_out = i;
                return &m;
            }
        }
    }
    return nullptr;
}

bool CheckedProgram::assignable(const TypeRef& to, const TypeRef& from) const {
    if (from == to && !from.is_null()) return true;
    if (from.is_null()) return to.is_named() || to.kind == TypeKind::Handle;
    if (to.is_named() && from.is_named()) {
        if (classes_.count(from.name)) {
            if (classes_.count(to.name)) return is_subclass_of(from.name, to.name);
            if (ifaces_.count(to.name)) return class_implements(from.name, to.name);
            return false;
        }
        if (ifaces_.count(from.name) && ifaces_.count(to.name))
            return iface_extends(from.name, to.name);
        return false;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Name rules

bool has_reserved_suffix(const std::string& name) {
    static const char* suffixes[] = {"_O_Int",    "_C_Int",    "_O_Local",
                                     "_C_Local",  "_O_Factory", "_C_Factory"};
    for (const char* s : suffixes)
        if (name.ends_with(s)) return true;
    return name.find("_O_Proxy_") != std::string::npos ||
           name.find("_C_Proxy_") != std::string::npos;
}

namespace {

bool has_accessor_prefix(const std::string& name) {
    return name.starts_with("get_") || name.starts_with("set_");
}

bool has_dollar(const std::string& name) { return name.find('$') != std::string::npos; }

int vis_rank(Visibility v) {
    switch (v) {
        case Visibility::Private: return 0;
        case Visibility::Protected: return 1;
        case Visibility::Public: return 2;
    }
    return 0;
}

bool definitely_returns(const Block& b);

bool definitely_returns(const Stmt& s) {
    if (s.is<ReturnStmt>()) return true;
    if (auto* i = s.as<IfStmt>())
        return i->else_block && definitely_returns(i->then_block) &&
               definitely_returns(*i->else_block);
    if (auto* bl = s.as<BlockStmt>()) return definitely_returns(bl->block);
    return false;
}

bool definitely_returns(const Block& b) {
    for (const auto& s : b.stmts)
        if (definitely_returns(*s)) return true;
    return false;
}

} // namespace

// ---------------------------------------------------------------------------
// The checker

class Checker {
  public:
    Checker(CheckedProgram& cp, CheckOptions opts) : cp(cp), opts(opts) {}

    void run() {
        cp.index();
        gates();
        hierarchy();
        signatures();
        conformance();
        bodies();
        entry();
    }

  private:
    CheckedProgram& cp;
    CheckOptions opts;

    bool source_mode() const { return opts.mode == CheckMode::Source; }

    [[noreturn]] void err(Pos pos, const std::string& msg) const { throw CheckError(pos, msg); }

    bool visible_from(Visibility v, const std::string& decl_cls,
                      const std::string& from_cls) const {
        switch (v) {
            case Visibility::Public: return true;
            case Visibility::Private: return decl_cls == from_cls;
            case Visibility::Protected: return cp.is_subclass_of(from_cls, decl_cls);
        }
        return false;
    }

    void check_member_name(Pos pos, const std::string& name, const char* what) const {
        if (!source_mode()) return;
        if (has_accessor_prefix(name))
            err(pos, std::string(what) + " name '" + name +
                         "' uses a reserved accessor prefix (get_/set_)");
        if (has_dollar(name))
            err(pos, std::string(what) + " name '" + name + "' may not contain '$'");
        if (name == "me")
            err(pos, std::string(what) +
                         " name 'me' is reserved for generated singletons");
    }

    // ---- pass 1: declaration-level mode gates ----

    void gates() {
        for (auto& d : cp.program.decls) {
            if (auto* ifc = std::get_if<InterfaceDecl>(&d)) {
                if (source_mode())
                    err(ifc->pos, "interface declarations are not allowed in source programs");
                continue;
            }
            auto& c = std::get<ClassDecl>(d);
            if (source_mode()) {
                if (has_reserved_suffix(c.name))
                    err(c.pos, "class name '" + c.name + "' uses a reserved suffix");
                if (has_dollar(c.name))
                    err(c.pos, "class name '" + c.name + "' may not contain '$'");
                if (c.implements_iface)
                    err(c.pos, "implements clauses are not allowed in source programs");
            }
            if (c.is_builtin) {
                if (c.superclass)
                    err(c.pos, "builtin class '" + c.name + "' cannot have a superclass");
                if (c.implements_iface)
                    err(c.pos, "builtin class '" + c.name + "' cannot implement an interface");
                for (const auto& f : c.static_fields)
                    if (!f.is_final)
                        err(f.pos, "builtin static field '" + c.name + "." + f.name +
                                       "' must be final");
            }
            for (const auto& f : c.fields) check_member_name(f.pos, f.name, "field");
            for (const auto& f : c.static_fields) check_member_name(f.pos, f.name, "field");
            for (const auto& m : c.methods) check_member_name(m.pos, m.name, "method");
            for (const auto& m : c.static_methods) check_member_name(m.pos, m.name, "method");
            if (source_mode()) {
                // No overloading in source: a method name appears once across
                // both the instance and the static namespace.
                std::set<std::string> names;
                for (const auto* list : {&c.methods, &c.static_methods})
                    for (const auto& m : *list)
                        if (!names.insert(m.name).second)
                            err(m.pos, "method '" + m.name + "' is overloaded in class '" +
                                           c.name + "'; overloading is not supported");
            }
        }
    }

    // ---- pass 2: hierarchy resolution and cycles ----

    void hierarchy() {
        for (auto& d : cp.program.decls) {
            if (auto* c = std::get_if<ClassDecl>(&d)) {
                if (c->superclass) {
                    const std::string& s = *c->superclass;
                    if (cp.find_interface(s))
                        err(c->pos, "class '" + c->name + "' cannot extend interface '" + s + "'");
                    const ClassDecl* sc = cp.find_class(s);
                    if (!sc) err(c->pos, "unknown superclass '" + s + "'");
                    if (sc->is_builtin)
                        err(c->pos, "class '" + c->name + "' cannot extend builtin class '" + s +
                                        "'");
                }
                if (c->implements_iface && !cp.find_interface(*c->implements_iface))
                    err(c->pos, "unknown interface '" + *c->implements_iface + "'");
            } else {
                auto& i = std::get<InterfaceDecl>(d);
                if (i.extends_iface) {
                    if (cp.find_class(*i.extends_iface))
                        err(i.pos, "interface '" + i.name + "' cannot extend a class");
                    if (!cp.find_interface(*i.extends_iface))
                        err(i.pos, "unknown interface '" + *i.extends_iface + "'");
                }
            }
        }
        // Cycles.
        for (auto& d : cp.program.decls) {
            if (auto* c = std::get_if<ClassDecl>(&d)) {
                std::unordered_set<std::string> seen;
                for (const ClassDecl* w = c; w;
                     w = w->superclass ? cp.find_class(*w->superclass) : nullptr)
                    if (!seen.insert(w->name).second)
                        err(c->pos, "inheritance cycle involving class '" + w->name + "'");
            } else {
                auto& i = std::get<InterfaceDecl>(d);
                std::unordered_set<std::string> seen;
                for (const InterfaceDecl* w = &i; w;
                     w = w->extends_iface ? cp.find_interface(*w->extends_iface) : nullptr)
                    if (!seen.insert(w->name).second)
                        err(i.pos, "extension cycle involving interface '" + w->name + "'");
            }
        }
    }

    // ---- pass 3: signatures, shadowing, overrides ----

    void resolve_type(const TypeRef& t, Pos pos) const {
        if (t.kind == TypeKind::Handle) {
            if (source_mode()) err(pos, "the 'ref' type is reserved for generated code");
            return;
        }
        if (t.is_named() && !cp.find_class(t.name) && !cp.find_interface(t.name))
            err(pos, "unknown type '" + t.name + "'");
    }

    void check_sig(const MethodDecl& m) const {
        resolve_type(m.ret, m.pos);
        for (const auto& p : m.params) {
            resolve_type(p.type, m.pos);
            if (source_mode() && has_dollar(p.name))
                err(m.pos, "parameter name '" + p.name + "' may not contain '$'");
        }
    }

    void signatures() {
        for (auto& d : cp.program.decls) {
            if (auto* ifc = std::get_if<InterfaceDecl>(&d)) {
                for (const auto& m : ifc->methods) check_sig(m);
                continue;
            }
            auto& c = std::get<ClassDecl>(d);
            for (const auto& f : c.fields) {
                resolve_type(f.type, f.pos);
                if (c.superclass) {
                    const ClassDecl* owner = nullptr;
                    if (cp.resolve_instance_field(*c.superclass, f.name, &owner))
                        err(f.pos, "field '" + f.name + "' shadows a field of class '" +
                                       owner->name + "'");
                }
            }
            for (const auto& f : c.static_fields) resolve_type(f.type, f.pos);
            for (const auto& m : c.methods) {
                check_sig(m);
                check_override(c, m);
            }
            for (const auto& m : c.static_methods) check_sig(m);
            for (const auto& ct : c.ctors)
                for (const auto& p : ct.params) {
                    resolve_type(p.type, ct.pos);
                    if (source_mode() && has_dollar(p.name))
                        err(ct.pos, "parameter name '" + p.name + "' may not contain '$'");
                }
        }
    }

    void check_override(const ClassDecl& c, const MethodDecl& m) const {
        if (!c.superclass) return;
        for (const ClassDecl* a = cp.find_class(*c.superclass); a;
             a = a->superclass ? cp.find_class(*a->superclass) : nullptr) {
            for (const auto& sm : a->methods) {
                if (sm.name != m.name) continue;
                if (sm.params.size() != m.params.size()) {
                    if (source_mode())
                        err(m.pos, "method '" + m.name + "' overloads an inherited method of '" +
                                       a->name + "'; overloading is not supported");
                    continue;
                }
                bool same = sm.ret == m.ret;
                for (size_t i = 0; same && i < m.params.size(); ++i)
                    same = sm.params[i].type == m.params[i].type;
                if (!same)
                    err(m.pos, "method '" + m.name + "' overrides '" + a->name + "." + m.name +
                                   "' with a different signature");
                if (vis_rank(m.vis) < vis_rank(sm.vis))
                    err(m.pos, "method '" + m.name + "' reduces the visibility of '" + a->name +
                                   "." + m.name + "'");
                return;  // nearest ancestor wins; outer ancestors were checked for `a`
            }
        }
    }

    // ---- pass 4: interface conformance ----

    void conformance() {
        for (auto& d : cp.program.decls) {
            auto* c = std::get_if<ClassDecl>(&d);
            if (!c || !c->implements_iface) continue;
            for (const InterfaceDecl* i = cp.find_interface(*c->implements_iface); i;
                 i = i->extends_iface ? cp.find_interface(*i->extends_iface) : nullptr) {
                for (const auto& sig : i->methods) {
                    const ClassDecl* owner = nullptr;
                    const MethodDecl* m =
                        cp.resolve_instance_method(c->name, sig.name, sig.params.size(), &owner);
                    if (!m)
                        err(c->pos, "class '" + c->name + "' does not implement '" + sig.name +
                                        "' of interface '" + i->name + "'");
                    bool same = m->ret == sig.ret;
                    for (size_t k = 0; same && k < sig.params.size(); ++k)
                        same = m->params[k].type == sig.params[k].type;
                    if (!same)
                        err(m->pos, "class '" + c->name + "' implements '" + sig.name +
                                        "' of interface '" + i->name +
                                        "' with a different signature");
                    if (m->vis != Visibility::Public)
                        err(m->pos, "implementation of interface method '" + sig.name +
                                        "' must be public");
                }
            }
        }
    }

    // ---- pass 5: bodies ----

    struct Ctx {
        const ClassDecl* cls = nullptr;
        bool is_static = false;
        bool in_ctor = false;
        bool in_static_init = false;
        const TypeRef* ret = nullptr;  // null in constructors and static initialisers
        std::vector<std::unordered_map<std::string, TypeRef>> scopes;

        const TypeRef* lookup(const std::string& n) const {
            for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
                auto f = it->find(n);
                if (f != it->end()) return &f->second;
            }
            return nullptr;
        }
        void declare(const std::string& n, TypeRef t) { scopes.back()[n] = std::move(t); }
    };

    void bodies() {
        for (auto& d : cp.program.decls) {
            auto* c = std::get_if<ClassDecl>(&d);
            if (!c || c->is_builtin) continue;
            for (auto& ct : c->ctors) check_ctor(*c, ct);
            for (auto& m : c->methods)
                if (m.body) check_method(*c, m, /*is_static=*/false);
            for (auto& m : c->static_methods)
                if (m.body) check_method(*c, m, /*is_static=*/true);
            if (c->static_init) {
                Ctx ctx;
                ctx.cls = c;
                ctx.is_static = true;
                ctx.in_static_init = true;
                ctx.scopes.emplace_back();
                check_block_stmts(*c->static_init, ctx);
            }
        }
    }

    void check_method(const ClassDecl& c, MethodDecl& m, bool is_static) {
        Ctx ctx;
        ctx.cls = &c;
        ctx.is_static = is_static;
        ctx.ret = &m.ret;
        ctx.scopes.emplace_back();
        for (const auto& p : m.params) ctx.declare(p.name, p.type);
        check_block_stmts(*m.body, ctx);
        if (!m.ret.is_void() && !definitely_returns(*m.body))
            err(m.pos, "method '" + m.name + "' may complete without returning a value");
    }

    void check_ctor(const ClassDecl& c, CtorDecl& ct) {
        Ctx ctx;
        ctx.cls = &c;
        ctx.in_ctor = true;
        ctx.scopes.emplace_back();
        for (const auto& p : ct.params) ctx.declare(p.name, p.type);

        Block& body = *ct.body;
        size_t start = 0;
        if (!body.stmts.empty() && body.stmts[0]->is<SuperCall>()) {
            auto& sc = *body.stmts[0]->as<SuperCall>();
            Pos pos = body.stmts[0]->pos;
            if (!c.superclass)
                err(pos, "super call in class '" + c.name + "', which has no superclass");
            check_super_ctor(pos, c, *c.superclass, sc.args, ctx);
            start = 1;
        } else if (c.superclass && source_mode()) {
            // Implicit super(): the superclass needs an accessible
            // parameterless constructor. (Generated implementations are
            // initialised through factories and skip this chain.)
            const ClassDecl* sc = cp.find_class(*c.superclass);
            if (!sc->ctors.empty()) {
                const CtorDecl* zero = cp.find_ctor(sc->name, 0);
                if (!zero)
                    err(ct.pos, "class '" + c.name + "' must call super(...): superclass '" +
                                    sc->name + "' has no parameterless constructor");
                if (!visible_from(zero->vis, sc->name, c.name))
                    err(ct.pos, "parameterless constructor of '" + sc->name +
                                    "' is not accessible from '" + c.name + "'");
            }
        }
        for (size_t i = start; i < body.stmts.size(); ++i) check_stmt(*body.stmts[i], ctx);
    }

    void check_super_ctor(Pos pos, const ClassDecl& c, const std::string& sup,
                          std::vector<ExprPtr>& args, Ctx& ctx) {
        const ClassDecl* sc = cp.find_class(sup);
        const CtorDecl* target = cp.find_ctor(sup, args.size());
        if (!target && !(sc->ctors.empty() && args.empty()))
            err(pos, "superclass '" + sup + "' has no constructor taking " +
                         std::to_string(args.size()) + " argument(s)");
        if (target && !visible_from(target->vis, sup, c.name))
            err(pos, "constructor of '" + sup + "' is not accessible from '" + c.name + "'");
        if (target) check_args(pos, "constructor", sup, target->params, args, ctx);
        else
            for (auto& a : args) check_value(*a, ctx);
    }

    void check_block_stmts(Block& b, Ctx& ctx) {
        for (auto& s : b.stmts) check_stmt(*s, ctx);
    }

    void check_nested_block(Block& b, Ctx& ctx) {
        ctx.scopes.emplace_back();
        check_block_stmts(b, ctx);
        ctx.scopes.pop_back();
    }

    void check_stmt(Stmt& s, Ctx& ctx) {
        std::visit([&](auto& n) { stmt_node(s, n, ctx); }, s.node);
    }

    void stmt_node(Stmt& s, LocalDecl& n, Ctx& ctx) {
        resolve_type(n.type, s.pos);
        if (source_mode() && has_dollar(n.name))
            err(s.pos, "variable name '" + n.name + "' may not contain '$'");
        if (ctx.lookup(n.name))
            err(s.pos, "duplicate local variable '" + n.name + "'");
        if (n.init) {
            TypeRef it = check_value(*n.init, ctx);
            if (!cp.assignable(n.type, it))
                err(s.pos, "cannot initialise " + type_name(n.type) + " '" + n.name +
                               "' with a value of type " + type_name(it));
        }
        ctx.declare(n.name, n.type);
    }

    void stmt_node(Stmt& s, AssignStmt& n, Ctx& ctx) {
        TypeRef lt = check_expr(*n.lhs, ctx);
        RefKind k = n.lhs->res.kind;
        bool ok_target = (n.lhs->is<NameRef>() &&
                          (k == RefKind::Local || k == RefKind::InstanceField ||
                           k == RefKind::StaticField)) ||
                         (n.lhs->is<FieldAccess>() &&
                          (k == RefKind::InstanceField || k == RefKind::StaticField));
        if (!ok_target) err(s.pos, "invalid assignment target");
        if (source_mode() &&
            (k == RefKind::InstanceField || k == RefKind::StaticField))
            check_final_assign(s.pos, *n.lhs, ctx);
        TypeRef rt = check_value(*n.rhs, ctx);
        if (!cp.assignable(lt, rt))
            err(s.pos, "cannot assign " + type_name(rt) + " to " + type_name(lt));
    }

    void check_final_assign(Pos pos, const Expr& lhs, Ctx& ctx) {
        const std::string& owner = lhs.res.owner;
        const std::string field_name =
            lhs.is<NameRef>() ? lhs.as<NameRef>()->name : lhs.as<FieldAccess>()->field;
        const FieldDecl* f = lhs.res.kind == RefKind::InstanceField
                                 ? cp.resolve_instance_field(owner, field_name)
                                 : cp.find_static_field(owner, field_name);
        if (!f || !f->is_final) return;
        if (lhs.res.kind == RefKind::StaticField) {
            if (!(ctx.in_static_init && owner == ctx.cls->name))
                err(pos, "final static field '" + field_name +
                             "' can only be assigned in the static initialiser of '" + owner +
                             "'");
        } else {
            bool this_target = lhs.is<NameRef>() ||
                               (lhs.as<FieldAccess>()->target->is<ThisExpr>());
            if (!(ctx.in_ctor && owner == ctx.cls->name && this_target))
                err(pos, "final field '" + field_name +
                             "' can only be assigned to 'this' in a constructor of '" + owner +
                             "'");
        }
    }

    void stmt_node(Stmt& s, ExprStmt& n, Ctx& ctx) {
        if (!n.expr->is<CallExpr>() && !n.expr->is<NewExpr>() && !n.expr->is<IntrinsicCall>())
            err(s.pos, "not a statement");
        check_expr(*n.expr, ctx);
    }

    void stmt_node(Stmt& s, PrintStmt& n, Ctx& ctx) {
        TypeRef t = check_value(*n.expr, ctx);
        if (!t.is_primitive())
            err(s.pos, "print expects an int, long, bool, or string value, got " + type_name(t));
    }

    void stmt_node(Stmt& s, ReturnStmt& n, Ctx& ctx) {
        if (ctx.in_static_init) err(s.pos, "return is not allowed in a static initialiser");
        if (ctx.in_ctor) {
            if (n.expr) err(s.pos, "constructors cannot return a value");
            return;
        }
        const TypeRef& ret = *ctx.ret;
        if (ret.is_void()) {
            if (n.expr) err(s.pos, "void method cannot return a value");
            return;
        }
        if (!n.expr) err(s.pos, "method must return a value of type " + type_name(ret));
        TypeRef t = check_value(*n.expr, ctx);
        if (!cp.assignable(ret, t))
            err(s.pos, "cannot return " + type_name(t) + " from a method returning " +
                           type_name(ret));
    }

    void stmt_node(Stmt& s, IfStmt& n, Ctx& ctx) {
        TypeRef t = check_value(*n.cond, ctx);
        if (t.kind != TypeKind::Bool)
            err(s.pos, "condition must be bool, got " + type_name(t));
        check_nested_block(n.then_block, ctx);
        if (n.else_block) check_nested_block(*n.else_block, ctx);
    }

    void stmt_node(Stmt& s, WhileStmt& n, Ctx& ctx) {
        TypeRef t = check_value(*n.cond, ctx);
        if (t.kind != TypeKind::Bool)
            err(s.pos, "condition must be bool, got " + type_name(t));
        check_nested_block(n.body, ctx);
    }

    void stmt_node(Stmt& s, SuperCall&, Ctx&) {
        err(s.pos, "super call is only allowed as the first statement of a constructor");
    }

    void stmt_node(Stmt&, BlockStmt& n, Ctx& ctx) { check_nested_block(n.block, ctx); }

    // ---- expressions ----

    TypeRef check_value(Expr& e, Ctx& ctx) {
        TypeRef t = check_expr(e, ctx);
        if (e.res.kind == RefKind::ClassName)
            err(e.pos, "'" + e.res.owner + "' names a type and cannot be used as a value");
        return t;
    }

    TypeRef check_expr(Expr& e, Ctx& ctx) {
        TypeRef t = std::visit([&](auto& n) { return expr_node(e, n, ctx); }, e.node);
        e.type = t;
        return t;
    }

    void check_args(Pos, const char* what, const std::string& name,
                    const std::vector<Param>& params, std::vector<ExprPtr>& args, Ctx& ctx) {
        for (size_t i = 0; i < args.size(); ++i) {
            TypeRef at = check_value(*args[i], ctx);
            if (!cp.assignable(params[i].type, at))
                err(args[i]->pos, "argument " + std::to_string(i + 1) + " of " + what + " '" +
                                      name + "' expects " + type_name(params[i].type) +
                                      ", got " + type_name(at));
        }
    }

    TypeRef expr_node(Expr&, IntLit&, Ctx&) { return TypeRef::int_(); }
    TypeRef expr_node(Expr&, LongLit&, Ctx&) { return TypeRef::long_(); }
    TypeRef expr_node(Expr&, BoolLit&, Ctx&) { return TypeRef::bool_(); }
    TypeRef expr_node(Expr&, StrLit&, Ctx&) { return TypeRef::string_(); }
    TypeRef expr_node(Expr&, NullLit&, Ctx&) { return TypeRef::null_(); }

    TypeRef expr_node(Expr& e, ThisExpr&, Ctx& ctx) {
        if (ctx.is_static) err(e.pos, "'this' is not available in a static context");
        return TypeRef::named(ctx.cls->name);
    }

    TypeRef expr_node(Expr& e, NameRef& n, Ctx& ctx) {
        if (const TypeRef* t = ctx.lookup(n.name)) {
            e.res = {RefKind::Local, {}};
            return *t;
        }
        if (!ctx.is_static) {
            const ClassDecl* owner = nullptr;
            if (const FieldDecl* f = cp.resolve_instance_field(ctx.cls->name, n.name, &owner)) {
                if (!visible_from(f->vis, owner->name, ctx.cls->name))
                    err(e.pos, "field '" + n.name + "' of class '" + owner->name +
                                   "' is not accessible here");
                e.res = {RefKind::InstanceField, owner->name};
                return f->type;
            }
        }
        if (const FieldDecl* f = cp.find_static_field(ctx.cls->name, n.name)) {
            e.res = {RefKind::StaticField, ctx.cls->name};
            return f->type;
        }
        if (cp.find_class(n.name) || cp.find_interface(n.name)) {
            e.res = {RefKind::ClassName, n.name};
            return TypeRef::void_();
        }
        err(e.pos, "unresolved name '" + n.name + "'");
    }

    TypeRef expr_node(Expr& e, FieldAccess& n, Ctx& ctx) {
        TypeRef tt = check_expr(*n.target, ctx);
        if (n.target->res.kind == RefKind::ClassName) {
            const std::string& C = n.target->res.owner;
            if (cp.find_interface(C))
                err(e.pos, "interface '" + C + "' has no static members");
            const FieldDecl* f = cp.find_static_field(C, n.field);
            if (!f) err(e.pos, "class '" + C + "' has no static field '" + n.field + "'");
            if (!visible_from(f->vis, C, ctx.cls->name))
                err(e.pos, "static field '" + C + "." + n.field + "' is not accessible here");
            e.res = {RefKind::StaticField, C};
            return f->type;
        }
        if (tt.is_named() && cp.find_class(tt.name)) {
            const ClassDecl* owner = nullptr;
            const FieldDecl* f = cp.resolve_instance_field(tt.name, n.field, &owner);
            if (!f) err(e.pos, "class '" + tt.name + "' has no field '" + n.field + "'");
            if (!visible_from(f->vis, owner->name, ctx.cls->name))
                err(e.pos, "field '" + n.field + "' of class '" + owner->name +
                               "' is not accessible here");
            e.res = {RefKind::InstanceField, owner->name};
            return f->type;
        }
        if (tt.is_named())
            err(e.pos, "interface-typed values have no fields (use accessor methods)");
        err(e.pos, "value of type " + type_name(tt) + " has no fields");
    }

    TypeRef expr_node(Expr& e, CallExpr& n, Ctx& ctx) {
        size_t arity = n.args.size();
        if (!n.target) {
            if (!ctx.is_static) {
                const ClassDecl* owner = nullptr;
                if (const MethodDecl* m =
                        cp.resolve_instance_method(ctx.cls->name, n.name, arity, &owner)) {
                    if (!visible_from(m->vis, owner->name, ctx.cls->name))
                        err(e.pos, "method '" + n.name + "' of class '" + owner->name +
                                       "' is not accessible here");
                    check_args(e.pos, "method", n.name, m->params, n.args, ctx);
                    e.res = {RefKind::InstanceMethod, owner->name};
                    return m->ret;
                }
            }
            if (const MethodDecl* m = cp.find_static_method(ctx.cls->name, n.name, arity)) {
                check_args(e.pos, "method", n.name, m->params, n.args, ctx);
                e.res = {RefKind::StaticMethod, ctx.cls->name};
                return m->ret;
            }
            err(e.pos, "no method '" + n.name + "' taking " + std::to_string(arity) +
                           " argument(s) in class '" + ctx.cls->name + "'");
        }
        TypeRef tt = check_expr(*n.target, ctx);
        if (n.target->res.kind == RefKind::ClassName) {
            const std::string& C = n.target->res.owner;
            if (cp.find_interface(C))
                err(e.pos, "interface '" + C + "' has no static methods");
            const MethodDecl* m = cp.find_static_method(C, n.name, arity);
            if (!m)
                err(e.pos, "class '" + C + "' has no static method '" + n.name + "' taking " +
                               std::to_string(arity) + " argument(s)");
            if (!visible_from(m->vis, C, ctx.cls->name))
                err(e.pos, "static method '" + C + "." + n.name + "' is not accessible here");
            check_args(e.pos, "method", n.name, m->params, n.args, ctx);
            e.res = {RefKind::StaticMethod, C};
            return m->ret;
        }
        if (tt.is_named() && cp.find_class(tt.name)) {
            const ClassDecl* owner = nullptr;
            const MethodDecl* m = cp.resolve_instance_method(tt.name, n.name, arity, &owner);
            if (!m)
                err(e.pos, "class '" + tt.name + "' has no method '" + n.name + "' taking " +
                               std::to_string(arity) + " argument(s)");
            if (!visible_from(m->vis, owner->name, ctx.cls->name))
                err(e.pos, "method '" + n.name + "' of class '" + owner->name +
                               "' is not accessible here");
            check_args(e.pos, "method", n.name, m->params, n.args, ctx);
            e.res = {RefKind::InstanceMethod, owner->name};
            return m->ret;
        }
        if (tt.is_named()) {
            const InterfaceDecl* owner = nullptr;
            const MethodDecl* m = cp.find_interface_method(tt.name, n.name, arity, &owner);
            if (!m)
                err(e.pos, "interface '" + tt.name + "' has no method '" + n.name + "' taking " +
                               std::to_string(arity) + " argument(s)");
            check_args(e.pos, "method", n.name, m->params, n.args, ctx);
            e.res = {RefKind::InstanceMethod, owner->name};
            return m->ret;
        }
        if (tt.is_null()) err(e.pos, "cannot call a method on null");
        err(e.pos, "value of type " + type_name(tt) + " has no methods");
    }

    TypeRef expr_node(Expr& e, NewExpr& n, Ctx& ctx) {
        if (cp.find_interface(n.class_name))
            err(e.pos, "cannot instantiate interface '" + n.class_name + "'");
        const ClassDecl* c = cp.find_class(n.class_name);
        if (!c) err(e.pos, "unknown class '" + n.class_name + "'");
        size_t arity = n.args.size();
        const CtorDecl* ctor = cp.find_ctor(n.class_name, arity);
        if (!ctor && !(!c->is_builtin && c->ctors.empty() && arity == 0))
            err(e.pos, std::string(c->is_builtin ? "builtin " : "") + "class '" + n.class_name +
                           "' has no constructor taking " + std::to_string(arity) +
                           " argument(s)");
        if (ctor) {
            if (!visible_from(ctor->vis, n.class_name, ctx.cls->name))
                err(e.pos, "constructor of '" + n.class_name + "' is not accessible here");
            check_args(e.pos, "constructor", n.class_name, ctor->params, n.args, ctx);
        }
        return TypeRef::named(n.class_name);
    }

    TypeRef expr_node(Expr& e, UnaryExpr& n, Ctx& ctx) {
        TypeRef t = check_value(*n.operand, ctx);
        if (n.op == UnOp::Not) {
            if (t.kind != TypeKind::Bool) err(e.pos, "'!' expects bool, got " + type_name(t));
            return TypeRef::bool_();
        }
        if (t.kind != TypeKind::Int && t.kind != TypeKind::Long)
            err(e.pos, "unary '-' expects int or long, got " + type_name(t));
        return t;
    }

    TypeRef expr_node(Expr& e, BinaryExpr& n, Ctx& ctx) {
        TypeRef lt = check_value(*n.lhs, ctx);
        TypeRef rt = check_value(*n.rhs, ctx);
        auto both = [&](TypeKind k) { return lt.kind == k && rt.kind == k; };
        auto mismatch = [&]() -> TypeRef {
            err(e.pos, std::string("operator '") + [&] {
                switch (n.op) {
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
            }() + "' cannot combine " + type_name(lt) + " and " + type_name(rt) +
                           " (there are no implicit conversions)");
        };
        switch (n.op) {
            case BinOp::Add:
                if (both(TypeKind::Int) || both(TypeKind::Long) || both(TypeKind::String))
                    return lt;
                return mismatch();
            case BinOp::Sub:
            case BinOp::Mul:
            case BinOp::Div:
            case BinOp::Mod:
                if (both(TypeKind::Int) || both(TypeKind::Long)) return lt;
                return mismatch();
            case BinOp::Eq:
            case BinOp::Ne:
                if (both(TypeKind::Int) || both(TypeKind::Long) || both(TypeKind::Bool) ||
                    both(TypeKind::String))
                    return TypeRef::bool_();
                return mismatch();
            case BinOp::Lt:
            case BinOp::Le:
            case BinOp::Gt:
            case BinOp::Ge:
                if (both(TypeKind::Int) || both(TypeKind::Long)) return TypeRef::bool_();
                return mismatch();
            case BinOp::And:
            case BinOp::Or:
                if (both(TypeKind::Bool)) return TypeRef::bool_();
                return mismatch();
        }
        return mismatch();
    }

    TypeRef expr_node(Expr& e, IntrinsicCall& n, Ctx& ctx) {
        if (source_mode())
            err(e.pos, "reserved runtime intrinsic is not allowed in source programs");
        switch (n.kind) {
            case Intrinsic::RemoteInvoke: {
                if (!ctx.ret)
                    err(e.pos, "remote_invoke is only valid inside a method body");
                for (auto& a : n.args) {
                    TypeRef t = check_value(*a, ctx);
                    if (t.is_void()) err(a->pos, "cannot pass a void value");
                }
                return *ctx.ret;
            }
            case Intrinsic::PolicyCreate: {
                std::string iname = n.symbol + "_O_Int";
                if (!cp.find_interface(iname))
                    err(e.pos, "policy_create of '" + n.symbol + "': no interface '" + iname +
                                   "' is declared");
                return TypeRef::named(iname);
            }
            case Intrinsic::PolicyDiscover: {
                std::string iname = n.symbol + "_C_Int";
                if (!cp.find_interface(iname))
                    err(e.pos, "policy_discover of '" + n.symbol + "': no interface '" + iname +
                                   "' is declared");
                return TypeRef::named(iname);
            }
            case Intrinsic::CtorInit: {
                const ClassDecl* c = cp.find_class(n.symbol);
                if (!c) err(e.pos, "ctor_init: unknown class '" + n.symbol + "'");
                if (c->is_builtin)
                    err(e.pos, "ctor_init cannot target builtin class '" + n.symbol + "'");
                TypeRef that = check_value(*n.args[0], ctx);
                if (!that.is_named() && that.kind != TypeKind::Handle)
                    err(n.args[0]->pos, "ctor_init target must be an object");
                size_t arity = n.args.size() - 1;
                const CtorDecl* ctor = cp.find_ctor(n.symbol, arity);
                if (!ctor && !(c->ctors.empty() && arity == 0))
                    err(e.pos, "ctor_init: class '" + n.symbol + "' has no constructor taking " +
                                   std::to_string(arity) + " argument(s)");
                if (ctor)
                    for (size_t i = 0; i < arity; ++i) {
                        TypeRef at = check_value(*n.args[i + 1], ctx);
                        if (!cp.assignable(ctor->params[i].type, at))
                            err(n.args[i + 1]->pos,
                                "ctor_init argument " + std::to_string(i + 1) + " expects " +
                                    type_name(ctor->params[i].type) + ", got " + type_name(at));
                    }
                return TypeRef::void_();
            }
        }
        err(e.pos, "unknown intrinsic");
    }

    // ---- pass 6: entry point ----

    void entry() {
        if (!opts.require_entry) return;
        if (cp.program.entry_class.empty())
            err({0, 0}, "program must declare exactly one public static void main()");
        const MethodDecl* m = cp.find_static_method(cp.program.entry_class, "main", 0);
        if (!m || !m->body)
            err({0, 0}, "entry point main() must have a body");
    }
};

CheckedProgram check_program(Program p, CheckOptions opts) {
    CheckedProgram cp;
    cp.program = std::move(p);
    Checker ck(cp, opts);
    ck.run();
    return cp;
}

} // namespace moo
