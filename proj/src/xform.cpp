#include "moo/xform.hpp"

#include "json.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <utility>

namespace moo {

const char* rule_name(ExclusionRule r) {
    switch (r) {
        case ExclusionRule::NativeMethod: return "native-method";
        case ExclusionRule::Builtin: return "builtin";
        case ExclusionRule::SuperclassRule: return "superclass-rule";
        case ExclusionRule::ReferencedByRule: return "referenced-by-rule";
    }
    return "?";
}

// ===========================================================================
// Transformability analysis

namespace {

void add_named(const TypeRef& t, std::set<std::string>& out) {
    if (t.is_named()) out.insert(t.name);
}

void refs_in_expr(const Expr& e, std::set<std::string>& out);

void refs_in_block(const Block& b, std::set<std::string>& out);

void refs_in_stmt(const Stmt& s, std::set<std::string>& out) {
    if (auto* n = s.as<LocalDecl>()) {
        add_named(n->type, out);
        if (n->init) refs_in_expr(*n->init, out);
    } else if (auto* n = s.as<AssignStmt>()) {
        refs_in_expr(*n->lhs, out);
        refs_in_expr(*n->rhs, out);
    } else if (auto* n = s.as<ExprStmt>()) {
        refs_in_expr(*n->expr, out);
    } else if (auto* n = s.as<PrintStmt>()) {
        refs_in_expr(*n->expr, out);
    } else if (auto* n = s.as<ReturnStmt>()) {
        if (n->expr) refs_in_expr(*n->expr, out);
    } else if (auto* n = s.as<IfStmt>()) {
        refs_in_expr(*n->cond, out);
        refs_in_block(n->then_block, out);
        if (n->else_block) refs_in_block(*n->else_block, out);
    } else if (auto* n = s.as<WhileStmt>()) {
        refs_in_expr(*n->cond, out);
        refs_in_block(n->body, out);
    } else if (auto* n = s.as<SuperCall>()) {
        for (const auto& a : n->args) refs_in_expr(*a, out);
    } else if (auto* n = s.as<BlockStmt>()) {
        refs_in_block(n->block, out);
    }
}

void refs_in_block(const Block& b, std::set<std::string>& out) {
    for (const auto& s : b.stmts) refs_in_stmt(*s, out);
}

void refs_in_expr(const Expr& e, std::set<std::string>& out) {
    if (e.res.kind == RefKind::ClassName) out.insert(e.res.owner);
    if (auto* n = e.as<FieldAccess>()) {
        refs_in_expr(*n->target, out);
    } else if (auto* n = e.as<CallExpr>()) {
        if (n->target) refs_in_expr(*n->target, out);
        for (const auto& a : n->args) refs_in_expr(*a, out);
    } else if (auto* n = e.as<NewExpr>()) {
        out.insert(n->class_name);
        for (const auto& a : n->args) refs_in_expr(*a, out);
    } else if (auto* n = e.as<UnaryExpr>()) {
        refs_in_expr(*n->operand, out);
    } else if (auto* n = e.as<BinaryExpr>()) {
        refs_in_expr(*n->lhs, out);
        refs_in_expr(*n->rhs, out);
    } else if (auto* n = e.as<IntrinsicCall>()) {
        for (const auto& a : n->args) refs_in_expr(*a, out);
    }
}

/// Class names appearing in c's declarations and code: field types,
/// signature types, local types, `new` targets, and class names used as
/// static receivers. The extends edge is handled by the superclass rule.
std::set<std::string> referenced_classes(const ClassDecl& c) {
    std::set<std::string> out;
    for (const auto& f : c.fields) add_named(f.type, out);
    for (const auto& f : c.static_fields) add_named(f.type, out);
    auto scan_method = [&](const MethodDecl& m) {
        add_named(m.ret, out);
        for (const auto& p : m.params) add_named(p.type, out);
        if (m.body) refs_in_block(*m.body, out);
    };
    for (const auto& m : c.methods) scan_method(m);
    for (const auto& m : c.static_methods) scan_method(m);
    for (const auto& ct : c.ctors) {
        for (const auto& p : ct.params) add_named(p.type, out);
        if (ct.body) refs_in_block(*ct.body, out);
    }
    if (c.static_init) refs_in_block(*c.static_init, out);
    return out;
}

} // namespace

TransformAnalysis analyse_transformability(const CheckedProgram& prog) {
    TransformAnalysis a;
    std::vector<const ClassDecl*> classes;
    for (const auto& d : prog.program.decls)
        if (auto* c = std::get_if<ClassDecl>(&d)) classes.push_back(c);

    std::deque<const ClassDecl*> work;
    auto exclude = [&](const ClassDecl* c, Exclusion ex) {
        if (a.reasons.emplace(c->name, std::move(ex)).second) work.push_back(c);
    };

    for (const ClassDecl* c : classes) {
        if (c->is_builtin) {
            exclude(c, {ExclusionRule::Builtin, {}});
            continue;
        }
        for (const auto& m : c->methods)
            if (m.is_native) {
                exclude(c, {ExclusionRule::NativeMethod, m.name});
                break;
            }
        if (!a.reasons.count(c->name))
            for (const auto& m : c->static_methods)
                if (m.is_native) {
                    exclude(c, {ExclusionRule::NativeMethod, m.name});
                    break;
                }
    }

    while (!work.empty()) {
        const ClassDecl* n = work.front();
        work.pop_front();
        if (n->superclass) {
            const ClassDecl* s = prog.find_class(*n->superclass);
            if (s && !a.reasons.count(s->name))
                exclude(s, {ExclusionRule::SuperclassRule, n->name});
        }
        for (const std::string& r : referenced_classes(*n)) {
            const ClassDecl* rc = prog.find_class(r);
            if (rc && !a.reasons.count(r))
                exclude(rc, {ExclusionRule::ReferencedByRule, n->name});
        }
    }

    for (const ClassDecl* c : classes)
        (a.reasons.count(c->name) ? a.non_transformable : a.transformable)
            .push_back(c->name);
    std::sort(a.transformable.begin(), a.transformable.end());
    std::sort(a.non_transformable.begin(), a.non_transformable.end());
    return a;
}

std::string TransformAnalysis::report_json() const {
    nlohmann::json j;
    j["transformable"] = transformable;
    j["non_transformable"] = non_transformable;
    nlohmann::json r = nlohmann::json::object();
    for (const auto& [cls, ex] : reasons)
        r[cls] = {{"rule", rule_name(ex.rule)}, {"via", ex.via}};
    j["reasons"] = std::move(r);
    return j.dump(2) + "\n";
}

// ===========================================================================
// Generation

namespace {

using build::mk;
using build::mks;

Pos kNoPos{0, 0};

ExprPtr nm(const std::string& n) { return mk({kNoPos, NameRef{n}, {}, {}}); }
ExprPtr bool_lit(bool v) { return mk({kNoPos, BoolLit{v}, {}, {}}); }

struct Gen {
    const CheckedProgram& cp;
    const TransformAnalysis& an;
    const std::vector<std::string>& protocols;
    std::set<std::string> used_builtins;  // builtin classes whose statics are rewritten

    Gen(const CheckedProgram& cp, const TransformAnalysis& an,
        const std::vector<std::string>& protocols)
        : cp(cp), an(an), protocols(protocols) {}

    bool transf(const std::string& n) const {
        return cp.find_class(n) != nullptr && an.is_transformable(n);
    }
    bool is_builtin(const std::string& n) const {
        const ClassDecl* c = cp.find_class(n);
        return c && c->is_builtin;
    }

    TypeRef iface_type(const TypeRef& t) const {
        if (t.is_named() && transf(t.name)) return TypeRef::named(t.name + "_O_Int");
        return t;
    }

    // -----------------------------------------------------------------
    // Rewriting contexts

    struct Ctx {
        enum class Kind { Instance, StaticInstance, FactoryInit, FactoryClinit };
        Kind kind;
        const ClassDecl* cls;  // the original class being rewritten
        std::string that;      // receiver parameter for Factory* kinds
        const TypeRef* ret = nullptr;  // original enclosing return type
        int next_tmp = 0;
        int next_cond = 0;
    };

    static std::string fresh_tmp(Ctx& cx) { return "$t" + std::to_string(cx.next_tmp++); }
    static std::string fresh_cond(Ctx& cx) { return "$c" + std::to_string(cx.next_cond++); }

    /// Class_C_Factory.discover()
    ExprPtr discover_of(const std::string& cls) {
        return build::call(nm(cls + "_C_Factory"), "discover");
    }

    /// A componentised value cannot sit in a slot typed by an untransformed
    /// class: the rewritten program could not be typed.
    void flow_check(Pos pos, const TypeRef& target, const Expr& src) const {
        if (!target.is_named() || !src.type.is_named()) return;
        if (!transf(src.type.name)) return;
        if (cp.find_class(target.name) && !transf(target.name))
            throw CheckError(pos, "cannot componentise: a value of class '" + src.type.name +
                                      "' flows into a slot of untransformed class '" +
                                      target.name + "'");
    }

    void flow_check_args(const Expr& call_like, const std::vector<ExprPtr>& orig_args) const {
        const MethodDecl* m = nullptr;
        const CtorDecl* ct = nullptr;
        if (auto* n = call_like.as<CallExpr>()) {
            if (call_like.res.kind == RefKind::StaticMethod)
                m = cp.find_static_method(call_like.res.owner, n->name, n->args.size());
            else
                m = cp.resolve_instance_method(call_like.res.owner, n->name, n->args.size());
        } else if (auto* n = call_like.as<NewExpr>()) {
            ct = cp.find_ctor(n->class_name, n->args.size());
        }
        const std::vector<Param>* params =
            m ? &m->params : (ct ? &ct->params : nullptr);
        if (!params) return;
        for (size_t i = 0; i < orig_args.size() && i < params->size(); ++i)
            flow_check(orig_args[i]->pos, (*params)[i].type, *orig_args[i]);
    }

    // -----------------------------------------------------------------
    // Expression rewriting. Prelude statements accumulate in `pre`.

    static bool trivial(const Expr& e) {
        return e.is<IntLit>() || e.is<LongLit>() || e.is<BoolLit>() || e.is<StrLit>() ||
               e.is<NullLit>() || e.is<ThisExpr>() || e.is<NameRef>();
    }

    /// Rewrite an ordered list of sibling subexpressions. When a later
    /// sibling hoists statements (object creation), earlier non-trivial
    /// siblings are lifted into temporaries so evaluation order survives.
    std::vector<ExprPtr> rew_list(const std::vector<const Expr*>& subs, Ctx& cx,
                                  std::vector<StmtPtr>& pre) {
        std::vector<ExprPtr> results;
        std::vector<std::vector<StmtPtr>> pieces;
        results.reserve(subs.size());
        pieces.reserve(subs.size());
        for (const Expr* s : subs) {
            std::vector<StmtPtr> p;
            results.push_back(rew(*s, cx, p));
            pieces.push_back(std::move(p));
        }
        bool any = false;
        for (const auto& p : pieces) any = any || !p.empty();
        if (!any) return results;
        // suffix_hoists[j]: does any sibling after j hoist?
        std::vector<bool> suffix_hoists(subs.size(), false);
        bool acc = false;
        for (size_t j = subs.size(); j-- > 0;) {
            suffix_hoists[j] = acc;
            acc = acc || !pieces[j].empty();
        }
        for (size_t j = 0; j < subs.size(); ++j) {
            for (auto& s : pieces[j]) pre.push_back(std::move(s));
            if (suffix_hoists[j] && !trivial(*results[j])) {
                std::string t = fresh_tmp(cx);
                pre.push_back(build::local(iface_type(subs[j]->type), t,
                                           std::move(results[j])));
                results[j] = nm(t);
            }
        }
        return results;
    }

    std::vector<const Expr*> ptrs(const std::vector<ExprPtr>& v) {
        std::vector<const Expr*> out;
        out.reserve(v.size());
        for (const auto& e : v) out.push_back(e.get());
        return out;
    }

    ExprPtr rew(const Expr& e, Ctx& cx, std::vector<StmtPtr>& pre) {
        if (auto* n = e.as<IntLit>()) return mk({e.pos, IntLit{n->value}, {}, {}});
        if (auto* n = e.as<LongLit>()) return mk({e.pos, LongLit{n->value}, {}, {}});
        if (auto* n = e.as<BoolLit>()) return mk({e.pos, BoolLit{n->value}, {}, {}});
        if (auto* n = e.as<StrLit>()) return mk({e.pos, StrLit{n->value}, {}, {}});
        if (e.is<NullLit>()) return mk({e.pos, NullLit{}, {}, {}});

        if (e.is<ThisExpr>()) {
            if (cx.kind == Ctx::Kind::FactoryInit) return nm(cx.that);
            return mk({e.pos, ThisExpr{}, {}, {}});
        }

        if (auto* n = e.as<NameRef>()) {
            switch (e.res.kind) {
                case RefKind::Local:
                    return mk({e.pos, NameRef{n->name}, {}, {}});
                case RefKind::InstanceField: {
                    // owner is the declaring class.
                    if (!transf(e.res.owner)) {
                        // Field of an untransformed ancestor: the local
                        // implementation extends it, raw access stays legal.
                        if (cx.kind == Ctx::Kind::FactoryInit)
                            return build::call(nm(cx.that), "get_" + n->name);
                        return mk({e.pos, NameRef{n->name}, {}, {}});
                    }
                    if (cx.kind == Ctx::Kind::FactoryInit)
                        return build::call(nm(cx.that), "get_" + n->name);
                    return build::bare_call("get_" + n->name);
                }
                case RefKind::StaticField: {
                    // Bare static access resolves in the enclosing class.
                    switch (cx.kind) {
                        case Ctx::Kind::StaticInstance:
                            return build::bare_call("get_" + n->name);
                        case Ctx::Kind::FactoryClinit:
                            return build::call(nm(cx.that), "get_" + n->name);
                        default:
                            return build::call(discover_of(cx.cls->name), "get_" + n->name);
                    }
                }
                default:
                    throw CheckError(e.pos, "internal: unrewritable name reference");
            }
        }

        if (auto* n = e.as<FieldAccess>()) {
            if (e.res.kind == RefKind::StaticField) {
                const std::string& owner = e.res.owner;
                if (transf(owner))
                    return build::call(discover_of(owner), "get_" + n->field);
                if (is_builtin(owner)) {
                    used_builtins.insert(owner);
                    return build::call(discover_of(owner), "get_" + n->field);
                }
                return build::field(nm(owner), n->field);  // untransformed: raw
            }
            // Instance field through a value: decide by the target's type.
            const std::string& tcls = n->target->type.name;
            if (n->target->type.is_named() && transf(tcls)) {
                ExprPtr t = rew(*n->target, cx, pre);
                return build::call(std::move(t), "get_" + n->field);
            }
            ExprPtr t = rew(*n->target, cx, pre);
            return build::field(std::move(t), n->field);
        }

        if (auto* n = e.as<CallExpr>()) {
            if (e.res.kind == RefKind::StaticMethod) {
                flow_check_args(e, n->args);
                std::vector<ExprPtr> args = rew_list(ptrs(n->args), cx, pre);
                const std::string& owner = e.res.owner;
                if (!n->target) {
                    // Bare static call on the enclosing class.
                    switch (cx.kind) {
                        case Ctx::Kind::StaticInstance:
                            return build::bare_call(n->name, std::move(args));
                        case Ctx::Kind::FactoryClinit:
                            return build::call(nm(cx.that), n->name, std::move(args));
                        default:
                            return build::call(discover_of(cx.cls->name), n->name,
                                               std::move(args));
                    }
                }
                if (transf(owner))
                    return build::call(discover_of(owner), n->name, std::move(args));
                if (is_builtin(owner)) {
                    used_builtins.insert(owner);
                    return build::call(discover_of(owner), n->name, std::move(args));
                }
                return build::call(nm(owner), n->name, std::move(args));  // raw
            }
            // Instance call.
            flow_check_args(e, n->args);
            if (!n->target) {
                std::vector<ExprPtr> args = rew_list(ptrs(n->args), cx, pre);
                if (cx.kind == Ctx::Kind::FactoryInit)
                    return build::call(nm(cx.that), n->name, std::move(args));
                return build::bare_call(n->name, std::move(args));
            }
            std::vector<const Expr*> subs;
            subs.push_back(n->target.get());
            for (const auto& a : n->args) subs.push_back(a.get());
            std::vector<ExprPtr> parts = rew_list(subs, cx, pre);
            ExprPtr recv = std::move(parts[0]);
            std::vector<ExprPtr> args;
            for (size_t i = 1; i < parts.size(); ++i) args.push_back(std::move(parts[i]));
            return build::call(std::move(recv), n->name, std::move(args));
        }

        if (auto* n = e.as<NewExpr>()) {
            flow_check_args(e, n->args);
            std::vector<ExprPtr> args = rew_list(ptrs(n->args), cx, pre);
            if (!transf(n->class_name)) {
                auto ne = mk({e.pos, NewExpr{n->class_name, std::move(args)}, {}, {}});
                return ne;
            }
            // tmp = T_O_Factory.make(); T_O_Factory.init(tmp, args...);
            std::string t = fresh_tmp(cx);
            pre.push_back(build::local(TypeRef::named(n->class_name + "_O_Int"), t,
                                       build::call(nm(n->class_name + "_O_Factory"), "make")));
            std::vector<ExprPtr> init_args;
            init_args.push_back(nm(t));
            for (auto& a : args) init_args.push_back(std::move(a));
            pre.push_back(build::expr_stmt(build::call(nm(n->class_name + "_O_Factory"),
                                                       "init", std::move(init_args))));
            return nm(t);
        }

        if (auto* n = e.as<UnaryExpr>()) {
            ExprPtr o = rew(*n->operand, cx, pre);
            return mk({e.pos, UnaryExpr{n->op, std::move(o)}, {}, {}});
        }

        if (auto* n = e.as<BinaryExpr>()) {
            std::vector<ExprPtr> parts = rew_list({n->lhs.get(), n->rhs.get()}, cx, pre);
            return mk({e.pos, BinaryExpr{n->op, std::move(parts[0]), std::move(parts[1])},
                       {}, {}});
        }

        throw CheckError(e.pos, "internal: unexpected expression during rewrite");
    }

    // -----------------------------------------------------------------
    // Statement rewriting

    Block rew_block(const Block& b, Ctx& cx) {
        Block out;
        for (const auto& s : b.stmts)
            for (auto& r : rew_stmt(*s, cx)) out.stmts.push_back(std::move(r));
        return out;
    }

    std::vector<StmtPtr> rew_stmt(const Stmt& s, Ctx& cx) {
        std::vector<StmtPtr> out;

        if (auto* n = s.as<LocalDecl>()) {
            ExprPtr init;
            if (n->init) {
                flow_check(s.pos, n->type, *n->init);
                init = rew(*n->init, cx, out);
            }
            out.push_back(mks({s.pos, LocalDecl{iface_type(n->type), n->name,
                                                std::move(init)}}));
            return out;
        }

        if (auto* n = s.as<AssignStmt>()) {
            rew_assign(s.pos, *n, cx, out);
            return out;
        }

        if (auto* n = s.as<ExprStmt>()) {
            ExprPtr e = rew(*n->expr, cx, out);
            // `new T(...);` as a bare statement rewrites to make+init in the
            // prelude; the leftover temporary reference is not a statement.
            if (!e->is<NameRef>())
                out.push_back(mks({s.pos, ExprStmt{std::move(e)}}));
            return out;
        }

        if (auto* n = s.as<PrintStmt>()) {
            ExprPtr e = rew(*n->expr, cx, out);
            out.push_back(mks({s.pos, PrintStmt{std::move(e)}}));
            return out;
        }

        if (auto* n = s.as<ReturnStmt>()) {
            ExprPtr e;
            if (n->expr) {
                if (cx.ret) flow_check(s.pos, *cx.ret, *n->expr);
                e = rew(*n->expr, cx, out);
            }
            out.push_back(mks({s.pos, ReturnStmt{std::move(e)}}));
            return out;
        }

        if (auto* n = s.as<IfStmt>()) {
            ExprPtr cond = rew(*n->cond, cx, out);
            Block then = rew_block(n->then_block, cx);
            std::optional<Block> els;
            if (n->else_block) els = rew_block(*n->else_block, cx);
            out.push_back(mks({s.pos, IfStmt{std::move(cond), std::move(then),
                                             std::move(els)}}));
            return out;
        }

        if (auto* n = s.as<WhileStmt>()) {
            std::vector<StmtPtr> cond_pre;
            ExprPtr cond = rew(*n->cond, cx, cond_pre);
            if (cond_pre.empty()) {
                Block body = rew_block(n->body, cx);
                out.push_back(mks({s.pos, WhileStmt{std::move(cond), std::move(body)}}));
                return out;
            }
            // The condition hoists statements that must run before every
            // test. Desugar:
            //   bool $c = true;
            //   while ($c) { <hoisted>; $c = cond; if ($c) { body } }
            std::string cv = fresh_cond(cx);
            out.push_back(build::local(TypeRef::bool_(), cv, bool_lit(true)));
            Block loop;
            for (auto& p : cond_pre) loop.stmts.push_back(std::move(p));
            loop.stmts.push_back(build::assign(nm(cv), std::move(cond)));
            Block body = rew_block(n->body, cx);
            loop.stmts.push_back(mks({s.pos, IfStmt{nm(cv), std::move(body),
                                                    std::nullopt}}));
            out.push_back(mks({s.pos, WhileStmt{nm(cv), std::move(loop)}}));
            return out;
        }

        if (auto* n = s.as<BlockStmt>()) {
            out.push_back(mks({s.pos, BlockStmt{rew_block(n->block, cx)}}));
            return out;
        }

        throw CheckError(s.pos, "internal: unexpected statement during rewrite");
    }

    void rew_assign(Pos pos, const AssignStmt& a, Ctx& cx, std::vector<StmtPtr>& out) {
        const Expr& lhs = *a.lhs;

        if (auto* nr = lhs.as<NameRef>()) {
            switch (lhs.res.kind) {
                case RefKind::Local: {
                    flow_check(pos, lhs.type, *a.rhs);
                    ExprPtr rhs = rew(*a.rhs, cx, out);
                    out.push_back(mks({pos, AssignStmt{nm(nr->name), std::move(rhs)}}));
                    return;
                }
                case RefKind::InstanceField: {
                    const FieldDecl* fd = cp.resolve_instance_field(lhs.res.owner, nr->name);
                    if (fd) flow_check(pos, fd->type, *a.rhs);
                    ExprPtr rhs = rew(*a.rhs, cx, out);
                    if (cx.kind == Ctx::Kind::FactoryInit) {
                        out.push_back(set_call(build::call(nm(cx.that), "set_" + nr->name,
                                                           one(std::move(rhs))),
                                               pos));
                    } else if (!transf(lhs.res.owner)) {
                        out.push_back(mks({pos, AssignStmt{nm(nr->name), std::move(rhs)}}));
                    } else {
                        out.push_back(set_call(build::bare_call("set_" + nr->name,
                                                                one(std::move(rhs))),
                                               pos));
                    }
                    return;
                }
                case RefKind::StaticField: {
                    const FieldDecl* fd = cp.find_static_field(lhs.res.owner, nr->name);
                    if (fd) flow_check(pos, fd->type, *a.rhs);
                    ExprPtr rhs = rew(*a.rhs, cx, out);
                    switch (cx.kind) {
                        case Ctx::Kind::StaticInstance:
                            out.push_back(set_call(build::bare_call("set_" + nr->name,
                                                                    one(std::move(rhs))),
                                                   pos));
                            return;
                        case Ctx::Kind::FactoryClinit:
                            out.push_back(set_call(build::call(nm(cx.that),
                                                               "set_" + nr->name,
                                                               one(std::move(rhs))),
                                                   pos));
                            return;
                        default:
                            out.push_back(set_call(
                                build::call(discover_of(cx.cls->name), "set_" + nr->name,
                                            one(std::move(rhs))),
                                pos));
                            return;
                    }
                }
                default:
                    throw CheckError(pos, "internal: unrewritable assignment target");
            }
        }

        auto* fa = lhs.as<FieldAccess>();
        if (lhs.res.kind == RefKind::StaticField) {
            const std::string& owner = lhs.res.owner;
            const FieldDecl* fd = cp.find_static_field(owner, fa->field);
            if (fd) flow_check(pos, fd->type, *a.rhs);
            ExprPtr rhs = rew(*a.rhs, cx, out);
            if (transf(owner) || is_builtin(owner)) {
                if (is_builtin(owner)) used_builtins.insert(owner);
                out.push_back(set_call(build::call(discover_of(owner), "set_" + fa->field,
                                                   one(std::move(rhs))),
                                       pos));
            } else {
                out.push_back(mks({pos, AssignStmt{build::field(nm(owner), fa->field),
                                                   std::move(rhs)}}));
            }
            return;
        }

        // Instance field through a value. Evaluation order (target, then
        // value) is preserved via ordered rewriting with lifting.
        const FieldDecl* fd = cp.resolve_instance_field(lhs.res.owner, fa->field);
        std::vector<ExprPtr> parts = rew_list({fa->target.get(), a.rhs.get()}, cx, out);
        if (fd) flow_check(pos, fd->type, *a.rhs);
        const std::string& tcls = fa->target->type.name;
        if (fa->target->type.is_named() && transf(tcls)) {
            out.push_back(set_call(build::call(std::move(parts[0]), "set_" + fa->field,
                                               one(std::move(parts[1]))),
                                   pos));
        } else {
            out.push_back(mks({pos, AssignStmt{build::field(std::move(parts[0]), fa->field),
                                               std::move(parts[1])}}));
        }
    }

    static std::vector<ExprPtr> one(ExprPtr e) {
        std::vector<ExprPtr> v;
        v.push_back(std::move(e));
        return v;
    }
    static StmtPtr set_call(ExprPtr call, Pos pos) {
        return mks({pos, ExprStmt{std::move(call)}});
    }

    // -----------------------------------------------------------------
    // Signatures and member collections

    MethodDecl sig_of(const MethodDecl& m) const {
        MethodDecl s;
        s.pos = kNoPos;
        s.name = m.name;
        s.vis = Visibility::Public;
        s.ret = iface_type(m.ret);
        for (const auto& p : m.params) s.params.push_back({iface_type(p.type), p.name});
        return s;
    }

    MethodDecl getter_sig(const std::string& fname, const TypeRef& t) const {
        MethodDecl s;
        s.pos = kNoPos;
        s.name = "get_" + fname;
        s.vis = Visibility::Public;
        s.ret = iface_type(t);
        return s;
    }

    MethodDecl setter_sig(const std::string& fname, const TypeRef& t) const {
        MethodDecl s;
        s.pos = kNoPos;
        s.name = "set_" + fname;
        s.vis = Visibility::Public;
        s.ret = TypeRef::void_();
        s.params.push_back({iface_type(t), fname});
        return s;
    }

    MethodDecl getter_impl(const std::string& fname, const TypeRef& t) const {
        MethodDecl m = getter_sig(fname, t);
        m.body = Block{};
        m.body->stmts.push_back(build::ret(nm(fname)));
        return m;
    }

    MethodDecl setter_impl(const std::string& fname, const TypeRef& t) const {
        MethodDecl m = setter_sig(fname, t);
        m.body = Block{};
        m.body->stmts.push_back(
            build::assign(build::field(build::this_(), fname), nm(fname)));
        return m;
    }

    struct Foreign {
        std::vector<const FieldDecl*> fields;    // public+protected, chain order
        std::vector<const MethodDecl*> methods;  // public+protected, deduped
    };

    /// Accessible members inherited from an untransformed ancestor chain.
    /// Empty unless c's direct superclass is untransformed.
    Foreign foreign_members(const ClassDecl& c) const {
        Foreign out;
        if (!c.superclass || transf(*c.superclass)) return out;
        std::set<std::string> fseen;
        std::set<std::pair<std::string, size_t>> mseen;
        for (const auto& m : c.methods) mseen.insert({m.name, m.params.size()});
        for (const ClassDecl* cur = cp.find_class(*c.superclass); cur;
             cur = cur->superclass ? cp.find_class(*cur->superclass) : nullptr) {
            for (const auto& f : cur->fields)
                if (f.vis != Visibility::Private && fseen.insert(f.name).second)
                    out.fields.push_back(&f);
            for (const auto& m : cur->methods)
                if (m.vis != Visibility::Private &&
                    mseen.insert({m.name, m.params.size()}).second)
                    out.methods.push_back(&m);
        }
        return out;
    }

    bool inherited_from_transformable(const ClassDecl& c, const MethodDecl& m) const {
        return c.superclass && transf(*c.superclass) &&
               cp.resolve_instance_method(*c.superclass, m.name, m.params.size()) != nullptr;
    }

    /// c's own contribution to its instance interface.
    std::vector<MethodDecl> o_int_own_sigs(const ClassDecl& c) const {
        std::vector<MethodDecl> sigs;
        for (const auto& f : c.fields) {
            sigs.push_back(getter_sig(f.name, f.type));
            sigs.push_back(setter_sig(f.name, f.type));
        }
        Foreign fo = foreign_members(c);
        for (const FieldDecl* f : fo.fields) {
            sigs.push_back(getter_sig(f->name, f->type));
            sigs.push_back(setter_sig(f->name, f->type));
        }
        for (const auto& m : c.methods)
            if (!inherited_from_transformable(c, m)) sigs.push_back(sig_of(m));
        for (const MethodDecl* m : fo.methods) sigs.push_back(sig_of(*m));
        return sigs;
    }

    /// Full flattened instance interface (ancestors first), for proxies.
    void o_int_flat(const ClassDecl& c, std::vector<MethodDecl>& sigs,
                    std::set<std::pair<std::string, size_t>>& seen) const {
        if (c.superclass && transf(*c.superclass))
            o_int_flat(*cp.find_class(*c.superclass), sigs, seen);
        for (auto& s : o_int_own_sigs(c))
            if (seen.insert({s.name, s.params.size()}).second) sigs.push_back(std::move(s));
    }

    std::vector<MethodDecl> c_int_sigs(const ClassDecl& c) const {
        std::vector<MethodDecl> sigs;
        for (const auto& f : c.static_fields) {
            sigs.push_back(getter_sig(f.name, f.type));
            sigs.push_back(setter_sig(f.name, f.type));
        }
        for (const auto& m : c.static_methods) sigs.push_back(sig_of(m));
        return sigs;
    }

    // -----------------------------------------------------------------
    // Per-class artifacts

    InterfaceDecl o_int(const ClassDecl& c) const {
        InterfaceDecl i;
        i.pos = kNoPos;
        i.name = c.name + "_O_Int";
        if (c.superclass && transf(*c.superclass)) i.extends_iface = *c.superclass + "_O_Int";
        i.methods = o_int_own_sigs(c);
        return i;
    }

    InterfaceDecl c_int(const ClassDecl& c) const {
        InterfaceDecl i;
        i.pos = kNoPos;
        i.name = c.name + "_C_Int";
        i.methods = c_int_sigs(c);
        return i;
    }

    CtorDecl parameterless_ctor() const {
        CtorDecl ct;
        ct.pos = kNoPos;
        ct.vis = Visibility::Public;
        ct.body = Block{};
        return ct;
    }

    MethodDecl xformed_method(const ClassDecl& c, const MethodDecl& src, bool statics) {
        MethodDecl m;
        m.pos = kNoPos;
        m.name = src.name;
        m.vis = Visibility::Public;
        m.ret = iface_type(src.ret);
        for (const auto& p : src.params) m.params.push_back({iface_type(p.type), p.name});
        Ctx cx{statics ? Ctx::Kind::StaticInstance : Ctx::Kind::Instance, &c, {}};
        cx.ret = &src.ret;
        m.body = rew_block(*src.body, cx);
        return m;
    }

    ClassDecl o_local(const ClassDecl& c) {
        ClassDecl g;
        g.pos = kNoPos;
        g.name = c.name + "_O_Local";
        if (c.superclass)
            g.superclass = transf(*c.superclass) ? *c.superclass + "_O_Local" : *c.superclass;
        g.implements_iface = c.name + "_O_Int";
        for (const auto& f : c.fields)
            g.fields.push_back({kNoPos, f.name, iface_type(f.type), Visibility::Private,
                                f.is_final, false});
        g.ctors.push_back(parameterless_ctor());
        for (const auto& f : c.fields) {
            g.methods.push_back(getter_impl(f.name, f.type));
            g.methods.push_back(setter_impl(f.name, f.type));
        }
        Foreign fo = foreign_members(c);
        for (const FieldDecl* f : fo.fields) {
            g.methods.push_back(getter_impl(f->name, f->type));
            g.methods.push_back(setter_impl(f->name, f->type));
        }
        for (const auto& m : c.methods) g.methods.push_back(xformed_method(c, m, false));
        return g;
    }

    ClassDecl c_local(const ClassDecl& c) {
        ClassDecl g;
        g.pos = kNoPos;
        g.name = c.name + "_C_Local";
        g.implements_iface = c.name + "_C_Int";
        for (const auto& f : c.static_fields)
            g.fields.push_back({kNoPos, f.name, iface_type(f.type), Visibility::Private,
                                f.is_final, false});
        g.ctors.push_back(parameterless_ctor());
        for (const auto& f : c.static_fields) {
            g.methods.push_back(getter_impl(f.name, f.type));
            g.methods.push_back(setter_impl(f.name, f.type));
        }
        for (const auto& m : c.static_methods) g.methods.push_back(xformed_method(c, m, true));
        // Singleton: private static me; static { me = new ..._C_Local(); }
        g.static_fields.push_back({kNoPos, "me", TypeRef::named(c.name + "_C_Int"),
                                   Visibility::Private, false, true});
        g.static_init = Block{};
        g.static_init->stmts.push_back(build::assign(nm("me"), build::new_(g.name)));
        MethodDecl gm;
        gm.pos = kNoPos;
        gm.name = "get_me";
        gm.vis = Visibility::Public;
        gm.is_static = true;
        gm.ret = TypeRef::named(c.name + "_C_Int");
        gm.body = Block{};
        gm.body->stmts.push_back(build::ret(nm("me")));
        g.static_methods.push_back(std::move(gm));
        return g;
    }

    /// A receiver name that no parameter or local of the body shadows.
    static void collect_locals(const Block& b, std::set<std::string>& names) {
        for (const auto& s : b.stmts) {
            if (auto* n = s->as<LocalDecl>()) names.insert(n->name);
            if (auto* n = s->as<IfStmt>()) {
                collect_locals(n->then_block, names);
                if (n->else_block) collect_locals(*n->else_block, names);
            }
            if (auto* n = s->as<WhileStmt>()) collect_locals(n->body, names);
            if (auto* n = s->as<BlockStmt>()) collect_locals(n->block, names);
        }
    }

    static std::string receiver_name(const std::vector<Param>& params, const Block* body) {
        std::set<std::string> names;
        for (const auto& p : params) names.insert(p.name);
        if (body) collect_locals(*body, names);
        return names.count("that") ? "$that" : "that";
    }

    MethodDecl gen_init(const ClassDecl& c, const CtorDecl* ct) {
        MethodDecl m;
        m.pos = kNoPos;
        m.name = "init";
        m.vis = Visibility::Public;
        m.is_static = true;
        m.ret = TypeRef::void_();
        const Block* src = (ct && ct->body) ? &*ct->body : nullptr;
        std::string that = receiver_name(ct ? ct->params : std::vector<Param>{}, src);
        m.params.push_back({TypeRef::named(c.name + "_O_Int"), that});
        if (ct)
            for (const auto& p : ct->params) m.params.push_back({iface_type(p.type), p.name});

        Ctx cx{Ctx::Kind::FactoryInit, &c, that};
        Block body;
        size_t start = 0;
        if (src && !src->stmts.empty() && src->stmts[0]->is<SuperCall>()) {
            const auto& sc = *src->stmts[0]->as<SuperCall>();
            if (const CtorDecl* sup_ct = cp.find_ctor(*c.superclass, sc.args.size()))
                for (size_t i = 0; i < sc.args.size(); ++i)
                    flow_check(sc.args[i]->pos, sup_ct->params[i].type, *sc.args[i]);
            std::vector<StmtPtr> pre;
            std::vector<ExprPtr> args = rew_list(ptrs(sc.args), cx, pre);
            for (auto& p : pre) body.stmts.push_back(std::move(p));
            body.stmts.push_back(super_route(c, that, std::move(args)));
            start = 1;
        } else if (c.superclass) {
            body.stmts.push_back(super_route(c, that, {}));
        }
        if (src)
            for (size_t i = start; i < src->stmts.size(); ++i)
                for (auto& r : rew_stmt(*src->stmts[i], cx)) body.stmts.push_back(std::move(r));
        m.body = std::move(body);
        return m;
    }

    StmtPtr super_route(const ClassDecl& c, const std::string& that,
                        std::vector<ExprPtr> args) {
        const std::string& sup = *c.superclass;
        if (transf(sup)) {
            std::vector<ExprPtr> all;
            all.push_back(nm(that));
            for (auto& a : args) all.push_back(std::move(a));
            return build::expr_stmt(
                build::call(nm(sup + "_O_Factory"), "init", std::move(all)));
        }
        // Untransformed superclass: run its original constructor chain on
        // the object under initialisation.
        std::vector<ExprPtr> all;
        all.push_back(nm(that));
        for (auto& a : args) all.push_back(std::move(a));
        return build::expr_stmt(
            build::intrinsic(Intrinsic::CtorInit, sup, std::move(all)));
    }

    ClassDecl o_factory(const ClassDecl& c) {
        ClassDecl g;
        g.pos = kNoPos;
        g.name = c.name + "_O_Factory";
        MethodDecl mk_m;
        mk_m.pos = kNoPos;
        mk_m.name = "make";
        mk_m.vis = Visibility::Public;
        mk_m.is_static = true;
        mk_m.ret = TypeRef::named(c.name + "_O_Int");
        mk_m.body = Block{};
        mk_m.body->stmts.push_back(
            build::ret(build::intrinsic(Intrinsic::PolicyCreate, c.name)));
        g.static_methods.push_back(std::move(mk_m));
        if (c.ctors.empty()) {
            g.static_methods.push_back(gen_init(c, nullptr));
        } else {
            for (const auto& ct : c.ctors) g.static_methods.push_back(gen_init(c, &ct));
        }
        return g;
    }

    ClassDecl c_factory(const ClassDecl& c) {
        ClassDecl g;
        g.pos = kNoPos;
        g.name = c.name + "_C_Factory";
        MethodDecl d;
        d.pos = kNoPos;
        d.name = "discover";
        d.vis = Visibility::Public;
        d.is_static = true;
        d.ret = TypeRef::named(c.name + "_C_Int");
        d.body = Block{};
        d.body->stmts.push_back(
            build::ret(build::intrinsic(Intrinsic::PolicyDiscover, c.name)));
        g.static_methods.push_back(std::move(d));
        if (c.static_init) {
            MethodDecl cl;
            cl.pos = kNoPos;
            cl.name = "clinit";
            cl.vis = Visibility::Public;
            cl.is_static = true;
            cl.ret = TypeRef::void_();
            std::string that = receiver_name({}, &*c.static_init);
            cl.params.push_back({TypeRef::named(c.name + "_C_Int"), that});
            Ctx cx{Ctx::Kind::FactoryClinit, &c, that};
            cl.body = rew_block(*c.static_init, cx);
            g.static_methods.push_back(std::move(cl));
        }
        return g;
    }

    ClassDecl proxy(const std::string& base, bool object_side, const std::string& proto,
                    const std::vector<MethodDecl>& sigs) const {
        ClassDecl g;
        g.pos = kNoPos;
        g.name = base + (object_side ? "_O_Proxy_" : "_C_Proxy_") + proto;
        g.implements_iface = base + (object_side ? "_O_Int" : "_C_Int");
        g.fields.push_back({kNoPos, "$ref", TypeRef::handle(), Visibility::Private,
                            false, false});
        g.ctors.push_back(parameterless_ctor());
        for (const MethodDecl& sig : sigs) {
            MethodDecl m = clone(sig);
            m.body = Block{};
            std::vector<ExprPtr> args;
            for (const auto& p : m.params) args.push_back(nm(p.name));
            ExprPtr inv =
                build::intrinsic(Intrinsic::RemoteInvoke, m.name, std::move(args));
            if (m.ret.is_void())
                m.body->stmts.push_back(build::expr_stmt(std::move(inv)));
            else
                m.body->stmts.push_back(build::ret(std::move(inv)));
            g.methods.push_back(std::move(m));
        }
        return g;
    }

    // -----------------------------------------------------------------
    // Families

    std::vector<Decl> family(const ClassDecl& c) {
        std::vector<Decl> out;
        out.push_back(o_int(c));
        out.push_back(c_int(c));
        out.push_back(o_local(c));
        out.push_back(c_local(c));
        out.push_back(o_factory(c));
        out.push_back(c_factory(c));
        std::vector<MethodDecl> oflat;
        std::set<std::pair<std::string, size_t>> seen;
        o_int_flat(c, oflat, seen);
        std::vector<MethodDecl> csigs = c_int_sigs(c);
        for (const std::string& p : protocols) {
            out.push_back(proxy(c.name, true, p, oflat));
            out.push_back(proxy(c.name, false, p, csigs));
        }
        return out;
    }

    /// Static-access bridge for a builtin class: interface + singleton +
    /// factory, reading through to the original class. Local-only (no
    /// proxies): the native table exists on every node.
    std::vector<Decl> builtin_bridge(const ClassDecl& b) const {
        std::vector<Decl> out;
        InterfaceDecl i;
        i.pos = kNoPos;
        i.name = b.name + "_C_Int";
        for (const auto& f : b.static_fields) i.methods.push_back(getter_sig(f.name, f.type));
        for (const auto& m : b.static_methods) i.methods.push_back(sig_of(m));
        out.push_back(std::move(i));

        ClassDecl l;
        l.pos = kNoPos;
        l.name = b.name + "_C_Local";
        l.implements_iface = b.name + "_C_Int";
        l.ctors.push_back(parameterless_ctor());
        for (const auto& f : b.static_fields) {
            MethodDecl m = getter_sig(f.name, f.type);
            m.body = Block{};
            m.body->stmts.push_back(build::ret(build::field(nm(b.name), f.name)));
            l.methods.push_back(std::move(m));
        }
        for (const auto& sm : b.static_methods) {
            MethodDecl m = sig_of(sm);
            m.body = Block{};
            std::vector<ExprPtr> args;
            for (const auto& p : m.params) args.push_back(nm(p.name));
            ExprPtr call = build::call(nm(b.name), m.name, std::move(args));
            if (m.ret.is_void())
                m.body->stmts.push_back(build::expr_stmt(std::move(call)));
            else
                m.body->stmts.push_back(build::ret(std::move(call)));
            l.methods.push_back(std::move(m));
        }
        l.static_fields.push_back({kNoPos, "me", TypeRef::named(b.name + "_C_Int"),
                                   Visibility::Private, false, true});
        l.static_init = Block{};
        l.static_init->stmts.push_back(build::assign(nm("me"), build::new_(l.name)));
        MethodDecl gm;
        gm.pos = kNoPos;
        gm.name = "get_me";
        gm.vis = Visibility::Public;
        gm.is_static = true;
        gm.ret = TypeRef::named(b.name + "_C_Int");
        gm.body = Block{};
        gm.body->stmts.push_back(build::ret(nm("me")));
        l.static_methods.push_back(std::move(gm));
        out.push_back(std::move(l));

        ClassDecl f;
        f.pos = kNoPos;
        f.name = b.name + "_C_Factory";
        MethodDecl d;
        d.pos = kNoPos;
        d.name = "discover";
        d.vis = Visibility::Public;
        d.is_static = true;
        d.ret = TypeRef::named(b.name + "_C_Int");
        d.body = Block{};
        d.body->stmts.push_back(
            build::ret(build::intrinsic(Intrinsic::PolicyDiscover, b.name)));
        f.static_methods.push_back(std::move(d));
        out.push_back(std::move(f));
        return out;
    }

    ClassDecl residual_entry(const std::string& entry_class,
                             const std::string& entry_method) const {
        ClassDecl r;
        r.pos = kNoPos;
        r.name = entry_class;
        MethodDecl m;
        m.pos = kNoPos;
        m.name = entry_method;
        m.vis = Visibility::Public;
        m.is_static = true;
        m.ret = TypeRef::void_();
        m.body = Block{};
        m.body->stmts.push_back(build::expr_stmt(
            build::call(build::call(nm(entry_class + "_C_Factory"), "discover"),
                        entry_method)));
        r.static_methods.push_back(std::move(m));
        return r;
    }
};

} // namespace

TransformResult transform_program(const CheckedProgram& prog, TransformOptions opts) {
    std::set<std::string> seen_protocols;
    for (const std::string& p : opts.protocols) {
        if (p != "RAF")
            throw CheckError({0, 0}, "unknown protocol '" + p + "' (supported: RAF)");
        if (!seen_protocols.insert(p).second)
            throw CheckError({0, 0}, "duplicate protocol '" + p + "'");
    }

    TransformAnalysis analysis = analyse_transformability(prog);
    Gen gen(prog, analysis, opts.protocols);

    // Generate every family first: rewriting discovers which builtin
    // classes' statics need a bridge.
    std::vector<std::pair<const ClassDecl*, std::vector<Decl>>> families;
    for (const auto& d : prog.program.decls) {
        const auto* c = std::get_if<ClassDecl>(&d);
        if (c && analysis.is_transformable(c->name))
            families.emplace_back(c, gen.family(*c));
    }

    Program out;
    out.entry_class = prog.program.entry_class;
    out.entry_method = prog.program.entry_method;
    size_t fam_idx = 0;
    for (const auto& d : prog.program.decls) {
        const auto* c = std::get_if<ClassDecl>(&d);
        if (!c) {
            out.decls.push_back(clone(std::get<InterfaceDecl>(d)));
            continue;
        }
        if (!analysis.is_transformable(c->name)) {
            // Untransformed classes stay byte-identical.
            out.decls.push_back(clone(*c));
            if (c->is_builtin && gen.used_builtins.count(c->name))
                for (auto& bd : gen.builtin_bridge(*c)) out.decls.push_back(std::move(bd));
            continue;
        }
        for (auto& fd : families[fam_idx].second) out.decls.push_back(std::move(fd));
        ++fam_idx;
        if (c->name == out.entry_class)
            out.decls.push_back(gen.residual_entry(out.entry_class, out.entry_method));
    }

    CheckOptions chk;
    chk.mode = CheckMode::Generated;
    chk.require_entry = !out.entry_class.empty();
    CheckedProgram checked = check_program(std::move(out), chk);
    return {std::move(checked.program), std::move(analysis)};
}

} // namespace moo
