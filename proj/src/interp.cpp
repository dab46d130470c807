#include "moo/interp.hpp"

#include <limits>

namespace moo {

// ---------------------------------------------------------------------------
// Small helpers

namespace {

int32_t wrap_add(int32_t a, int32_t b) {
    return static_cast<int32_t>(static_cast<uint32_t>(a) + static_cast<uint32_t>(b));
}
int32_t wrap_sub(int32_t a, int32_t b) {
    return static_cast<int32_t>(static_cast<uint32_t>(a) - static_cast<uint32_t>(b));
}
int32_t wrap_mul(int32_t a, int32_t b) {
    return static_cast<int32_t>(static_cast<uint32_t>(a) * static_cast<uint32_t>(b));
}
int64_t wrap_add(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
int64_t wrap_sub(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
int64_t wrap_mul(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

template <class T>
T wrap_div(Pos pos, T a, T b) {
    if (b == 0) throw RuntimeError(pos, "division by zero");
    if (a == std::numeric_limits<T>::min() && b == T(-1)) return a;  // wraps to itself
    return a / b;
}
template <class T>
T wrap_mod(Pos pos, T a, T b) {
    if (b == 0) throw RuntimeError(pos, "division by zero");
    if (a == std::numeric_limits<T>::min() && b == T(-1)) return 0;
    return a % b;
}

} // namespace

std::string format_value(const Value& v) {
    if (auto* i = std::get_if<int32_t>(&v)) return std::to_string(*i);
    if (auto* l = std::get_if<int64_t>(&v)) return std::to_string(*l);
    if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    if (is_null(v)) return "null";
    return "<object>";
}

const RemoteRefV* proxy_ref(const Obj& o) {
    auto it = o.fields.find("$ref");
    if (it == o.fields.end()) return nullptr;
    return std::get_if<RemoteRefV>(&it->second);
}

bool trace_equal(const Trace& a, const Trace& b) { return a == b; }

const NativeStatic* BuiltinTable::find_static(const std::string& cls, const std::string& name,
                                              size_t arity) const {
    auto it = statics.find({cls, name, arity});
    return it == statics.end() ? nullptr : &it->second;
}
const NativeMethod* BuiltinTable::find_method(const std::string& cls, const std::string& name,
                                              size_t arity) const {
    auto it = methods.find({cls, name, arity});
    return it == methods.end() ? nullptr : &it->second;
}
const NativeCtor* BuiltinTable::find_ctor(const std::string& cls, size_t arity) const {
    auto it = ctors.find({cls, arity});
    return it == ctors.end() ? nullptr : &it->second;
}
const Value* BuiltinTable::find_const(const std::string& cls, const std::string& field) const {
    auto it = consts.find({cls, field});
    return it == consts.end() ? nullptr : &it->second;
}

RuntimeHooks local_hooks(BuiltinTable builtins) {
    RuntimeHooks h;
    h.builtins = std::move(builtins);
    h.policy_create = [](Machine& m, const std::string& cls) -> Value {
        return m.instantiate_raw(cls + "_O_Local");
    };
    h.policy_discover = [](Machine& m, const std::string& cls) -> Value {
        return m.discover_local(cls);
    };
    h.remote_invoke = [](Machine&, Obj&, const std::string& member,
                         std::vector<Value>) -> Value {
        throw RuntimeError({0, 0}, "remote invocation of '" + member +
                                       "' is impossible in a purely local run");
    };
    h.seal_remote = [](Machine&, const RemoteRefV&) {
        throw RuntimeError({0, 0}, "remote seal is impossible in a purely local run");
    };
    return h;
}

// ---------------------------------------------------------------------------
// Machine

struct Machine::DepthGuard {
    Machine& m;
    explicit DepthGuard(Machine& m, Pos pos) : m(m) {
        if (++m.call_depth_ > m.limits_.max_call_depth)
            throw RuntimeError(pos, "call depth exceeded (" +
                                        std::to_string(m.limits_.max_call_depth) + ")");
    }
    ~DepthGuard() { --m.call_depth_; }
};

Machine::Machine(const CheckedProgram& prog, RuntimeHooks hooks, RunLimits limits)
    : prog_(prog), hooks_(std::move(hooks)), limits_(limits) {
    validate_builtin_decls();
}

void Machine::validate_builtin_decls() const {
    for (const auto& d : prog_.program.decls) {
        auto* c = std::get_if<ClassDecl>(&d);
        if (!c || !c->is_builtin) continue;
        auto missing = [&](const std::string& member) {
            throw RuntimeError({0, 0}, "no native implementation registered for '" + c->name +
                                           "." + member + "'");
        };
        for (const auto& f : c->static_fields)
            if (!hooks_.builtins.find_const(c->name, f.name)) missing(f.name);
        for (const auto& ct : c->ctors)
            if (!hooks_.builtins.find_ctor(c->name, ct.params.size()))
                missing("<constructor/" + std::to_string(ct.params.size()) + ">");
        for (const auto& m : c->methods)
            if (!hooks_.builtins.find_method(c->name, m.name, m.params.size())) missing(m.name);
        for (const auto& m : c->static_methods)
            if (!hooks_.builtins.find_static(c->name, m.name, m.params.size())) missing(m.name);
    }
}

void Machine::tick(Pos pos) {
    if (++steps_ > limits_.step_budget)
        throw RuntimeError(pos, "step budget exceeded (" + std::to_string(limits_.step_budget) +
                                    " steps)");
}

void Machine::emit(const std::string& line) {
    if (hooks_.emit_line)
        hooks_.emit_line(*this, line);
    else
        trace_.push_back(line);
}

Value Machine::default_value(const TypeRef& t) const {
    switch (t.kind) {
        case TypeKind::Int: return int32_t{0};
        case TypeKind::Long: return int64_t{0};
        case TypeKind::Bool: return false;
        case TypeKind::String: return std::string{};
        default: return Value{};  // null
    }
}

ObjPtr Machine::alloc(const std::string& cls) {
    auto obj = std::make_shared<Obj>();
    obj->id = next_obj_id_++;
    obj->cls = cls;
    for (const FieldDecl* f : prog_.all_instance_fields(cls))
        obj->fields[f->name] = default_value(f->type);
    return obj;
}

ObjPtr Machine::alloc_object(const std::string& cls) { return alloc(cls); }

ObjPtr Machine::instantiate_raw(const std::string& cls) {
    const ClassDecl* c = prog_.find_class(cls);
    if (!c) throw RuntimeError({0, 0}, "unknown class '" + cls + "'");
    ObjPtr obj = alloc(cls);
    if (const CtorDecl* ct = prog_.find_ctor(cls, 0); ct && ct->body) {
        Frame f;
        f.self = obj;
        f.scopes.emplace_back();
        exec_block(*ct->body, f);
    }
    return obj;
}

ObjPtr Machine::instantiate_new(Pos pos, const std::string& cls, std::vector<Value> args) {
    const ClassDecl* c = prog_.find_class(cls);
    if (!c) throw RuntimeError(pos, "unknown class '" + cls + "'");
    ObjPtr obj = alloc(cls);
    if (c->is_builtin) {
        const NativeCtor* fn = hooks_.builtins.find_ctor(cls, args.size());
        if (!fn)
            throw RuntimeError(pos, "no native constructor registered for '" + cls + "'");
        (*fn)(*this, *obj, args);
        obj->sealed = true;
        return obj;
    }
    run_ctor_chain(pos, obj, cls, std::move(args));
    // A generated static-singleton implementation stays open: its
    // initialisation continues in clinit, which seals it.
    if (!cls.ends_with("_C_Local")) obj->sealed = true;
    return obj;
}

void Machine::run_ctor_on(const ObjPtr& obj, const std::string& cls, std::vector<Value> args) {
    run_ctor_chain({0, 0}, obj, cls, std::move(args));
}

void Machine::run_ctor_chain(Pos pos, const ObjPtr& obj, const std::string& cls,
                             std::vector<Value> args) {
    DepthGuard guard(*this, pos);
    const ClassDecl* c = prog_.find_class(cls);
    if (!c) throw RuntimeError(pos, "unknown class '" + cls + "'");
    const CtorDecl* ct = prog_.find_ctor(cls, args.size());
    if (!ct) {
        if (!args.empty() || !c->ctors.empty())
            throw RuntimeError(pos, "class '" + cls + "' has no constructor taking " +
                                        std::to_string(args.size()) + " argument(s)");
        // Implicit default constructor: chain upward, run nothing.
        if (c->superclass) run_ctor_chain(pos, obj, *c->superclass, {});
        return;
    }
    Frame f;
    f.self = obj;
    f.scopes.emplace_back();
    for (size_t i = 0; i < ct->params.size(); ++i)
        f.declare(ct->params[i].name, std::move(args[i]));
    const Block& body = *ct->body;
    size_t start = 0;
    if (!body.stmts.empty() && body.stmts[0]->is<SuperCall>()) {
        const auto& sc = *body.stmts[0]->as<SuperCall>();
        std::vector<Value> sargs = eval_args(sc.args, f);
        run_ctor_chain(body.stmts[0]->pos, obj, *c->superclass, std::move(sargs));
        start = 1;
    } else if (c->superclass) {
        run_ctor_chain(pos, obj, *c->superclass, {});
    }
    for (size_t i = start; i < body.stmts.size(); ++i) {
        if (auto r = exec_stmt(*body.stmts[i], f); r)
            return;  // bare `return;` ends the constructor body
    }
}

// ---- statics ----

void Machine::ensure_class_init(Pos pos, const std::string& cls) {
    {
        auto& st = statics_[cls];
        if (st.state != InitState::Uninit) return;
        st.state = InitState::Running;
    }
    const ClassDecl* c = prog_.find_class(cls);
    if (!c) throw RuntimeError(pos, "unknown class '" + cls + "'");
    if (c->is_builtin) {
        for (const auto& f : c->static_fields) {
            const Value* v = hooks_.builtins.find_const(cls, f.name);
            statics_[cls].values[f.name] = v ? *v : default_value(f.type);
        }
        statics_[cls].state = InitState::Done;
        return;
    }
    for (const auto& f : c->static_fields)
        statics_[cls].values[f.name] = default_value(f.type);
    if (c->static_init) {
        Frame f;
        f.scopes.emplace_back();
        exec_block(*c->static_init, f);
    }
    statics_[cls].state = InitState::Done;
}

Value Machine::static_get(Pos pos, const std::string& cls, const std::string& field) {
    ensure_class_init(pos, cls);
    auto& store = statics_[cls].values;
    auto it = store.find(field);
    if (it == store.end())
        throw RuntimeError(pos, "class '" + cls + "' has no static field '" + field + "'");
    return it->second;
}

void Machine::static_set(Pos pos, const std::string& cls, const std::string& field, Value v) {
    ensure_class_init(pos, cls);
    statics_[cls].values[field] = std::move(v);
}

// ---- calls ----

Value Machine::call_static(const std::string& cls, const std::string& name,
                           std::vector<Value> args) {
    Pos pos{0, 0};
    DepthGuard guard(*this, pos);
    const MethodDecl* m = prog_.find_static_method(cls, name, args.size());
    if (!m)
        throw RuntimeError(pos, "class '" + cls + "' has no static method '" + name +
                                    "' taking " + std::to_string(args.size()) + " argument(s)");
    ensure_class_init(pos, cls);
    if (m->is_native) {
        const NativeStatic* fn = hooks_.builtins.find_static(cls, name, args.size());
        if (!fn)
            throw RuntimeError(m->pos, "no native implementation registered for '" + cls + "." +
                                           name + "'");
        return (*fn)(*this, args);
    }

    // Factory initialisation tracking: init/clinit calls carry the object
    // under construction as their first argument. The outermost one seals.
    bool factory_init = (cls.ends_with("_O_Factory") && name == "init") ||
                        (cls.ends_with("_C_Factory") && name == "clinit");
    ObjPtr target;
    if (factory_init && !args.empty())
        if (auto* op = std::get_if<ObjPtr>(&args[0])) target = *op;
    if (target) target->init_depth++;

    const ClassDecl* owner = prog_.find_class(cls);
    Value result = invoke_body(*owner, *m, nullptr, std::move(args));

    if (target && --target->init_depth == 0) {
        if (const RemoteRefV* r = proxy_ref(*target))
            hooks_.seal_remote(*this, *r);
        else
            target->sealed = true;
    }
    return result;
}

Value Machine::call_method(const ObjPtr& obj, const std::string& name, std::vector<Value> args) {
    Pos pos{0, 0};
    DepthGuard guard(*this, pos);
    const ClassDecl* owner = nullptr;
    const MethodDecl* m = prog_.resolve_instance_method(obj->cls, name, args.size(), &owner);
    if (!m)
        throw RuntimeError(pos, "class '" + obj->cls + "' has no method '" + name + "' taking " +
                                    std::to_string(args.size()) + " argument(s)");
    if (m->is_native) {
        const NativeMethod* fn = hooks_.builtins.find_method(owner->name, name, args.size());
        if (!fn)
            throw RuntimeError(m->pos, "no native implementation registered for '" +
                                           owner->name + "." + name + "'");
        return (*fn)(*this, *obj, args);
    }
    return invoke_body(*owner, *m, obj, std::move(args));
}

Value Machine::invoke_body(const ClassDecl&, const MethodDecl& m, ObjPtr self,
                           std::vector<Value> args) {
    Frame f;
    f.self = std::move(self);
    f.scopes.emplace_back();
    for (size_t i = 0; i < m.params.size(); ++i)
        f.declare(m.params[i].name, std::move(args[i]));
    auto r = exec_block(*m.body, f);
    return r ? std::move(*r) : Value{};
}

Value Machine::discover_local(const std::string& orig_cls) {
    auto it = discovered_.find(orig_cls);
    if (it != discovered_.end()) return it->second;
    // The generated accessor lazily runs the singleton's static block.
    Value v = call_static(orig_cls + "_C_Local", "get_me", {});
    discovered_[orig_cls] = v;
    if (prog_.find_static_method(orig_cls + "_C_Factory", "clinit", 1)) {
        call_static(orig_cls + "_C_Factory", "clinit", {v});
    } else if (auto* op = std::get_if<ObjPtr>(&v)) {
        (*op)->sealed = true;
    }
    return v;
}

void Machine::run_entry() {
    if (prog_.program.entry_class.empty())
        throw RuntimeError({0, 0}, "program has no entry point");
    call_static(prog_.program.entry_class, prog_.program.entry_method, {});
}

// ---- statements ----

std::optional<Value> Machine::exec_block(const Block& b, Frame& f) {
    for (const auto& s : b.stmts)
        if (auto r = exec_stmt(*s, f); r) return r;
    return std::nullopt;
}

void Machine::store_field(Pos pos, const ObjPtr& obj, const std::string& owner,
                          const std::string& field, Value v) {
    if (obj->sealed) {
        const FieldDecl* fd = prog_.resolve_instance_field(owner, field);
        if (fd && fd->is_final)
            throw RuntimeError(pos, "final field '" + field + "' of class '" + owner +
                                        "' cannot be assigned after initialisation");
    }
    obj->fields[field] = std::move(v);
}

std::optional<Value> Machine::exec_stmt(const Stmt& s, Frame& f) {
    tick(s.pos);
    if (auto* n = s.as<LocalDecl>()) {
        Value v = n->init ? eval(*n->init, f) : default_value(n->type);
        f.declare(n->name, std::move(v));
        return std::nullopt;
    }
    if (auto* n = s.as<AssignStmt>()) {
        const Expr& lhs = *n->lhs;
        if (auto* nr = lhs.as<NameRef>()) {
            switch (lhs.res.kind) {
                case RefKind::Local: {
                    Value v = eval(*n->rhs, f);
                    *f.lookup(nr->name) = std::move(v);
                    return std::nullopt;
                }
                case RefKind::InstanceField: {
                    Value v = eval(*n->rhs, f);
                    store_field(s.pos, f.self, lhs.res.owner, nr->name, std::move(v));
                    return std::nullopt;
                }
                case RefKind::StaticField: {
                    Value v = eval(*n->rhs, f);
                    static_set(s.pos, lhs.res.owner, nr->name, std::move(v));
                    return std::nullopt;
                }
                default:
                    throw RuntimeError(s.pos, "internal: unresolved assignment target");
            }
        }
        auto* fa = lhs.as<FieldAccess>();
        if (lhs.res.kind == RefKind::StaticField) {
            Value v = eval(*n->rhs, f);
            static_set(s.pos, lhs.res.owner, fa->field, std::move(v));
            return std::nullopt;
        }
        Value tv = eval(*fa->target, f);
        if (is_null(tv)) throw RuntimeError(s.pos, "null dereference");
        ObjPtr obj = std::get<ObjPtr>(tv);
        Value v = eval(*n->rhs, f);
        store_field(s.pos, obj, lhs.res.owner, fa->field, std::move(v));
        return std::nullopt;
    }
    if (auto* n = s.as<ExprStmt>()) {
        eval(*n->expr, f);
        return std::nullopt;
    }
    if (auto* n = s.as<PrintStmt>()) {
        emit(format_value(eval(*n->expr, f)));
        return std::nullopt;
    }
    if (auto* n = s.as<ReturnStmt>()) {
        return n->expr ? eval(*n->expr, f) : Value{};
    }
    if (auto* n = s.as<IfStmt>()) {
        bool c = std::get<bool>(eval(*n->cond, f));
        const Block* blk = c ? &n->then_block : (n->else_block ? &*n->else_block : nullptr);
        if (!blk) return std::nullopt;
        f.scopes.emplace_back();
        auto r = exec_block(*blk, f);
        f.scopes.pop_back();
        return r;
    }
    if (auto* n = s.as<WhileStmt>()) {
        while (std::get<bool>(eval(*n->cond, f))) {
            f.scopes.emplace_back();
            auto r = exec_block(n->body, f);
            f.scopes.pop_back();
            if (r) return r;
        }
        return std::nullopt;
    }
    if (auto* n = s.as<BlockStmt>()) {
        f.scopes.emplace_back();
        auto r = exec_block(n->block, f);
        f.scopes.pop_back();
        return r;
    }
    throw RuntimeError(s.pos, "internal: super call outside a constructor");
}

// ---- expressions ----

std::vector<Value> Machine::eval_args(const std::vector<ExprPtr>& args, Frame& f) {
    std::vector<Value> vals;
    vals.reserve(args.size());
    for (const auto& a : args) vals.push_back(eval(*a, f));
    return vals;
}

Value Machine::eval(const Expr& e, Frame& f) {
    tick(e.pos);
    if (auto* n = e.as<IntLit>()) return n->value;
    if (auto* n = e.as<LongLit>()) return n->value;
    if (auto* n = e.as<BoolLit>()) return n->value;
    if (auto* n = e.as<StrLit>()) return n->value;
    if (e.is<NullLit>()) return Value{};
    if (e.is<ThisExpr>()) return f.self;

    if (auto* n = e.as<NameRef>()) {
        switch (e.res.kind) {
            case RefKind::Local: {
                Value* v = f.lookup(n->name);
                if (!v) throw RuntimeError(e.pos, "internal: missing local '" + n->name + "'");
                return *v;
            }
            case RefKind::InstanceField:
                return f.self->fields.at(n->name);
            case RefKind::StaticField:
                return static_get(e.pos, e.res.owner, n->name);
            default:
                throw RuntimeError(e.pos, "internal: class name used as a value");
        }
    }

    if (auto* n = e.as<FieldAccess>()) {
        if (e.res.kind == RefKind::StaticField)
            return static_get(e.pos, e.res.owner, n->field);
        Value tv = eval(*n->target, f);
        if (is_null(tv)) throw RuntimeError(e.pos, "null dereference");
        auto* op = std::get_if<ObjPtr>(&tv);
        if (!op) throw RuntimeError(e.pos, "internal: field access on a non-object");
        auto it = (*op)->fields.find(n->field);
        if (it == (*op)->fields.end())
            throw RuntimeError(e.pos, "internal: object has no field '" + n->field + "'");
        return it->second;
    }

    if (auto* n = e.as<CallExpr>()) {
        if (e.res.kind == RefKind::StaticMethod) {
            // The receiver (when present) is a class name, never a value.
            std::vector<Value> args = eval_args(n->args, f);
            return call_static(e.res.owner, n->name, std::move(args));
        }
        Value recv = n->target ? eval(*n->target, f) : Value{f.self};
        if (is_null(recv)) throw RuntimeError(e.pos, "null dereference");
        auto* op = std::get_if<ObjPtr>(&recv);
        if (!op) throw RuntimeError(e.pos, "internal: method call on a non-object");
        std::vector<Value> args = eval_args(n->args, f);
        return call_method(*op, n->name, std::move(args));
    }

    if (auto* n = e.as<NewExpr>())
        return instantiate_new(e.pos, n->class_name, eval_args(n->args, f));

    if (auto* n = e.as<UnaryExpr>()) {
        Value v = eval(*n->operand, f);
        if (n->op == UnOp::Not) return !std::get<bool>(v);
        if (auto* i = std::get_if<int32_t>(&v)) return wrap_sub(int32_t{0}, *i);
        return wrap_sub(int64_t{0}, std::get<int64_t>(v));
    }

    if (auto* n = e.as<BinaryExpr>()) {
        // Both operands always evaluate, left to right (&& and || included).
        Value l = eval(*n->lhs, f);
        Value r = eval(*n->rhs, f);
        switch (n->op) {
            case BinOp::And: return std::get<bool>(l) && std::get<bool>(r);
            case BinOp::Or: return std::get<bool>(l) || std::get<bool>(r);
            default: break;
        }
        if (auto* ls = std::get_if<std::string>(&l)) {
            const std::string& rs = std::get<std::string>(r);
            switch (n->op) {
                case BinOp::Add: return *ls + rs;
                case BinOp::Eq: return *ls == rs;
                case BinOp::Ne: return *ls != rs;
                default:
                    throw RuntimeError(e.pos, "internal: bad string operator");
            }
        }
        if (auto* lb = std::get_if<bool>(&l)) {
            bool rb = std::get<bool>(r);
            if (n->op == BinOp::Eq) return *lb == rb;
            if (n->op == BinOp::Ne) return *lb != rb;
            throw RuntimeError(e.pos, "internal: bad bool operator");
        }
        auto arith = [&](auto a, auto b) -> Value {
            switch (n->op) {
                case BinOp::Add: return wrap_add(a, b);
                case BinOp::Sub: return wrap_sub(a, b);
                case BinOp::Mul: return wrap_mul(a, b);
                case BinOp::Div: return wrap_div(e.pos, a, b);
                case BinOp::Mod: return wrap_mod(e.pos, a, b);
                case BinOp::Eq: return a == b;
                case BinOp::Ne: return a != b;
                case BinOp::Lt: return a < b;
                case BinOp::Le: return a <= b;
                case BinOp::Gt: return a > b;
                case BinOp::Ge: return a >= b;
                default:
                    throw RuntimeError(e.pos, "internal: bad numeric operator");
            }
        };
        if (auto* li = std::get_if<int32_t>(&l)) return arith(*li, std::get<int32_t>(r));
        return arith(std::get<int64_t>(l), std::get<int64_t>(r));
    }

    const auto& n = std::get<IntrinsicCall>(e.node);
    switch (n.kind) {
        case Intrinsic::PolicyCreate:
            return hooks_.policy_create(*this, n.symbol);
        case Intrinsic::PolicyDiscover:
            return hooks_.policy_discover(*this, n.symbol);
        case Intrinsic::RemoteInvoke: {
            if (!f.self) throw RuntimeError(e.pos, "internal: remote_invoke without a receiver");
            std::vector<Value> args = eval_args(n.args, f);
            return hooks_.remote_invoke(*this, *f.self, n.symbol, std::move(args));
        }
        case Intrinsic::CtorInit: {
            Value that = eval(*n.args[0], f);
            if (is_null(that)) throw RuntimeError(e.pos, "null dereference");
            std::vector<Value> rest;
            rest.reserve(n.args.size() - 1);
            for (size_t i = 1; i < n.args.size(); ++i) rest.push_back(eval(*n.args[i], f));
            ObjPtr obj = std::get<ObjPtr>(that);
            if (const RemoteRefV* r = proxy_ref(*obj)) {
                (void)r;
                hooks_.remote_invoke(*this, *obj, "$ctor_init:" + n.symbol, std::move(rest));
            } else {
                run_ctor_chain(e.pos, obj, n.symbol, std::move(rest));
            }
            return Value{};
        }
    }
    throw RuntimeError(e.pos, "internal: unknown intrinsic");
}

RunResult run_program(const CheckedProgram& prog, RuntimeHooks hooks, RunLimits limits) {
    Machine m(prog, std::move(hooks), limits);
    m.run_entry();
    return {std::move(m.trace())};
}

} // namespace moo
