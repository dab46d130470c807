#pragma once

#include "moo/checker.hpp"
#include "moo/diag.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace moo {

class Machine;

// ---------------------------------------------------------------------------
// Values

struct Obj;
using ObjPtr = std::shared_ptr<Obj>;

/// Handle to an object owned by another node: (node id, object id, original
/// class name). Held only in the `$ref` binding field of proxy objects; it is
/// never a user-visible MiniOO value.
struct RemoteRefV {
    std::string node;
    uint64_t oid = 0;
    std::string cls;
    bool operator==(const RemoteRefV&) const = default;
};

/// monostate plays the role of null (and of void call results).
using Value = std::variant<std::monostate, int32_t, int64_t, bool, std::string, ObjPtr,
                           RemoteRefV>;

struct Obj {
    uint64_t id = 0;        // unique per machine
    std::string cls;        // runtime class name
    std::unordered_map<std::string, Value> fields;
    int init_depth = 0;     // factory-initialisation nesting
    bool sealed = false;    // once set, final fields reject writes
};

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Rendering used by print: ints and longs in decimal, bools as true/false,
/// strings verbatim.
std::string format_value(const Value& v);

/// If the object is a proxy (carries a `$ref` remote handle), return it.
const RemoteRefV* proxy_ref(const Obj& o);

// ---------------------------------------------------------------------------
// Trace

using Trace = std::vector<std::string>;

bool trace_equal(const Trace& a, const Trace& b);

// ---------------------------------------------------------------------------
// Native (builtin) implementations

using NativeStatic = std::function<Value(Machine&, std::vector<Value>&)>;
using NativeMethod = std::function<Value(Machine&, Obj&, std::vector<Value>&)>;
using NativeCtor = std::function<void(Machine&, Obj&, std::vector<Value>&)>;

/// Behaviour for `builtin` classes and for `native` methods of ordinary
/// classes, keyed by declaring class, member name, and arity. The same table
/// serves local and distributed runs.
struct BuiltinTable {
    std::map<std::tuple<std::string, std::string, size_t>, NativeStatic> statics;
    std::map<std::tuple<std::string, std::string, size_t>, NativeMethod> methods;
    std::map<std::pair<std::string, size_t>, NativeCtor> ctors;
    std::map<std::pair<std::string, std::string>, Value> consts;  // static final fields

    void add_static(std::string cls, std::string name, size_t arity, NativeStatic fn) {
        statics[{std::move(cls), std::move(name), arity}] = std::move(fn);
    }
    void add_method(std::string cls, std::string name, size_t arity, NativeMethod fn) {
        methods[{std::move(cls), std::move(name), arity}] = std::move(fn);
    }
    void add_ctor(std::string cls, size_t arity, NativeCtor fn) {
        ctors[{std::move(cls), arity}] = std::move(fn);
    }
    void add_const(std::string cls, std::string field, Value v) {
        consts[{std::move(cls), std::move(field)}] = std::move(v);
    }

    const NativeStatic* find_static(const std::string& cls, const std::string& name,
                                    size_t arity) const;
    const NativeMethod* find_method(const std::string& cls, const std::string& name,
                                    size_t arity) const;
    const NativeCtor* find_ctor(const std::string& cls, size_t arity) const;
    const Value* find_const(const std::string& cls, const std::string& field) const;
};

// ---------------------------------------------------------------------------
// Runtime hooks: how intrinsics and observable effects are carried out.
// The local defaults run everything in this machine; the distribution
// runtime swaps in policy- and transport-aware versions.

struct RuntimeHooks {
    /// policy_create("X"): produce an object usable through X_O_Int.
    /// Default: raw local instantiation of X_O_Local.
    std::function<Value(Machine&, const std::string&)> policy_create;

    /// policy_discover("X"): produce the X_C_Int singleton.
    /// Default: Machine::discover_local.
    std::function<Value(Machine&, const std::string&)> policy_discover;

    /// remote_invoke from a proxy method body, and internal cross-node
    /// requests (reserved members beginning with '$'). Default: error — a
    /// purely local run must never reach a proxy.
    std::function<Value(Machine&, Obj&, const std::string&, std::vector<Value>)> remote_invoke;

    /// A printed line. Default: append to the machine's trace.
    std::function<void(Machine&, const std::string&)> emit_line;

    /// Factory initialisation completed against a proxy: tell the owning
    /// node to seal the real object. Default: error (unreachable locally).
    std::function<void(Machine&, const RemoteRefV&)> seal_remote;

    BuiltinTable builtins;
};

/// Hooks for single-address-space execution (original or transformed-local).
RuntimeHooks local_hooks(BuiltinTable builtins);

struct RunLimits {
    uint64_t step_budget = 10'000'000;
    int max_call_depth = 512;
};

// ---------------------------------------------------------------------------
// Machine

/// Tree-walking evaluator for one address space. Confine each instance to a
/// single thread; distinct machines are independent.
class Machine {
  public:
    Machine(const CheckedProgram& prog, RuntimeHooks hooks, RunLimits limits = {});

    /// Execute the program's entry method to completion.
    void run_entry();

    /// Invoke a static method (native or not). Triggers lazy static
    /// initialisation of the class.
    Value call_static(const std::string& cls, const std::string& name,
                      std::vector<Value> args);

    /// Invoke an instance method with dynamic dispatch on obj's class.
    Value call_method(const ObjPtr& obj, const std::string& name, std::vector<Value> args);

    /// The local singleton path for policy_discover: get or create the
    /// C_Local singleton through its generated accessor, run clinit exactly
    /// once, seal. Re-entrant discovery during clinit observes the partially
    /// initialised singleton.
    Value discover_local(const std::string& orig_cls);

    /// Allocate with default fields and run only the class's own
    /// parameterless constructor body — no superclass chain. This is the
    /// make() path; factories perform all real initialisation.
    ObjPtr instantiate_raw(const std::string& cls);

    /// Full `new` semantics: allocate, run the constructor chain, seal
    /// (except *_C_Local, whose initialisation continues in clinit).
    ObjPtr instantiate_new(Pos pos, const std::string& cls, std::vector<Value> args);

    /// Allocate with default fields, run no constructor. Used to bind
    /// proxies.
    ObjPtr alloc_object(const std::string& cls);

    /// Run class `cls`'s original constructor of matching arity on an
    /// existing object (the ctor_init path for untransformed superclasses).
    void run_ctor_on(const ObjPtr& obj, const std::string& cls, std::vector<Value> args);

    void seal_object(Obj& o) { o.sealed = true; }

    const CheckedProgram& prog() const { return prog_; }
    RuntimeHooks& hooks() { return hooks_; }
    Trace& trace() { return trace_; }
    uint64_t steps_used() const { return steps_; }

    void emit(const std::string& line);

  private:
    struct Frame {
        ObjPtr self;
        std::vector<std::unordered_map<std::string, Value>> scopes;

        Value* lookup(const std::string& n) {
            for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
                auto f = it->find(n);
                if (f != it->end()) return &f->second;
            }
            return nullptr;
        }
        void declare(const std::string& n, Value v) { scopes.back()[n] = std::move(v); }
    };

    enum class InitState { Uninit, Running, Done };
    struct StaticStore {
        InitState state = InitState::Uninit;
        std::unordered_map<std::string, Value> values;
    };

    const CheckedProgram& prog_;
    RuntimeHooks hooks_;
    RunLimits limits_;
    std::unordered_map<std::string, StaticStore> statics_;
    std::unordered_map<std::string, Value> discovered_;  // original class → C singleton
    Trace trace_;
    uint64_t next_obj_id_ = 1;
    uint64_t steps_ = 0;
    int call_depth_ = 0;

    void validate_builtin_decls() const;
    void tick(Pos pos);

    Value default_value(const TypeRef& t) const;
    ObjPtr alloc(const std::string& cls);

    void ensure_class_init(Pos pos, const std::string& cls);
    Value static_get(Pos pos, const std::string& cls, const std::string& field);
    void static_set(Pos pos, const std::string& cls, const std::string& field, Value v);

    void run_ctor_chain(Pos pos, const ObjPtr& obj, const std::string& cls,
                        std::vector<Value> args);

    Value invoke_body(const ClassDecl& owner, const MethodDecl& m, ObjPtr self,
                      std::vector<Value> args);

    std::optional<Value> exec_block(const Block& b, Frame& f);
    std::optional<Value> exec_stmt(const Stmt& s, Frame& f);
    Value eval(const Expr& e, Frame& f);
    std::vector<Value> eval_args(const std::vector<ExprPtr>& args, Frame& f);

    void store_field(Pos pos, const ObjPtr& obj, const std::string& owner,
                     const std::string& field, Value v);

    struct DepthGuard;
};

struct RunResult {
    Trace trace;
};

/// Convenience wrapper: build a machine, run the entry point, return the
/// trace. RuntimeError propagates.
RunResult run_program(const CheckedProgram& prog, RuntimeHooks hooks, RunLimits limits = {});

} // namespace moo
