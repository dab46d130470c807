#pragma once

#include "moo/diag.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace moo {

// ---------------------------------------------------------------------------
// Types

enum class TypeKind { Int, Long, Bool, String, Void, Named, Handle, Null };

/// A type as written in source. `Handle` is the opaque remote-handle type
/// (`ref`) that only generated proxy classes use for their binding field.
/// `Null` is synthesised by the checker as the type of the null literal; it
/// never appears in declarations.
struct TypeRef {
    TypeKind kind = TypeKind::Void;
    std::string name;  // Named only

    static TypeRef int_() { return {TypeKind::Int, {}}; }
    static TypeRef long_() { return {TypeKind::Long, {}}; }
    static TypeRef bool_() { return {TypeKind::Bool, {}}; }
    static TypeRef string_() { return {TypeKind::String, {}}; }
    static TypeRef void_() { return {TypeKind::Void, {}}; }
    static TypeRef handle() { return {TypeKind::Handle, {}}; }
    static TypeRef named(std::string n) { return {TypeKind::Named, std::move(n)}; }
    static TypeRef null_() { return {TypeKind::Null, {}}; }

    bool is_named() const { return kind == TypeKind::Named; }
    bool is_void() const { return kind == TypeKind::Void; }
    bool is_null() const { return kind == TypeKind::Null; }
    bool is_primitive() const {
        return kind == TypeKind::Int || kind == TypeKind::Long ||
               kind == TypeKind::Bool || kind == TypeKind::String;
    }
    bool operator==(const TypeRef& o) const {
        return kind == o.kind && (kind != TypeKind::Named || name == o.name);
    }
    bool operator!=(const TypeRef& o) const { return !(*this == o); }
};

std::string type_name(const TypeRef& t);

// ---------------------------------------------------------------------------
// Expressions

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;
struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Block {
    std::vector<StmtPtr> stmts;
};

enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp { Not, Neg };

/// Runtime intrinsics. Only generated code may contain these; the Source
/// check mode rejects them.
enum class Intrinsic {
    RemoteInvoke,    // remote_invoke("member", args...) on this proxy's handle
    PolicyCreate,    // policy_create("Class") -> Class_O_Int
    PolicyDiscover,  // policy_discover("Class") -> Class_C_Int
    CtorInit,        // ctor_init("Class", that, args...) runs an original ctor body
};

struct IntLit { int32_t value = 0; };
struct LongLit { int64_t value = 0; };
struct BoolLit { bool value = false; };
struct StrLit { std::string value; };
struct NullLit {};
struct ThisExpr {};
struct NameRef { std::string name; };
struct FieldAccess { ExprPtr target; std::string field; };
struct CallExpr {  // target == nullptr means a bare call on this / own statics
    ExprPtr target;
    std::string name;
    std::vector<ExprPtr> args;
};
struct NewExpr { std::string class_name; std::vector<ExprPtr> args; };
struct UnaryExpr { UnOp op; ExprPtr operand; };
struct BinaryExpr { BinOp op; ExprPtr lhs, rhs; };
struct IntrinsicCall {
    Intrinsic kind;
    std::string symbol;  // member name / class name argument
    std::vector<ExprPtr> args;
};

/// What a name or member access resolved to. Filled in by the checker,
/// ignored by structural equality.
enum class RefKind {
    None,
    Local,           // local variable or parameter
    InstanceField,   // owner = declaring class
    StaticField,     // owner = declaring class
    InstanceMethod,  // owner = class or interface the lookup went through
    StaticMethod,    // owner = declaring class
    ClassName,       // a bare name that denotes a class (receiver of statics)
};

struct Resolution {
    RefKind kind = RefKind::None;
    std::string owner;
};

struct Expr {
    Pos pos;
    std::variant<IntLit, LongLit, BoolLit, StrLit, NullLit, ThisExpr, NameRef,
                 FieldAccess, CallExpr, NewExpr, UnaryExpr, BinaryExpr,
                 IntrinsicCall>
        node;

    // Checker annotations.
    TypeRef type;
    Resolution res;

    template <class T> T* as() { return std::get_if<T>(&node); }
    template <class T> const T* as() const { return std::get_if<T>(&node); }
    template <class T> bool is() const { return std::holds_alternative<T>(node); }
};

// ---------------------------------------------------------------------------
// Statements

struct LocalDecl { TypeRef type; std::string name; ExprPtr init; };  // init may be null
struct AssignStmt { ExprPtr lhs; ExprPtr rhs; };                     // lhs: NameRef | FieldAccess
struct ExprStmt { ExprPtr expr; };
struct PrintStmt { ExprPtr expr; };
struct ReturnStmt { ExprPtr expr; };  // expr may be null
struct IfStmt { ExprPtr cond; Block then_block; std::optional<Block> else_block; };
struct WhileStmt { ExprPtr cond; Block body; };
struct SuperCall { std::vector<ExprPtr> args; };  // first statement of a ctor only
struct BlockStmt { Block block; };

struct Stmt {
    Pos pos;
    std::variant<LocalDecl, AssignStmt, ExprStmt, PrintStmt, ReturnStmt, IfStmt,
                 WhileStmt, SuperCall, BlockStmt>
        node;

    template <class T> T* as() { return std::get_if<T>(&node); }
    template <class T> const T* as() const { return std::get_if<T>(&node); }
    template <class T> bool is() const { return std::holds_alternative<T>(node); }
};

// ---------------------------------------------------------------------------
// Declarations

enum class Visibility { Public, Protected, Private };

struct Param { TypeRef type; std::string name; };

struct FieldDecl {
    Pos pos;
    std::string name;
    TypeRef type;
    Visibility vis = Visibility::Public;
    bool is_final = false;
    bool is_static = false;
};

struct MethodDecl {
    Pos pos;
    std::string name;
    std::vector<Param> params;
    TypeRef ret = TypeRef::void_();
    Visibility vis = Visibility::Public;
    bool is_static = false;
    bool is_native = false;
    std::optional<Block> body;  // absent for native and interface methods
};

struct CtorDecl {
    Pos pos;
    std::vector<Param> params;
    Visibility vis = Visibility::Public;
    std::optional<Block> body;  // absent only in builtin classes
};

struct ClassDecl {
    Pos pos;
    std::string name;
    std::optional<std::string> superclass;
    std::optional<std::string> implements_iface;
    bool is_builtin = false;

    std::vector<FieldDecl> fields;  // instance fields
    std::vector<FieldDecl> static_fields;
    std::vector<CtorDecl> ctors;
    std::vector<MethodDecl> methods;  // instance methods
    std::vector<MethodDecl> static_methods;
    // Merged static initialiser: explicit `static { ... }` statements and
    // `static T f = e;` initialisers, in source order.
    std::optional<Block> static_init;
};

struct InterfaceDecl {
    Pos pos;
    std::string name;
    std::optional<std::string> extends_iface;
    std::vector<MethodDecl> methods;  // bodyless, implicitly public instance sigs
};

using Decl = std::variant<ClassDecl, InterfaceDecl>;

struct Program {
    std::vector<Decl> decls;  // source order
    std::string entry_class;  // empty when no unique entry candidate was found
    std::string entry_method;

    const ClassDecl* find_class(const std::string& name) const;
    const InterfaceDecl* find_interface(const std::string& name) const;
};

inline const std::string& decl_name(const Decl& d) {
    if (auto* c = std::get_if<ClassDecl>(&d)) return c->name;
    return std::get<InterfaceDecl>(d).name;
}

// ---------------------------------------------------------------------------
// Deep copy and structural equality (positions and annotations ignored)

ExprPtr clone(const Expr& e);
StmtPtr clone(const Stmt& s);
Block clone(const Block& b);
ClassDecl clone(const ClassDecl& c);
InterfaceDecl clone(const InterfaceDecl& i);
MethodDecl clone(const MethodDecl& m);
CtorDecl clone(const CtorDecl& c);
Program clone(const Program& p);

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const Block& a, const Block& b);
bool structurally_equal(const ClassDecl& a, const ClassDecl& b);
bool structurally_equal(const InterfaceDecl& a, const InterfaceDecl& b);
bool structurally_equal(const MethodDecl& a, const MethodDecl& b);
bool structurally_equal(const Decl& a, const Decl& b);
bool structurally_equal(const Program& a, const Program& b);

// ---------------------------------------------------------------------------
// Small builders, used by the transform and by tests.

namespace build {

inline ExprPtr mk(Expr e) { return std::make_unique<Expr>(std::move(e)); }

inline ExprPtr name(std::string n) { return mk({{}, NameRef{std::move(n)}, {}, {}}); }
inline ExprPtr this_() { return mk({{}, ThisExpr{}, {}, {}}); }
inline ExprPtr int_lit(int32_t v) { return mk({{}, IntLit{v}, {}, {}}); }
inline ExprPtr long_lit(int64_t v) { return mk({{}, LongLit{v}, {}, {}}); }
inline ExprPtr str_lit(std::string v) { return mk({{}, StrLit{std::move(v)}, {}, {}}); }

inline ExprPtr field(ExprPtr target, std::string f) {
    return mk({{}, FieldAccess{std::move(target), std::move(f)}, {}, {}});
}
inline ExprPtr call(ExprPtr target, std::string n, std::vector<ExprPtr> args = {}) {
    return mk({{}, CallExpr{std::move(target), std::move(n), std::move(args)}, {}, {}});
}
inline ExprPtr bare_call(std::string n, std::vector<ExprPtr> args = {}) {
    return mk({{}, CallExpr{nullptr, std::move(n), std::move(args)}, {}, {}});
}
inline ExprPtr new_(std::string cls, std::vector<ExprPtr> args = {}) {
    return mk({{}, NewExpr{std::move(cls), std::move(args)}, {}, {}});
}
inline ExprPtr intrinsic(Intrinsic k, std::string symbol, std::vector<ExprPtr> args = {}) {
    return mk({{}, IntrinsicCall{k, std::move(symbol), std::move(args)}, {}, {}});
}

inline StmtPtr mks(Stmt s) { return std::make_unique<Stmt>(std::move(s)); }

inline StmtPtr expr_stmt(ExprPtr e) { return mks({{}, ExprStmt{std::move(e)}}); }
inline StmtPtr assign(ExprPtr lhs, ExprPtr rhs) {
    return mks({{}, AssignStmt{std::move(lhs), std::move(rhs)}});
}
inline StmtPtr ret(ExprPtr e) { return mks({{}, ReturnStmt{std::move(e)}}); }
inline StmtPtr local(TypeRef t, std::string n, ExprPtr init) {
    return mks({{}, LocalDecl{std::move(t), std::move(n), std::move(init)}});
}

} // namespace build

} // namespace moo
