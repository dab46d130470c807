#pragma once

#include "moo/ast.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace moo {

/// Source mode checks hand-written programs and rejects everything reserved
/// for generated code: `get_`/`set_` member prefixes, the generated family
/// name suffixes, `$` in identifiers, interface declarations and implements
/// clauses, the `ref` type, runtime intrinsics, and method-name overloading.
/// Generated mode accepts those constructs and drops the static rule about
/// where final fields may be assigned (generated set accessors assign final
/// fields; the runtime's initialisation-phase seal enforces finality there).
enum class CheckMode { Source, Generated };

struct CheckOptions {
    CheckMode mode = CheckMode::Source;
    /// Require a unique `public static void main()` entry point.
    bool require_entry = true;
};

/// A program whose names are resolved and whose expressions carry types.
/// Owns the (annotated) AST and provides the lookup API used by the
/// transform engine and the interpreter. Movable, not copyable: the lookup
/// tables point into the owned Program.
class CheckedProgram {
  public:
    Program program;

    CheckedProgram() = default;
    CheckedProgram(const CheckedProgram&) = delete;
    CheckedProgram& operator=(const CheckedProgram&) = delete;
    CheckedProgram(CheckedProgram&&) = default;
    CheckedProgram& operator=(CheckedProgram&&) = default;

    const ClassDecl* find_class(const std::string& name) const;
    const InterfaceDecl* find_interface(const std::string& name) const;

    /// Instance-method lookup by (name, arity), walking the superclass chain
    /// from `cls` upward. Reports the declaring class through `owner_out`.
    const MethodDecl* resolve_instance_method(const std::string& cls,
                                              const std::string& name, size_t arity,
                                              const ClassDecl** owner_out = nullptr) const;

    /// Static members are not inherited: lookups are in `cls` itself only.
    const MethodDecl* find_static_method(const std::string& cls, const std::string& name,
                                         size_t arity) const;
    const FieldDecl* find_static_field(const std::string& cls, const std::string& name) const;

    const CtorDecl* find_ctor(const std::string& cls, size_t arity) const;

    const FieldDecl* resolve_instance_field(const std::string& cls, const std::string& name,
                                            const ClassDecl** owner_out = nullptr) const;

    /// Declared instance fields of the whole chain, base classes first, each
    /// class in source order. Field shadowing is rejected at check time, so
    /// names are unique.
    std::vector<const FieldDecl*> all_instance_fields(const std::string& cls) const;

    /// Reflexive subclass relation.
    bool is_subclass_of(const std::string& sub, const std::string& sup) const;
    /// Reflexive interface-extension relation.
    bool iface_extends(const std::string& sub, const std::string& sup) const;
    /// True when `cls` or an ancestor implements `iface` or a sub-interface.
    bool class_implements(const std::string& cls, const std::string& iface) const;

    const MethodDecl* find_interface_method(const std::string& iface, const std::string& name,
                                            size_t arity, const InterfaceDecl** owner_out
                                            = nullptr) const;

    /// May a value of type `from` be bound where `to` is expected?
    /// Identical types; null to any named/handle type; subclass to class;
    /// class to interface it (or an ancestor) implements; sub-interface to
    /// super-interface. Never between distinct primitives.
    bool assignable(const TypeRef& to, const TypeRef& from) const;

  private:
    friend class Checker;
    void index();
    std::unordered_map<std::string, const ClassDecl*> classes_;
    std::unordered_map<std::string, const InterfaceDecl*> ifaces_;
};

/// Resolve and type the whole program. Throws CheckError (fail-fast, first
/// error wins; diagnostics are deterministic). On success every expression
/// carries a type and every name a resolution.
CheckedProgram check_program(Program p, CheckOptions opts = {});

/// True when `name` ends in one of the generated-family suffixes
/// (_O_Int, _C_Int, _O_Local, _C_Local, _O_Factory, _C_Factory) or contains
/// a proxy infix (_O_Proxy_, _C_Proxy_).
bool has_reserved_suffix(const std::string& name);

} // namespace moo
