#pragma once

#include "moo/checker.hpp"

#include <map>
#include <string>
#include <vector>

namespace moo {

// ---------------------------------------------------------------------------
// Transformability analysis
//
// A class can be componentised (split into interface / implementation /
// factory / proxy) unless one of three rules forbids it:
//   - it declares a native method (its behaviour lives outside the language),
//   - it is a builtin class (same reason, stronger form),
//   - the closure rules: the superclass of an untransformable class stays
//     untransformable, and so does every class an untransformable class
//     references (its code cannot be rewritten to use interfaces).

enum class ExclusionRule { NativeMethod, Builtin, SuperclassRule, ReferencedByRule };

const char* rule_name(ExclusionRule r);  // "native-method", "builtin", ...

struct Exclusion {
    ExclusionRule rule;
    /// NativeMethod: the offending method's name. Builtin: empty.
    /// SuperclassRule / ReferencedByRule: the class the exclusion came from.
    std::string via;
};

struct TransformAnalysis {
    std::vector<std::string> transformable;      // sorted
    std::vector<std::string> non_transformable;  // sorted
    std::map<std::string, Exclusion> reasons;    // one entry per non-transformable class

    bool is_transformable(const std::string& cls) const { return !reasons.count(cls); }

    /// Machine-readable report; schema documented in docs/report.md.
    std::string report_json() const;
};

/// Least fixpoint of the three exclusion rules. Total on checked programs.
TransformAnalysis analyse_transformability(const CheckedProgram& prog);

// ---------------------------------------------------------------------------
// Whole-program transformation

struct TransformOptions {
    /// Wire protocols to generate proxies for. Only "RAF" exists; an empty
    /// list produces a purely local build with no proxies.
    std::vector<std::string> protocols = {"RAF"};
};

struct TransformResult {
    Program program;  // re-checked in generated mode before being returned
    TransformAnalysis analysis;
};

/// Componentise every transformable class of `prog`: per class A emit
/// A_O_Int / A_C_Int / A_O_Local / A_C_Local / A_O_Factory / A_C_Factory and
/// per-protocol proxies, rewrite all transformable code to be
/// implementation-unaware, keep untransformable classes byte-identical, and
/// re-route the entry point through the factories.
///
/// Throws CheckError for unknown protocol names and for programs whose
/// values flow from a componentised class into a slot typed by an
/// untransformed class (such a flow cannot be typed after rewriting).
TransformResult transform_program(const CheckedProgram& prog, TransformOptions opts = {});

} // namespace moo
