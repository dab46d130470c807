#pragma once

#include "moo/ast.hpp"

#include <string>

namespace moo {

/// Render source in the canonical layout: four-space indent, one blank line
/// between members, members grouped as instance fields / constructors /
/// instance methods / static fields / static initialiser / static methods,
/// explicit visibility on every class member, and minimal parentheses.
/// parse(print(p)) is structurally equal to p.
std::string print_program(const Program& p);
std::string print_decl(const Decl& d);

/// Single-node renderers, used in diagnostics and tests.
std::string print_expr(const Expr& e);
std::string print_stmt(const Stmt& s, int indent = 0);

} // namespace moo
