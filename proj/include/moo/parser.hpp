#pragma once

#include "moo/ast.hpp"

#include <string>

namespace moo {

/// Parse one compilation unit. Performs duplicate-declaration checks
/// ((name, arity) for methods, names for fields/classes, arity for ctors)
/// and desugars static field initialisers into the class's single static
/// initialiser block, preserving source order. Throws ParseError.
///
/// The entry point is filled in when exactly one `public static void main()`
/// exists; otherwise it is left empty and check_program reports the problem.
Program parse_program(const std::string& src);

} // namespace moo
