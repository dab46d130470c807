#pragma once

#include "moo/interp.hpp"

namespace moo {

/// Native implementations available to every program in this toolchain.
/// A program only gains access to a class by declaring it (as a `builtin`
/// class, or via `native` methods); this table supplies the behaviour:
///
///   Math   — static toInt/abs/labs/max/min (two's-complement wrapping)
///   Str    — static length/rep
///   Cfg    — static final long K = 42
///   Acc    — stateful accumulator: Acc(int), add(int), total()
///   Dbg    — static die(): hard process exit with status 9, bypassing
///            every destructor and flush (crash injection for fault tests)
///   Scaler — native instance method scale(long) on an ordinary class
///            holding a `long unit` field
BuiltinTable default_builtins();

/// MiniOO declarations matching default_builtins(), as source text.
/// Programs that use a builtin class must include its declaration; tests
/// and the corpus splice these in verbatim.
extern const char* const kBuiltinDecls;

} // namespace moo
