#include "moo/builtins.hpp"

#include <cstdlib>

namespace moo {

namespace {

int32_t as_int(const Value& v) { return std::get<int32_t>(v); }
int64_t as_long(const Value& v) { return std::get<int64_t>(v); }
const std::string& as_str(const Value& v) { return std::get<std::string>(v); }

} // namespace

BuiltinTable default_builtins() {
    BuiltinTable t;

    // Math — pure static helpers over the wrapping integer types.
    t.add_static("Math", "toInt", 1, [](Machine&, std::vector<Value>& a) -> Value {
        return static_cast<int32_t>(static_cast<uint64_t>(as_long(a[0])));
    });
    t.add_static("Math", "abs", 1, [](Machine&, std::vector<Value>& a) -> Value {
        int32_t v = as_int(a[0]);
        return v < 0 ? static_cast<int32_t>(0u - static_cast<uint32_t>(v)) : v;
    });
    t.add_static("Math", "labs", 1, [](Machine&, std::vector<Value>& a) -> Value {
        int64_t v = as_long(a[0]);
        return v < 0 ? static_cast<int64_t>(0ull - static_cast<uint64_t>(v)) : v;
    });
    t.add_static("Math", "max", 2, [](Machine&, std::vector<Value>& a) -> Value {
        return std::max(as_int(a[0]), as_int(a[1]));
    });
    t.add_static("Math", "min", 2, [](Machine&, std::vector<Value>& a) -> Value {
        return std::min(as_int(a[0]), as_int(a[1]));
    });

    // Str — string utilities.
    t.add_static("Str", "length", 1, [](Machine&, std::vector<Value>& a) -> Value {
        return static_cast<int32_t>(as_str(a[0]).size());
    });
    t.add_static("Str", "rep", 2, [](Machine&, std::vector<Value>& a) -> Value {
        const std::string& s = as_str(a[0]);
        int32_t n = as_int(a[1]);
        std::string out;
        for (int32_t i = 0; i < n; ++i) out += s;
        return out;
    });

    // Cfg — a constant the host environment provides.
    t.add_const("Cfg", "K", int64_t{42});

    // Acc — a stateful native object.
    t.add_ctor("Acc", 1, [](Machine&, Obj& o, std::vector<Value>& a) {
        o.fields["value"] = as_int(a[0]);
    });
    t.add_method("Acc", "add", 1, [](Machine&, Obj& o, std::vector<Value>& a) -> Value {
        uint32_t cur = static_cast<uint32_t>(std::get<int32_t>(o.fields["value"]));
        o.fields["value"] = static_cast<int32_t>(cur + static_cast<uint32_t>(as_int(a[0])));
        return {};
    });
    t.add_method("Acc", "total", 0, [](Machine&, Obj& o, std::vector<Value>&) -> Value {
        return std::get<int32_t>(o.fields["value"]);
    });

    // Dbg — fault injection. die() terminates the whole process immediately
    // (no unwinding, no flushing), simulating a node crash mid-call.
    t.add_static("Dbg", "die", 0, [](Machine&, std::vector<Value>&) -> Value {
        std::_Exit(9);
    });

    // Scaler — a native method on an ordinary (non-builtin) class. The class
    // declares `long unit` itself; the native body reads it.
    t.add_method("Scaler", "scale", 1, [](Machine&, Obj& o, std::vector<Value>& a) -> Value {
        uint64_t unit = static_cast<uint64_t>(std::get<int64_t>(o.fields.at("unit")));
        return static_cast<int64_t>(unit * static_cast<uint64_t>(as_long(a[0])));
    });

    return t;
}

const char* const kBuiltinDecls = R"(builtin class Math {
    public static int toInt(long v);
    public static int abs(int v);
    public static long labs(long v);
    public static int max(int a, int b);
    public static int min(int a, int b);
}

builtin class Str {
    public static int length(string s);
    public static string rep(string s, int n);
}

builtin class Cfg {
    public static final long K;
}

builtin class Acc {
    Acc(int start);
    public void add(int x);
    public int total();
}

builtin class Dbg {
    public static void die();
}
)";

} // namespace moo
