// Componentisation engine: golden family shape, determinism, analysis
// report, original/transformed trace equality, and refusal paths.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/builtins.hpp"
#include "moo/checker.hpp"
#include "moo/interp.hpp"
#include "moo/parser.hpp"
#include "moo/printer.hpp"
#include "moo/xform.hpp"

#include "json.hpp"

using namespace moo;

namespace {

CheckedProgram check_src(const std::string& src, bool entry = true) {
    CheckOptions o;
    o.require_entry = entry;
    return check_program(parse_program(src), o);
}

const Decl* find_decl(const Program& p, const std::string& name) {
    for (const auto& d : p.decls)
        if (decl_name(d) == name) return &d;
    return nullptr;
}

Trace run_original(const std::string& src) {
    CheckedProgram cp = check_src(src);
    return run_program(cp, local_hooks(default_builtins())).trace;
}

Trace run_transformed(const std::string& src) {
    CheckedProgram cp = check_src(src);
    TransformResult tr = transform_program(cp);
    CheckOptions o;
    o.mode = CheckMode::Generated;
    CheckedProgram gp = check_program(clone(tr.program), o);
    return run_program(gp, local_hooks(default_builtins())).trace;
}

void trace_equal_case(const std::string& src) {
    Trace a = run_original(src);
    Trace b = run_transformed(src);
    CHECK(a == b);
}

const std::string kBuiltins = kBuiltinDecls;

} // namespace

TEST_CASE("golden component family for the sample class") {
    const std::string src = R"(
class Y {
    public long n(long j) { return j + 1L; }
    public static final long K = 7L;
}
class Z {
    private long v;
    Z(long v) { this.v = v; }
    public int q(int i) { return i + 1; }
}
class X {
    private Y y;
    X(Y y) { this.y = y; }
    protected long m(long j) { return y.n(j); }
    private static final Z z = new Z(Y.K);
    private static int p(int i) { return z.q(i); }
}
)";
    const std::string expected_src = R"(
interface X_O_Int {
    Y_O_Int get_y();
    void set_y(Y_O_Int y);
    long m(long j);
}
interface X_C_Int {
    Z_O_Int get_z();
    void set_z(Z_O_Int z);
    int p(int i);
}
class X_O_Local implements X_O_Int {
    private Y_O_Int y;
    public X_O_Local() { }
    public Y_O_Int get_y() { return y; }
    public void set_y(Y_O_Int y) { this.y = y; }
    public long m(long j) { return get_y().n(j); }
}
class X_C_Local implements X_C_Int {
    private final Z_O_Int z;
    public X_C_Local() { }
    public Z_O_Int get_z() { return z; }
    public void set_z(Z_O_Int z) { this.z = z; }
    public int p(int i) { return get_z().q(i); }
    private static X_C_Int me;
    static { me = new X_C_Local(); }
    public static X_C_Int get_me() { return me; }
}
class X_O_Factory {
    public static X_O_Int make() { return policy_create("X"); }
    public static void init(X_O_Int that, Y_O_Int y) { that.set_y(y); }
}
class X_C_Factory {
    public static X_C_Int discover() { return policy_discover("X"); }
    public static void clinit(X_C_Int that) {
        Z_O_Int $t0 = Z_O_Factory.make();
        Z_O_Factory.init($t0, Y_C_Factory.discover().get_K());
        that.set_z($t0);
    }
}
class X_O_Proxy_RAF implements X_O_Int {
    private ref $ref;
    public X_O_Proxy_RAF() { }
    public Y_O_Int get_y() { return remote_invoke("get_y"); }
    public void set_y(Y_O_Int y) { remote_invoke("set_y", y); }
    public long m(long j) { return remote_invoke("m", j); }
}
class X_C_Proxy_RAF implements X_C_Int {
    private ref $ref;
    public X_C_Proxy_RAF() { }
    public Z_O_Int get_z() { return remote_invoke("get_z"); }
    public void set_z(Z_O_Int z) { remote_invoke("set_z", z); }
    public int p(int i) { return remote_invoke("p", i); }
}
)";
    CheckedProgram cp = check_src(src, /*entry=*/false);
    TransformResult tr = transform_program(cp);
    CHECK(tr.analysis.transformable.size() == 3);
    CHECK(tr.program.decls.size() == 24); // three families of eight

    Program expected = parse_program(expected_src);
    for (const auto& ed : expected.decls) {
        const std::string n = decl_name(ed);
        const Decl* got = find_decl(tr.program, n);
        REQUIRE_MESSAGE(got != nullptr, "missing generated decl " << n);
        CHECK_MESSAGE(structurally_equal(*got, ed),
                      "golden mismatch for " << n << "\n--- expected ---\n" << print_decl(ed)
                                             << "--- got ---\n" << print_decl(*got));
    }

    SUBCASE("transforming the same program twice prints identically") {
        TransformResult tr2 = transform_program(check_src(src, false));
        CHECK(print_program(tr.program) == print_program(tr2.program));
    }
}

TEST_CASE("analysis report is machine-readable and consistent") {
    CheckedProgram cp = check_src(kBuiltins + R"(
class Plain { public int f() { return 1; } }
class Rough { public native long r(long x); }
class Friend { private Rough held; }
)",
                                  false);
    TransformAnalysis a = analyse_transformability(cp);
    auto j = nlohmann::json::parse(a.report_json());
    CHECK(j.at("transformable").is_array());
    CHECK(j.at("non_transformable").is_array());
    // Every declared class appears in exactly one partition.
    std::set<std::string> seen;
    for (const auto& t : j.at("transformable")) seen.insert(t.get<std::string>());
    for (const auto& t : j.at("non_transformable")) seen.insert(t.get<std::string>());
    CHECK(seen.count("Plain") == 1);
    CHECK(seen.count("Rough") == 1);
    CHECK(seen.count("Friend") == 1);
    CHECK(a.transformable == std::vector<std::string>{"Friend", "Plain"});
    CHECK(a.reasons.at("Rough").rule == ExclusionRule::NativeMethod);
    CHECK(a.reasons.at("Rough").via == "r");
    CHECK(a.reasons.at("Math").rule == ExclusionRule::Builtin);
    // The referenced-by closure runs *from* the non-transformable side only:
    // holding a field of a native class does not exclude the holder.
    CHECK(a.is_transformable("Friend"));
    for (const auto& [cls, ex] : a.reasons) {
        CHECK(j.at("reasons").contains(cls));
        CHECK(j.at("reasons").at(cls).at("rule").get<std::string>() == rule_name(ex.rule));
    }
}

TEST_CASE("trace equality: sample family end to end") {
    trace_equal_case(R"(
class Y {
    public long n(long j) { return j + 3L; }
    public static final long K = 7L;
}
class Z {
    private long v;
    Z(long v) { this.v = v; }
    public int q(int i) { return i + i; }
}
class X {
    private Y y;
    X(Y y) { this.y = y; }
    public int m(long j) { print(y.n(j)); return 0; }
    public static final Z z = new Z(Y.K);
    public static int p(int i) { return z.q(i); }
}
class Main {
    public static void main() {
        X x = new X(new Y());
        x.m(7L);
        print(X.p(3));
    }
}
)");
}

TEST_CASE("trace equality: lazy static initialisation is preserved") {
    trace_equal_case(R"(
class A {
    public static int c;
    static { print("initA"); c = c + 1; }
    public static int get() { return c; }
}
class Main {
    public static void main() {
        print("start");
        print(A.get());
        print(A.c);
    }
}
)");
    trace_equal_case(R"(
class C {
    public int x;
    static { print("initC"); }
    public static int probe() { return 5; }
}
class Main {
    public static void main() {
        C c = new C();
        print(c.x);
        print(C.probe());
    }
}
)");
    trace_equal_case(R"(
class A {
    public static int x;
    static { x = B.y + 1; }
}
class B {
    public static int y;
    static { y = A.x + 1; }
}
class Main {
    public static void main() {
        print(A.x);
        print(B.y);
    }
}
)");
}

TEST_CASE("trace equality: arithmetic wrapping is unchanged by the rewrite") {
    trace_equal_case(R"(
class Main {
    public static void main() {
        int big = 2147483647;
        print(big + 1);
        int n = -2147483647 - 1;
        print(n / -1);
        print(n % -1);
        long lb = 9223372036854775807L;
        print(lb + 1L);
        print(7 / 2);
        print(-7 / 2);
        print(7 % 3);
        print(-7 % 3);
    }
}
)");
}

TEST_CASE("trace equality: builtins stay byte-identical and callable") {
    trace_equal_case(kBuiltins + R"(
class Main {
    public static void main() {
        print(Str.length("ab" + "c"));
        print(Str.rep("xy", 3));
        print(Math.max(3, 9));
        print(Math.abs(-5));
        print(Math.toInt(Cfg.K));
        Acc a = new Acc(40);
        a.add(2);
        print(a.total());
    }
}
)");
}

TEST_CASE("trace equality: inheritance and polymorphic dispatch") {
    trace_equal_case(R"(
class A {
    public int base;
    A(int b) { this.base = b; print("A-ctor"); }
    public int val() { return base; }
    public int twice() { return this.val() + this.val(); }
}
class B extends A {
    private int extra;
    B(int x) { super(x + 1); this.extra = x; print("B-ctor"); }
    public int val() { return base + extra; }
}
class Main {
    public static void main() {
        A a = new A(8);
        print(a.twice());
        B b = new B(7);
        print(b.twice());
    }
}
)");
    trace_equal_case(R"(
class P {
    public int tag() { return 1; }
}
class Q extends P {
    public int tag() { return 2; }
}
class Main {
    public static void main() {
        P p = new Q();
        print(p.tag());
        P q = new P();
        print(q.tag());
    }
}
)");
}

TEST_CASE("trace equality: native classes keep their original form") {
    trace_equal_case(kBuiltins + R"(
class Scaler {
    public long unit;
    Scaler(long u) { this.unit = u; }
    public native long scale(long k);
}
class Main {
    public static void main() {
        Scaler s = new Scaler(6L);
        print(s.scale(7L));
        s.unit = 10L;
        print(s.scale(5L));
    }
}
)");
    // A transformable subclass of an untransformed class still works: its
    // generated implementation extends the original superclass directly.
    trace_equal_case(kBuiltins + R"(
class Scaler {
    public long unit;
    Scaler(long u) { this.unit = u; }
    public native long scale(long k);
    public long peek() { return unit; }
}
class S extends Scaler {
    S(long u) { super(u + 1L); }
    public long doubled() { return unit + peek(); }
}
class Main {
    public static void main() {
        S s = new S(4L);
        print(s.peek());
        print(s.unit);
        print(s.doubled());
        print(s.scale(3L));
    }
}
)");
}

TEST_CASE("trace equality: control flow, recursion, evaluation order") {
    trace_equal_case(R"(
class Main {
    public static int collatz(int n) {
        int steps = 0;
        while (n != 1) {
            if (n % 2 == 0) { n = n / 2; } else { n = 3 * n + 1; }
            steps = steps + 1;
        }
        return steps;
    }
    public static void main() {
        print(collatz(27));
        int i = 0;
        int acc = 0;
        while (i < 5) { acc = acc + i * i; i = i + 1; }
        print(acc);
        string s;
        print(s + "!");
        long l;
        print(l);
        bool f;
        if (f) { print("yes"); } else { print("no"); }
    }
}
)");
    trace_equal_case(R"(
class Main {
    public static int fib(int n) {
        if (n < 2) { return n; }
        return fib(n - 1) + fib(n - 2);
    }
    public static void main() { print(fib(15)); }
}
)");
    // Instantiations inside conditions and compound expressions keep their
    // evaluation order after the factory rewrite lifts them.
    trace_equal_case(R"(
class Box {
    private int v;
    Box(int v) { this.v = v; print("mk"); print(v); }
    public int get() { return v; }
}
class Gen {
    private int n;
    public Box next() { n = n + 1; return new Box(n); }
}
class Main {
    public static void main() {
        Gen g = new Gen();
        int total = 0;
        while (g.next().get() < 4) { total = total + 10; }
        print(total);
        int i = 0;
        while (new Box(i).get() < 3) { i = i + 1; total = total + 1; }
        print(total);
        if (new Box(3).get() == 3) { print("made"); }
        print(new Box(2).get() + new Box(5).get());
    }
}
)");
    trace_equal_case(R"(
class T {
    private int v;
    T(int v) { this.v = v; print("mk" + "T"); }
    public int get() { return v; }
}
class Main {
    public static int noisy(int v) { print("noisy"); return v; }
    public static void main() {
        print(noisy(5) + new T(2).get());
        int x = noisy(1) - new T(10).get();
        print(x);
    }
}
)");
}

TEST_CASE("trace equality: one shared instance stays one instance") {
    trace_equal_case(R"(
class C {
    private int hits;
    C() { print("C-created"); }
    public int bump() { hits = hits + 1; return hits; }
}
class Holder {
    private static C shared;
    static { shared = new C(); }
    public static C get() { return shared; }
}
class Main {
    public static void main() {
        C a = Holder.get();
        C b = Holder.get();
        print(a.bump());
        print(b.bump());
        print(Holder.get().bump());
    }
}
)");
}

TEST_CASE("trace equality: string operations survive the rewrite") {
    trace_equal_case(R"(
class Main {
    public static void main() {
        string a = "he" + "llo";
        print(a == "hello");
        print(a != "world");
        print(a + " " + "there");
        bool t = true;
        print(t == true);
        print(!t);
    }
}
)");
}

TEST_CASE("a componentised value may not flow into an untransformed slot") {
    CheckedProgram cp = check_src(kBuiltins + R"(
class R {
    public native long scale(long v);
}
class S extends R {
}
class Main {
    public static void main() {
        R r = new S();
        print(r.scale(1L));
    }
}
)");
    CHECK_THROWS_AS(transform_program(cp), CheckError);
}

TEST_CASE("unknown protocol names are refused") {
    CheckedProgram cp = check_src("class A { public int f() { return 1; } }", false);
    TransformOptions opts;
    opts.protocols = {"SOAP"};
    CHECK_THROWS_AS(transform_program(cp, opts), CheckError);

    SUBCASE("an empty protocol list produces a proxy-free build") {
        TransformOptions none;
        none.protocols = {};
        TransformResult tr = transform_program(cp, none);
        CHECK(find_decl(tr.program, "A_O_Local") != nullptr);
        CHECK(find_decl(tr.program, "A_O_Proxy_RAF") == nullptr);
    }
}
