// In-process distribution: trace equality across placements, shared-instance
// semantics, re-entrant callbacks, mid-run reload, and failure paths.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/builtins.hpp"
#include "moo/checker.hpp"
#include "moo/diag.hpp"
#include "moo/interp.hpp"
#include "moo/manifest.hpp"
#include "moo/node.hpp"
#include "moo/parser.hpp"
#include "moo/xform.hpp"

#include <string>
#include <vector>

using namespace moo;

namespace {

CheckedProgram check_source(const std::string& src) {
    return check_program(parse_program(src), CheckOptions{CheckMode::Source, true});
}

CheckedProgram transform_to_checked(const CheckedProgram& cp) {
    TransformResult r = transform_program(cp);
    return check_program(std::move(r.program), CheckOptions{CheckMode::Generated, true});
}

Trace run_local(const CheckedProgram& cp) {
    return run_program(cp, local_hooks(default_builtins())).trace;
}

// Run `src` locally and under every manifest; all traces must agree.
void trace_case(const std::string& src, const std::vector<std::string>& manifests) {
    CheckedProgram cp = check_source(src);
    Trace base = run_local(cp);
    CheckedProgram xcp = transform_to_checked(cp);
    CHECK(run_local(xcp) == base);
    for (const std::string& mtext : manifests) {
        CAPTURE(mtext);
        Manifest mf = parse_manifest(mtext);
        Deployment d(xcp, mf, default_builtins());
        CHECK(d.run() == base);
    }
}

const char* kNodes3 = "node n0\nnode n1\nnode n2\nentry n0\n";

} // namespace

TEST_CASE("instance chains and statics agree with the local run everywhere") {
    trace_case(R"(
class Z {
    private long v;
    Z(long v0) { this.v = v0; }
    public long q(long i) { return i + this.v; }
}
class X {
    private Y y;
    X(Y y0) { this.y = y0; }
    public long m(long j) { return this.y.n(j); }
    public static final Z z = new Z(Y.K);
    public static long p(long i) { return X.z.q(i); }
}
class Y {
    public long n(long j) { return j * 3L - 1L; }
    public static final long K = 7L;
}
class Main {
    public static void main() {
        X x = new X(new Y());
        print(x.m(7L));
        print(X.p(5L));
        print(Y.K);
    }
}
)",
               {
                   "node n0\nentry n0\n",
                   std::string(kNodes3) + "place X remote n1\n",
                   std::string(kNodes3) + "place Y remote n2\nstatics X n1\n",
                   std::string(kNodes3) + "place X remote n1\nplace Y remote n2\n"
                                          "place Z remote n2\nstatics X n2\nstatics Y n1\n",
               });
}

TEST_CASE("a shared instance placed remotely stays a single instance") {
    const std::string src = R"(
class C {
    private int state;
    C() { this.state = 0; }
    public int bump() { this.state = this.state + 1; return this.state; }
}
class CHome {
    public static final C shared = new C();
}
class A {
    private int tag;
    A(int t) { this.tag = t; }
    public int use() { return CHome.shared.bump() * 100 + this.tag; }
}
class Main {
    public static void main() {
        A a1 = new A(1);
        A a2 = new A(2);
        print(a1.use());
        print(a2.use());
        print(a1.use());
    }
}
)";
    trace_case(src, {
                        std::string(kNodes3) + "statics CHome n1\nplace C remote n1\n",
                        std::string(kNodes3) + "statics CHome n2\n",
                    });

    // The shared instance must exist exactly once, on its home node, and a
    // node-level census query must see it from the entry node.
    CheckedProgram cp = check_source(src);
    CheckedProgram xcp = transform_to_checked(cp);
    Manifest mf = parse_manifest(std::string(kNodes3) + "statics CHome n1\nplace C remote n1\n");
    Deployment d(xcp, mf, default_builtins());
    int64_t remote_count = -1;
    d.post_run = [&](Node& entry) { remote_count = entry.count_instances_on("n1", "C"); };
    Trace t = d.run();
    CHECK(t == Trace{"101", "202", "301"});
    CHECK(d.node("n1").registry().count_instances_of("C_O_Local") == 1);
    CHECK(d.node("n0").registry().count_instances_of("C_O_Local") == 0);
    CHECK(d.node("n2").registry().count_instances_of("C_O_Local") == 0);
    CHECK(remote_count == 1);
}

TEST_CASE("two clients drive one remotely homed counter") {
    trace_case(R"(
class Counter {
    private int n;
    Counter() { this.n = 0; }
    public int inc() { this.n = this.n + 1; return this.n; }
    public int value() { return this.n; }
}
class Shared {
    public static final Counter c = new Counter();
    public static final int probe = Shared.mkProbe();
    public static int mkProbe() { print("clinit"); return 1; }
}
class ClientA {
    public int work() {
        int i = 0;
        int last = 0;
        while (i < 50) { last = Shared.c.inc(); i = i + 1; }
        return last;
    }
}
class ClientB {
    public int work() {
        int i = 0;
        int last = 0;
        while (i < 50) { last = Shared.c.inc(); i = i + 1; }
        return last;
    }
}
class Main {
    public static void main() {
        ClientA a = new ClientA();
        ClientB b = new ClientB();
        int ra = a.work();
        int rb = b.work();
        print(ra);
        print(rb);
        print(Shared.c.value());
        print(Shared.probe);
    }
}
)",
               {
                   std::string(kNodes3) + "statics Shared n1\n",
                   std::string(kNodes3) + "statics Shared n1\nplace Counter remote n2\n"
                                          "place ClientA remote n1\nplace ClientB remote n2\n",
               });
}

TEST_CASE("re-entrant callbacks across nodes do not deadlock") {
    trace_case(R"(
class Cb {
    private int x;
    Cb(int x0) { this.x = x0; }
    public int poke(int d) { print("poked"); return this.x + d; }
}
class Runner {
    public int drive(Cb cb) { print("driving"); return cb.poke(5) * 2; }
}
class Main {
    public static void main() {
        Cb cb = new Cb(10);
        Runner r = new Runner();
        print(r.drive(cb));
    }
}
)",
               {
                   std::string(kNodes3) + "place Runner remote n1\n",
                   std::string(kNodes3) + "place Runner remote n1\nplace Cb remote n2\n",
               });
}

TEST_CASE("polymorphic dispatch is owner-side") {
    trace_case(R"(
class P {
    public int val() { return 1; }
    public int twice() { return this.val() * 2; }
}
class Q extends P {
    private int k;
    Q(int k0) { this.k = k0; }
    public int val() { return this.k; }
}
class Main {
    public static void main() {
        P p = new Q(21);
        print(p.twice());
        P q = new P();
        print(q.twice());
    }
}
)",
               {
                   std::string(kNodes3) + "place Q remote n1\n",
                   std::string(kNodes3) + "place P remote n1\nplace Q remote n2\n",
               });
}

TEST_CASE("builtins run on every node without placement") {
    trace_case(std::string(kBuiltinDecls) + R"(
class W {
    public int sz(string s) { return Str.length(s) + Math.abs(0 - 3); }
    public long big() { return Cfg.K * 2L; }
}
class Main {
    public static void main() {
        W w = new W();
        print(w.sz("hello"));
        print(w.big());
        Acc acc = new Acc(5);
        acc.add(37);
        print(acc.total());
    }
}
)",
               {
                   std::string(kNodes3) + "place W remote n1\n",
                   std::string(kNodes3) + "place W remote n2\nstatics W n1\n",
               });
}

TEST_CASE("a manifest reload mid-run moves subsequent creations") {
    CheckedProgram cp = check_source(R"(
class Box {
    private int v;
    Box(int v0) { this.v = v0; }
    public int get() { return this.v; }
}
class Maker {
    public int mk(int i) { Box b = new Box(i); print(b.get()); return b.get(); }
}
class Main {
    public static void main() {
        Maker mk = new Maker();
        int i = 0;
        while (i < 6) { int unused = mk.mk(i); i = i + 1; }
    }
}
)");
    Trace base = run_local(cp);
    CheckedProgram xcp = transform_to_checked(cp);
    Manifest m1 = parse_manifest(kNodes3);
    Manifest m2 = parse_manifest(std::string(kNodes3) + "place Box remote n1\n");
    Deployment d(xcp, m1, default_builtins());
    d.node("n0").on_print = [&](size_t n) {
        if (n == 3) d.reload(m2);
    };
    CHECK(d.run() == base);
    CHECK(d.node("n1").registry().count_instances_of("Box_O_Local") == 3);
    CHECK(d.node("n0").registry().count_instances_of("Box_O_Local") == 0);
}

TEST_CASE("errors raised on a remote node carry the exact local message") {
    CheckedProgram cp = check_source(R"(
class Bad {
    public int div(int a, int b) { return a / b; }
}
class Main {
    public static void main() {
        Bad bd = new Bad();
        print(bd.div(10, 2));
        print(bd.div(1, 0));
    }
}
)");
    std::string local_err;
    try {
        run_local(cp);
    } catch (const RuntimeError& e) {
        local_err = e.what();
    }
    REQUIRE_FALSE(local_err.empty());

    CheckedProgram xcp = transform_to_checked(cp);
    Deployment d(xcp, parse_manifest(std::string(kNodes3) + "place Bad remote n1\n"),
                 default_builtins());
    std::string dist_err;
    bool transport = false;
    try {
        d.run();
    } catch (const TransportError&) {
        transport = true;
    } catch (const RuntimeError& e) {
        dist_err = e.what();
    }
    CHECK_FALSE(transport);
    CHECK(dist_err == local_err);
}

TEST_CASE("instances of untransformed classes may not cross nodes") {
    CheckedProgram cp = check_source(R"(
class Scaler {
    public long unit;
    Scaler(long u) { this.unit = u; }
    public native long scale(long k);
}
class User {
    public long go(Scaler s) { return s.scale(3L); }
}
class Main {
    public static void main() {
        User u = new User();
        Scaler sc = new Scaler(4L);
        print(u.go(sc));
    }
}
)");
    Trace base = run_local(cp);
    CHECK(base == Trace{"12"});
    CheckedProgram xcp = transform_to_checked(cp);
    CHECK(run_local(xcp) == base); // locally everything still works

    Deployment d(xcp, parse_manifest(std::string(kNodes3) + "place User remote n1\n"),
                 default_builtins());
    std::string err;
    try {
        d.run();
    } catch (const RuntimeError& e) {
        err = e.what();
    }
    CHECK(err.find("cannot cross nodes") != std::string::npos);
}

TEST_CASE("placement validation rejects misdirected manifests") {
    CheckedProgram cp = check_source(std::string(kBuiltinDecls) + R"(
class Plain {
    public int f() { return Math.abs(0 - 1); }
}
class Main {
    public static void main() {
        Plain p = new Plain();
        print(p.f());
    }
}
)");
    CheckedProgram xcp = transform_to_checked(cp);
    auto rejects = [&](const std::string& mtext, const char* needle) {
        try {
            Deployment d(xcp, parse_manifest(mtext), default_builtins());
            FAIL_CHECK("manifest accepted: " << mtext);
        } catch (const ConfigError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                          "wanted '" << needle << "', got '" << e.what() << "'");
        }
    };
    rejects(std::string(kNodes3) + "place Math remote n1\n", "builtin");
    rejects(std::string(kNodes3) + "statics Math n1\n", "builtin");
    rejects(std::string(kNodes3) + "place Ghost remote n1\n", "unknown class");
    rejects(std::string(kNodes3) + "statics Ghost n1\n", "unknown class");
}
