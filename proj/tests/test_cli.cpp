// End-to-end command-line integration: every subcommand, both transports,
// every documented exit code. Each case drives the real binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/builtins.hpp"
#include "moo/cli.hpp"

#include "json.hpp"

#include <arpa/inet.h>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Res {
    int rc = -1;
    std::string out;
    std::string err;
};

class Sandbox {
  public:
    Sandbox() {
        std::string tmpl = (fs::temp_directory_path() / "moo-cli-XXXXXX").string();
        REQUIRE(mkdtemp(tmpl.data()) != nullptr);
        dir_ = tmpl;
    }
    ~Sandbox() { std::error_code ec; fs::remove_all(dir_, ec); }

    fs::path write(const std::string& name, const std::string& text) {
        fs::path p = dir_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    std::string slurp(const fs::path& p) const {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    Res mooc(const std::string& args) {
        fs::path so = dir_ / "stdout.tmp", se = dir_ / "stderr.tmp";
        std::string cmd = std::string(MOOC_PATH) + " " + args + " >" + so.string() + " 2>" +
                          se.string();
        int st = std::system(cmd.c_str());
        Res r;
        r.rc = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
        r.out = slurp(so);
        r.err = slurp(se);
        return r;
    }

    const fs::path& dir() const { return dir_; }

  private:
    fs::path dir_;
};

// Reserve n distinct loopback ports: bind them all to port 0 first, then
// release them together so consecutive calls cannot hand back the same port.
std::vector<int> free_ports(size_t n) {
    std::vector<int> fds, ports;
    for (size_t i = 0; i < n; ++i) {
        int fd = socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd >= 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        REQUIRE(bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        socklen_t len = sizeof addr;
        REQUIRE(getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
        fds.push_back(fd);
        ports.push_back(ntohs(addr.sin_port));
    }
    for (int fd : fds) close(fd);
    return ports;
}

std::string tcp_manifest(const std::vector<int>& ports, const std::string& placements) {
    std::ostringstream m;
    for (size_t i = 0; i < ports.size(); ++i)
        m << "node n" << i << " 127.0.0.1:" << ports[i] << "\n";
    m << "entry n0\n" << placements;
    return m.str();
}

const char* kCounterProgram = R"(
class Counter {
    private int n;
    public int inc() { this.n = this.n + 1; return this.n; }
    public int value() { return this.n; }
}
class Shared {
    public static final Counter c = new Counter();
}
class Worker {
    public int step(int i) { return Shared.c.inc() * 10 + i; }
}
class Main {
    public static void main() {
        Worker w = new Worker();
        print(w.step(1));
        print(w.step(2));
        print(Shared.c.value());
    }
}
)";

} // namespace

TEST_CASE("transform / run / run --transformed produce identical traces") {
    Sandbox sb;
    fs::path prog = sb.write("prog.moo", kCounterProgram);

    Res local = sb.mooc("run " + prog.string());
    REQUIRE(local.rc == moo::kExitOk);
    CHECK(local.out == "11\n22\n2\n");

    fs::path xf = sb.dir() / "prog.x.moo";
    Res tr = sb.mooc("transform " + prog.string() + " -o " + xf.string());
    REQUIRE(tr.rc == moo::kExitOk);

    Res gen = sb.mooc("run --transformed " + xf.string());
    CHECK(gen.rc == moo::kExitOk);
    CHECK(gen.out == local.out);
    CHECK(gen.err == local.err);

    SUBCASE("transforming twice writes byte-identical output") {
        fs::path xf2 = sb.dir() / "prog.x2.moo";
        REQUIRE(sb.mooc("transform " + prog.string() + " -o " + xf2.string()).rc == 0);
        CHECK(sb.slurp(xf) == sb.slurp(xf2));
    }

    SUBCASE("the transformed text is itself a valid source artifact") {
        std::string text = sb.slurp(xf);
        CHECK(text.find("Counter_O_Int") != std::string::npos);
        CHECK(text.find("Counter_O_Proxy_RAF") != std::string::npos);
        CHECK(text.find("Shared_C_Factory") != std::string::npos);
    }
}

TEST_CASE("explain and transform --report expose the analysis") {
    Sandbox sb;
    fs::path prog = sb.write("prog.moo", std::string(moo::kBuiltinDecls) + R"(
class Plain { public int f() { return 1; } }
class Rough { public native long r(long x); }
class Main { public static void main() { print(new Plain().f()); } }
)");

    Res ex = sb.mooc("explain " + prog.string());
    CHECK(ex.rc == moo::kExitOk);
    CHECK(ex.out.find("transformable") != std::string::npos);
    CHECK(ex.out.find("Rough") != std::string::npos);
    CHECK(ex.out.find("native-method") != std::string::npos);

    Res ej = sb.mooc("explain --json " + prog.string());
    CHECK(ej.rc == moo::kExitOk);
    auto j = nlohmann::json::parse(ej.out);
    CHECK(j.at("reasons").at("Rough").at("rule") == "native-method");

    Res tr = sb.mooc("transform " + prog.string() + " -o " + (sb.dir() / "x.moo").string() +
                     " --report " + (sb.dir() / "report.json").string());
    CHECK(tr.rc == moo::kExitOk);
    auto jr = nlohmann::json::parse(sb.slurp(sb.dir() / "report.json"));
    std::vector<std::string> ts = jr.at("transformable");
    CHECK(std::find(ts.begin(), ts.end(), "Plain") != ts.end());
}

TEST_CASE("run-dist agrees with the local run, in-process and over TCP") {
    Sandbox sb;
    fs::path prog = sb.write("prog.moo", kCounterProgram);
    Res local = sb.mooc("run " + prog.string());
    REQUIRE(local.rc == moo::kExitOk);

    const std::string placements = "statics Shared n1\nplace Counter remote n2\n";

    SUBCASE("in-process nodes") {
        fs::path mf =
            sb.write("inproc.mf", "node n0\nnode n1\nnode n2\nentry n0\n" + placements);
        Res d = sb.mooc("run-dist " + prog.string() + " -m " + mf.string() +
                        " --in-process --count Counter@n2 --count Counter@n0");
        CHECK(d.rc == moo::kExitOk);
        CHECK(d.out == local.out + "count Counter@n2 = 1\ncount Counter@n0 = 0\n");
    }

    SUBCASE("separate OS processes over TCP") {
        fs::path mf = sb.write("tcp.mf", tcp_manifest(free_ports(3), placements));
        Res d = sb.mooc("run-dist " + prog.string() + " -m " + mf.string() +
                        " --count Counter@n2 --count Counter@n0");
        CHECK(d.rc == moo::kExitOk);
        CHECK(d.out == local.out + "count Counter@n2 = 1\ncount Counter@n0 = 0\n");
        CHECK(d.err.empty());
    }

    SUBCASE("a pre-transformed file is accepted without regeneration") {
        fs::path xf = sb.dir() / "prog.x.moo";
        REQUIRE(sb.mooc("transform " + prog.string() + " -o " + xf.string()).rc == 0);
        fs::path mf =
            sb.write("inproc.mf", "node n0\nnode n1\nnode n2\nentry n0\n" + placements);
        Res d = sb.mooc("run-dist --transformed " + xf.string() + " -m " + mf.string() +
                        " --in-process");
        CHECK(d.rc == moo::kExitOk);
        CHECK(d.out == local.out);
    }
}

TEST_CASE("check-equiv verifies and exit code 4 flags a mismatch") {
    Sandbox sb;
    fs::path prog = sb.write("prog.moo", kCounterProgram);
    fs::path mf = sb.write("mf", "node n0\nnode n1\nentry n0\nstatics Shared n1\n");

    Res ok = sb.mooc("check-equiv " + prog.string() + " -m " + mf.string());
    CHECK(ok.rc == moo::kExitOk);
    CHECK(ok.out.find("equivalent") != std::string::npos);

    // Corrupt the generated text (a constant inside Worker.step) and insist
    // the comparison pinpoints the first divergent trace line.
    fs::path xf = sb.dir() / "prog.x.moo";
    REQUIRE(sb.mooc("transform " + prog.string() + " -o " + xf.string()).rc == 0);
    std::string text = sb.slurp(xf);
    auto at = text.find("* 10");
    REQUIRE(at != std::string::npos);
    text.replace(at, 4, "* 11");
    fs::path bad = sb.write("prog.bad.moo", text);

    Res mm = sb.mooc("check-equiv " + prog.string() + " -m " + mf.string() + " --transformed " +
                     bad.string());
    CHECK(mm.rc == moo::kExitMismatch);
    CHECK((mm.out + mm.err).find("mismatch") != std::string::npos);
    CHECK((mm.out + mm.err).find("line 1") != std::string::npos);
}

TEST_CASE("front-end and runtime failures map to documented exit codes") {
    Sandbox sb;

    SUBCASE("parse error: exit 1") {
        fs::path p = sb.write("bad.moo", "class { nope");
        Res r = sb.mooc("run " + p.string());
        CHECK(r.rc == moo::kExitFrontEnd);
        CHECK(r.err.find("error:") != std::string::npos);
        CHECK(r.out.empty());
    }

    SUBCASE("runtime error: exit 2, trace prefix preserved") {
        fs::path p = sb.write("div.moo", R"(
class Main {
    public static void main() {
        print("before");
        int z;
        print(4 / z);
    }
}
)");
        Res r = sb.mooc("run " + p.string());
        CHECK(r.rc == moo::kExitRuntime);
        CHECK(r.out == "before\n");
        CHECK(r.err == "runtime error: division by zero\n");
    }

    SUBCASE("runtime error on a remote node: identical text, still exit 2") {
        fs::path p = sb.write("div.moo", R"(
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
        Res local = sb.mooc("run " + p.string());
        REQUIRE(local.rc == moo::kExitRuntime);

        fs::path mf = sb.write("tcp.mf", tcp_manifest(free_ports(2), "place Bad remote n1\n"));
        Res d = sb.mooc("run-dist " + p.string() + " -m " + mf.string());
        CHECK(d.rc == moo::kExitRuntime);
        CHECK(d.out == local.out);
        CHECK(d.err == local.err);
    }

    SUBCASE("worker death mid-call: exit 3 with a transport failure") {
        fs::path p = sb.write("kill.moo", std::string(moo::kBuiltinDecls) + R"(
class Victim {
    public int work() { Dbg.die(); return 1; }
}
class Main {
    public static void main() {
        print("pre");
        Victim v = new Victim();
        print(v.work());
    }
}
)");
        fs::path mf =
            sb.write("tcp.mf", tcp_manifest(free_ports(2), "place Victim remote n1\n"));
        Res d = sb.mooc("run-dist " + p.string() + " -m " + mf.string());
        CHECK(d.rc == moo::kExitTransport);
        CHECK(d.out == "pre\n");
        CHECK(d.err.find("transport failure:") != std::string::npos);
        CHECK(d.err.find("n1") != std::string::npos);
    }

    SUBCASE("misplaced manifest: exit 1 before any execution") {
        fs::path p = sb.write("prog.moo", kCounterProgram);
        fs::path mf = sb.write("mf", "node n0\nnode n1\nentry n0\nplace Ghost remote n1\n");
        Res r = sb.mooc("run-dist " + p.string() + " -m " + mf.string() + " --in-process");
        CHECK(r.rc == moo::kExitFrontEnd);
        CHECK(r.err.find("unknown class") != std::string::npos);
        CHECK(r.out.empty());
    }

    SUBCASE("bad usage is rejected by the argument parser") {
        Res r = sb.mooc("");
        CHECK(r.rc != 0);
        Res r2 = sb.mooc("run");
        CHECK(r2.rc != 0);
    }
}

TEST_CASE("a reload trigger moves creations to the updated placement") {
    Sandbox sb;
    fs::path prog = sb.write("boxes.moo", R"(
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
    Res local = sb.mooc("run " + prog.string());
    REQUIRE(local.rc == moo::kExitOk);

    fs::path mf1 = sb.write("m1.mf", "node n0\nnode n1\nentry n0\n");
    fs::path mf2 = sb.write("m2.mf", "node n0\nnode n1\nentry n0\nplace Box remote n1\n");
    Res d = sb.mooc("run-dist " + prog.string() + " -m " + mf1.string() +
                    " --in-process --reload-on-print 3 --reload-with " + mf2.string() +
                    " --count Box@n1 --count Box@n0");
    CHECK(d.rc == moo::kExitOk);
    CHECK(d.out == local.out + "count Box@n1 = 3\ncount Box@n0 = 0\n");
}
