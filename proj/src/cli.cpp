#include "moo/cli.hpp"

#include "moo/builtins.hpp"
#include "moo/checker.hpp"
#include "moo/diag.hpp"
#include "moo/interp.hpp"
#include "moo/manifest.hpp"
#include "moo/node.hpp"
#include "moo/parser.hpp"
#include "moo/printer.hpp"
#include "moo/transport.hpp"
#include "moo/wire.hpp"
#include "moo/xform.hpp"

#include "CLI11.hpp"

#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace moo {

namespace {

// ---------------------------------------------------------------------------
// Small helpers

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!out.flush()) throw ConfigError("cannot write '" + path + "'");
}

CheckedProgram load_program(const std::string& path, CheckMode mode, bool require_entry) {
    Program p = parse_program(read_file(path));
    return check_program(std::move(p), CheckOptions{mode, require_entry});
}

std::string frame_of(const std::string& payload) {
    uint32_t n = static_cast<uint32_t>(payload.size());
    std::string f(4, '\0');
    f[0] = static_cast<char>((n >> 24) & 0xff);
    f[1] = static_cast<char>((n >> 16) & 0xff);
    f[2] = static_cast<char>((n >> 8) & 0xff);
    f[3] = static_cast<char>(n & 0xff);
    return f + payload;
}

struct CountQuery {
    std::string cls;
    std::string node;
};

CountQuery parse_count_query(const std::string& s) {
    size_t at = s.rfind('@');
    if (at == std::string::npos || at == 0 || at + 1 >= s.size())
        throw ConfigError("--count wants CLASS@NODE, got '" + s + "'");
    return {s.substr(0, at), s.substr(at + 1)};
}

// Manifest-reload triggers shared by the in-process and multi-process paths.
std::atomic<bool> g_hup{false};

void on_sighup(int) { g_hup = true; }

struct ReloadPlan {
    std::string manifest_path;  // operational manifest (re-read on SIGHUP)
    std::string with_path;      // substitute manifest for --reload-on-print
    int on_print = 0;           // trigger after this many trace lines (0 = off)

    bool due(size_t lines_emitted) const {
        return (on_print > 0 && lines_emitted == static_cast<size_t>(on_print)) || g_hup;
    }
    Manifest load() const {
        g_hup = false;
        const std::string& p = with_path.empty() ? manifest_path : with_path;
        return load_manifest(p);
    }
};

// ---------------------------------------------------------------------------
// transform / explain

int cmd_transform(const std::string& input, const std::string& out,
                  const std::vector<std::string>& protocols, const std::string& report) {
    CheckedProgram cp = load_program(input, CheckMode::Source, /*require_entry=*/false);
    TransformOptions opts;
    opts.protocols = protocols;
    TransformResult r = transform_program(cp, opts);
    std::string text = print_program(r.program);
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_file(out, text);
    if (!report.empty()) {
        if (report == "-")
            std::cout << r.analysis.report_json();
        else
            write_file(report, r.analysis.report_json());
    }
    return kExitOk;
}

int cmd_explain(const std::string& input, bool as_json) {
    CheckedProgram cp = load_program(input, CheckMode::Source, /*require_entry=*/false);
    TransformAnalysis an = analyse_transformability(cp);
    if (as_json) {
        std::cout << an.report_json();
        return kExitOk;
    }
    std::cout << "transformable (" << an.transformable.size() << "):";
    for (const auto& c : an.transformable) std::cout << " " << c;
    std::cout << "\n";
    std::cout << "excluded (" << an.non_transformable.size() << "):\n";
    for (const auto& c : an.non_transformable) {
        const Exclusion& ex = an.reasons.at(c);
        std::cout << "  " << c << "  " << rule_name(ex.rule);
        if (!ex.via.empty()) std::cout << " via " << ex.via;
        std::cout << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// run (single address space)

int cmd_run(const std::string& input, bool transformed, uint64_t step_budget) {
    CheckedProgram cp = load_program(
        input, transformed ? CheckMode::Generated : CheckMode::Source, /*require_entry=*/true);
    RuntimeHooks hooks = local_hooks(default_builtins());
    hooks.emit_line = [](Machine&, const std::string& l) { std::cout << l << "\n" << std::flush; };
    RunLimits limits;
    if (step_budget) limits.step_budget = step_budget;
    Machine m(cp, std::move(hooks), limits);
    m.run_entry();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Distributed runs

struct DistOptions {
    std::string manifest_path;
    bool in_process = false;
    uint64_t step_budget = 0;
    ReloadPlan reload;
    std::vector<std::string> counts;  // CLASS@NODE queries, answered post-run
};

RunLimits limits_of(const DistOptions& o) {
    RunLimits l;
    if (o.step_budget) l.step_budget = o.step_budget;
    return l;
}

void answer_counts(Node& entry, const std::vector<std::string>& queries) {
    for (const auto& q : queries) {
        CountQuery cq = parse_count_query(q);
        std::cout << "count " << q << " = " << entry.count_instances_on(cq.node, cq.cls) << "\n"
                  << std::flush;
    }
}

int run_dist_in_process(const CheckedProgram& xcp, Manifest mf, const DistOptions& o) {
    Deployment d(xcp, std::move(mf), default_builtins(), limits_of(o));
    Node& entry = d.node(d.manifest().entry);
    entry.on_print = [&](size_t n) {
        std::cout << entry.trace().back() << "\n" << std::flush;
        if (o.reload.due(n)) d.reload(o.reload.load());
    };
    d.post_run = [&](Node& e) { answer_counts(e, o.counts); };
    d.run();
    return kExitOk;
}

// Establish framed links to every other manifest node: accept from nodes
// declared before us, dial nodes declared after us, identify with a HELLO
// frame. Deadlock-free in any start order because dialing only needs the
// remote listener to exist, not its accept loop.
std::map<std::string, std::unique_ptr<FrameSink>> join_mesh(const Manifest& mf,
                                                            const std::string& self,
                                                            int timeout_ms) {
    size_t idx = mf.nodes.size();
    for (size_t i = 0; i < mf.nodes.size(); ++i)
        if (mf.nodes[i].id == self) idx = i;
    if (idx == mf.nodes.size()) throw ConfigError("node '" + self + "' is not in the manifest");
    for (const auto& nd : mf.nodes)
        if (nd.host.empty())
            throw ConfigError("node '" + nd.id +
                              "' has no address; every node needs host:port for a "
                              "multi-process run");

    std::map<std::string, std::unique_ptr<FrameSink>> links;
    std::mutex mu;
    TcpListener listener(mf.nodes[idx].host, mf.nodes[idx].port);

    std::exception_ptr accept_err;
    std::thread acceptor;
    if (idx > 0) {
        acceptor = std::thread([&] {
            try {
                for (size_t k = 0; k < idx; ++k) {
                    auto sink = listener.accept_for(timeout_ms);
                    std::string frame = sink->recv();
                    std::string payload = frame.size() >= 4 ? frame.substr(4) : "";
                    if (payload.rfind("HELLO ", 0) != 0)
                        throw TransportError("bad handshake from a connecting node");
                    std::string peer = payload.substr(6);
                    std::lock_guard<std::mutex> lk(mu);
                    links[peer] = std::move(sink);
                }
            } catch (...) {
                accept_err = std::current_exception();
            }
        });
    }

    std::exception_ptr dial_err;
    try {
        for (size_t j = idx + 1; j < mf.nodes.size(); ++j) {
            auto sink = tcp_connect(mf.nodes[j].host, mf.nodes[j].port, timeout_ms);
            sink->send(frame_of("HELLO " + self));
            std::lock_guard<std::mutex> lk(mu);
            links[mf.nodes[j].id] = std::move(sink);
        }
    } catch (...) {
        dial_err = std::current_exception();
    }
    if (acceptor.joinable()) acceptor.join();
    if (dial_err) std::rethrow_exception(dial_err);
    if (accept_err) std::rethrow_exception(accept_err);
    return links;
}

constexpr int kMeshTimeoutMs = 10000;

// The entry node's half of a multi-process run.
int run_dist_entry(const CheckedProgram& xcp, const Manifest& mf, const DistOptions& o) {
    auto links = join_mesh(mf, mf.entry, kMeshTimeoutMs);
    auto policy = std::make_shared<Policy>(mf.entry, mf);
    Node node(mf.entry, xcp, default_builtins(), policy, limits_of(o));
    for (auto& [id, sink] : links) node.connect(id, std::move(sink));
    node.on_print = [&](size_t n) {
        std::cout << node.trace().back() << "\n" << std::flush;
        if (o.reload.due(n)) {
            Manifest updated = o.reload.load();
            validate_placements(xcp, updated);
            policy->update(updated);
        }
    };
    try {
        node.run_entry_program();
        answer_counts(node, o.counts);
        node.broadcast_shutdown();
    } catch (...) {
        node.broadcast_shutdown();
        throw;
    }
    return kExitOk;
}

// Worker-node process body (the hidden `node` subcommand).
int cmd_node(const std::string& id, const std::string& manifest_path,
             const std::string& program_path, uint64_t step_budget) {
    CheckedProgram xcp = load_program(program_path, CheckMode::Generated, /*require_entry=*/true);
    Manifest mf = load_manifest(manifest_path);
    validate_placements(xcp, mf);
    auto links = join_mesh(mf, id, kMeshTimeoutMs);
    RunLimits limits;
    if (step_budget) limits.step_budget = step_budget;
    Node node(id, xcp, default_builtins(), std::make_shared<Policy>(id, mf), limits);
    for (auto& [peer, sink] : links) node.connect(peer, std::move(sink));
    node.serve();
    return kExitOk;
}

std::string self_exe() {
    char buf[4096];
    ssize_t n = ::readlink("/proc/self/exe", buf, sizeof buf - 1);
    if (n <= 0) throw ConfigError("cannot resolve this executable's path");
    buf[n] = '\0';
    return buf;
}

struct ChildProc {
    pid_t pid;
    std::string node_id;
};

pid_t spawn_worker(const std::string& exe, const std::vector<std::string>& args) {
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(exe.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = ::fork();
    if (pid < 0) throw ConfigError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::prctl(PR_SET_PDEATHSIG, SIGKILL);  // die with the coordinator
        if (::getppid() == 1) ::_exit(kExitTransport);
        ::execv(exe.c_str(), argv.data());
        ::perror("mooc: exec failed");
        ::_exit(127);
    }
    return pid;
}

// Wait for the children; escalate to SIGKILL after the grace period.
void reap_workers(std::vector<ChildProc>& children, int grace_ms) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(grace_ms);
    for (auto& c : children) {
        for (;;) {
            int status = 0;
            pid_t r = ::waitpid(c.pid, &status, WNOHANG);
            if (r == c.pid || r < 0) break;
            if (std::chrono::steady_clock::now() >= deadline) {
                ::kill(c.pid, SIGKILL);
                ::waitpid(c.pid, &status, 0);
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }
    children.clear();
}

int run_dist_processes(const std::string& xtext, const CheckedProgram& xcp, const Manifest& mf,
                       const DistOptions& o) {
    // The workers re-read the transformed program from a file.
    std::string tmp = "/tmp/mooc-program-XXXXXX";
    int fd = ::mkstemp(tmp.data());
    if (fd < 0) throw ConfigError("cannot create a temporary program file");
    ::close(fd);
    write_file(tmp, xtext);

    std::string exe = self_exe();
    std::vector<ChildProc> children;
    int rc = kExitOk;
    try {
        for (const auto& nd : mf.nodes) {
            if (nd.id == mf.entry) continue;
            std::vector<std::string> args = {"node",      "--id",      nd.id,
                                             "--manifest", o.manifest_path, "--program", tmp};
            if (o.step_budget) {
                args.push_back("--step-budget");
                args.push_back(std::to_string(o.step_budget));
            }
            children.push_back({spawn_worker(exe, args), nd.id});
        }
        rc = run_dist_entry(xcp, mf, o);
        reap_workers(children, /*grace_ms=*/5000);
    } catch (...) {
        for (auto& c : children) ::kill(c.pid, SIGKILL);
        reap_workers(children, 0);
        ::unlink(tmp.c_str());
        throw;
    }
    ::unlink(tmp.c_str());
    return rc;
}

int cmd_run_dist(const std::string& input, bool transformed_input, const DistOptions& o) {
    std::string xtext;
    CheckedProgram xcp = [&] {
        if (transformed_input) {
            xtext = read_file(input);
            return check_program(parse_program(xtext),
                                 CheckOptions{CheckMode::Generated, /*require_entry=*/true});
        }
        CheckedProgram cp = load_program(input, CheckMode::Source, /*require_entry=*/true);
        TransformResult r = transform_program(cp);
        xtext = print_program(r.program);
        return check_program(std::move(r.program),
                             CheckOptions{CheckMode::Generated, /*require_entry=*/true});
    }();
    Manifest mf = load_manifest(o.manifest_path);
    validate_placements(xcp, mf);
    std::signal(SIGHUP, on_sighup);
    if (o.in_process || mf.nodes.size() == 1) return run_dist_in_process(xcp, std::move(mf), o);
    return run_dist_processes(xtext, xcp, mf, o);
}

// ---------------------------------------------------------------------------
// check-equiv

struct Outcome {
    Trace trace;
    bool failed = false;
    std::string error;
};

Outcome run_original(const CheckedProgram& cp, uint64_t step_budget) {
    Outcome out;
    RuntimeHooks hooks = local_hooks(default_builtins());
    hooks.emit_line = [&](Machine&, const std::string& l) { out.trace.push_back(l); };
    RunLimits limits;
    if (step_budget) limits.step_budget = step_budget;
    try {
        Machine m(cp, std::move(hooks), limits);
        m.run_entry();
    } catch (const RuntimeError& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

Outcome run_distributed(const CheckedProgram& xcp, Manifest mf, uint64_t step_budget) {
    Outcome out;
    RunLimits limits;
    if (step_budget) limits.step_budget = step_budget;
    Deployment d(xcp, std::move(mf), default_builtins(), limits);
    Node& entry = d.node(d.manifest().entry);
    entry.on_print = [&](size_t) { out.trace.push_back(entry.trace().back()); };
    try {
        d.run();
    } catch (const RuntimeError& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

int cmd_check_equiv(const std::string& input, const std::string& manifest_path,
                    const std::string& transformed_path, uint64_t step_budget) {
    CheckedProgram cp = load_program(input, CheckMode::Source, /*require_entry=*/true);
    Outcome local = run_original(cp, step_budget);

    CheckedProgram xcp = [&] {
        if (!transformed_path.empty())
            return load_program(transformed_path, CheckMode::Generated, /*require_entry=*/true);
        TransformResult r = transform_program(cp);
        return check_program(std::move(r.program),
                             CheckOptions{CheckMode::Generated, /*require_entry=*/true});
    }();
    Manifest mf = manifest_path.empty() ? single_node_manifest() : load_manifest(manifest_path);
    validate_placements(xcp, mf);
    Outcome dist = run_distributed(xcp, std::move(mf), step_budget);

    size_t n = std::min(local.trace.size(), dist.trace.size());
    for (size_t i = 0; i < n; ++i) {
        if (local.trace[i] != dist.trace[i]) {
            std::cout << "mismatch: trace line " << (i + 1) << ": local '" << local.trace[i]
                      << "' vs distributed '" << dist.trace[i] << "'\n";
            return kExitMismatch;
        }
    }
    if (local.trace.size() != dist.trace.size()) {
        std::cout << "mismatch: local printed " << local.trace.size()
                  << " lines, distributed printed " << dist.trace.size() << "\n";
        return kExitMismatch;
    }
    if (local.failed != dist.failed || local.error != dist.error) {
        auto describe = [](const Outcome& o) {
            return o.failed ? "error '" + o.error + "'" : std::string("ok");
        };
        std::cout << "mismatch: local outcome " << describe(local) << " vs distributed "
                  << describe(dist) << "\n";
        return kExitMismatch;
    }
    std::cout << "equivalent: " << local.trace.size() << " trace lines, outcome "
              << (local.failed ? "error '" + local.error + "'" : std::string("ok")) << "\n";
    return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Argument wiring

int cli_main(int argc, char** argv) {
    CLI::App app{"MiniOO componentising compiler and distribution runtime"};
    app.require_subcommand(1);

    // transform
    std::string t_input, t_out, t_report;
    std::vector<std::string> t_protocols = {"RAF"};
    auto* t = app.add_subcommand("transform", "Componentise a program");
    t->add_option("input", t_input, "source program")->required();
    t->add_option("--out,-o", t_out, "output file ('-' or empty: stdout)");
    t->add_option("--protocols", t_protocols, "wire protocols to generate proxies for")
        ->delimiter(',');
    t->add_option("--report", t_report, "write the transformability report (JSON) here");

    // explain
    std::string e_input;
    bool e_json = false;
    auto* e = app.add_subcommand("explain", "Report which classes can be componentised and why");
    e->add_option("input", e_input, "source program")->required();
    e->add_flag("--json", e_json, "emit the JSON report");

    // run
    std::string r_input;
    bool r_transformed = false;
    uint64_t r_budget = 0;
    auto* r = app.add_subcommand("run", "Run a program in one address space");
    r->add_option("input", r_input, "program")->required();
    r->add_flag("--transformed", r_transformed, "input is already componentised");
    r->add_option("--step-budget", r_budget, "abort after this many evaluation steps");

    // run-dist
    std::string d_input;
    bool d_transformed = false;
    DistOptions dopt;
    auto* d = app.add_subcommand("run-dist", "Transform and run across the manifest's nodes");
    d->add_option("input", d_input, "program")->required();
    d->add_option("--manifest,-m", dopt.manifest_path, "deployment manifest")->required();
    d->add_flag("--transformed", d_transformed, "input is already componentised");
    d->add_flag("--in-process", dopt.in_process, "run every node inside this process");
    d->add_option("--step-budget", dopt.step_budget, "per-node evaluation step budget");
    d->add_option("--reload-on-print", dopt.reload.on_print,
                  "re-read the manifest after the Nth printed line");
    d->add_option("--reload-with", dopt.reload.with_path,
                  "manifest file the reload trigger switches to (default: --manifest)");
    d->add_option("--count", dopt.counts,
                  "after the run, report instances as CLASS@NODE (repeatable)");

    // check-equiv
    std::string q_input, q_manifest, q_transformed;
    uint64_t q_budget = 0;
    auto* q = app.add_subcommand(
        "check-equiv", "Verify a distributed run behaves exactly like the original program");
    q->add_option("input", q_input, "source program")->required();
    q->add_option("--manifest,-m", q_manifest, "deployment manifest (default: single node)");
    q->add_option("--transformed", q_transformed,
                  "use this componentised file instead of transforming afresh");
    q->add_option("--step-budget", q_budget, "evaluation step budget");

    // node (internal)
    std::string n_id, n_manifest, n_program;
    uint64_t n_budget = 0;
    auto* n = app.add_subcommand("node", "Serve as one worker node of a distributed run");
    n->group("");  // hidden: spawned by run-dist
    n->add_option("--id", n_id)->required();
    n->add_option("--manifest", n_manifest)->required();
    n->add_option("--program", n_program)->required();
    n->add_option("--step-budget", n_budget);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        return app.exit(ex);
    }

    try {
        if (*t) return cmd_transform(t_input, t_out, t_protocols, t_report);
        if (*e) return cmd_explain(e_input, e_json);
        if (*r) return cmd_run(r_input, r_transformed, r_budget);
        if (*d) {
            dopt.reload.manifest_path = dopt.manifest_path;
            return cmd_run_dist(d_input, d_transformed, dopt);
        }
        if (*q) return cmd_check_equiv(q_input, q_manifest, q_transformed, q_budget);
        if (*n) return cmd_node(n_id, n_manifest, n_program, n_budget);
        return kExitFrontEnd;
    } catch (const ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitFrontEnd;
    } catch (const CheckError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitFrontEnd;
    } catch (const ConfigError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitFrontEnd;
    } catch (const TransportError& ex) {
        std::cerr << "transport failure: " << ex.what() << "\n";
        return kExitTransport;
    } catch (const RuntimeError& ex) {
        if (ex.kind == RunErrorKind::Transport) {
            std::cerr << "transport failure: " << ex.what() << "\n";
            return kExitTransport;
        }
        std::cerr << "runtime error: " << ex.what() << "\n";
        return kExitRuntime;
    } catch (const WireError& ex) {
        std::cerr << "transport failure: " << ex.what() << "\n";
        return kExitTransport;
    }
}

}  // namespace moo
