#pragma once
// Distribution runtime. A Node is one address space of a deployment: a
// Machine wired to placement-aware hooks, an object registry, and framed
// links to peer nodes. Deployment runs a whole manifest worth of nodes
// inside one process over loopback links (workers on background threads,
// the entry program on the caller's thread).
//
// Threading model: all MiniOO execution on a node happens on the thread
// that calls run_entry_program() or serve(). Each peer link owns one
// reader thread which only decodes frames and enqueues envelopes; the
// execution thread drains the queue. Requests are served re-entrantly
// while a node waits for one of its own calls to complete, which is what
// makes cross-node call cycles (A calls B, B calls back into A) work.

#include "moo/interp.hpp"
#include "moo/manifest.hpp"
#include "moo/registry.hpp"
#include "moo/transport.hpp"
#include "moo/wire.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace moo {

/// Validate a manifest against a transformed program: every class named in
/// a `place` or `statics` directive must have been componentised (builtins
/// and untransformed classes always run where they are used).
/// Throws ConfigError.
void validate_placements(const CheckedProgram& prog, const Manifest& mf);

class Node {
  public:
    Node(std::string id, const CheckedProgram& prog, BuiltinTable builtins,
         std::shared_ptr<Policy> policy, RunLimits limits = {});
    ~Node();

    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    /// Attach an established link to `peer_id` and start its reader thread.
    /// Call before run_entry_program()/serve().
    void connect(const std::string& peer_id, std::unique_ptr<FrameSink> sink);

    /// Worker loop: serve requests until told to shut down. Returns normally
    /// on shutdown; throws TransportError if every peer drops first.
    void serve();

    /// Entry node: run the program's entry point to completion and return
    /// the global trace (workers route their printing here).
    Trace run_entry_program();

    /// Entry node, after the run: tell every connected peer to shut down.
    void broadcast_shutdown();

    const std::string& id() const { return id_; }
    Registry& registry() { return reg_; }
    Machine& machine() { return *mach_; }
    Policy& policy() { return *policy_; }
    const Trace& trace() const { return trace_; }

    /// Count live instances whose exact runtime class is `cls` on `node`
    /// (remote nodes are asked over the wire).
    int64_t count_instances_on(const std::string& node, const std::string& cls);

    /// Entry node: invoked after appending each trace line, with the number
    /// of lines emitted so far. Used for manifest reloading triggers.
    std::function<void(size_t)> on_print;

  private:
    struct Envelope {
        enum class Tag { Msg, PeerDown, Shutdown } tag;
        std::string from;
        Message msg;         // Tag::Msg
        std::string detail;  // Tag::PeerDown: reason
    };
    struct Peer {
        std::unique_ptr<FrameSink> sink;
        std::thread reader;
        std::atomic<bool> up{true};
    };

    // Intrinsic hooks (installed into the Machine).
    Value hook_create(const std::string& cls);
    Value hook_discover(const std::string& cls);
    Value hook_remote_invoke(Obj& proxy, const std::string& member, std::vector<Value> args);
    void hook_seal_remote(const RemoteRefV& ref);
    void hook_emit(const std::string& line);

    // Synchronous RPC: send `req` to `node`, serve incoming requests until
    // the matching reply arrives. Throws TransportError if the peer drops,
    // RuntimeError if the remote execution failed.
    Message call(const std::string& node, Message req);
    void dispatch(const std::string& from, const Message& req);
    std::optional<TaggedValue> dispatch_invoke(const Message& req);
    void send_frame(const std::string& node, const std::string& frame);
    Envelope pop_inbox();
    void push_inbox(Envelope env);
    void reader_loop(const std::string& peer_id, Peer* peer);

    // Value crossing: prims by value, componentised instances by reference
    // (exported into the registry), proxies pass their existing reference
    // through. Instances of untransformed classes refuse to travel.
    TaggedValue tag_value(const Value& v);
    Value untag_value(const TaggedValue& t);
    Value bind_proxy(const RemoteRef& ref, bool object_side);

    std::string id_;
    const CheckedProgram& prog_;
    Registry reg_;
    std::shared_ptr<Policy> policy_;
    std::unique_ptr<Machine> mach_;
    bool is_entry_ = false;
    Trace trace_;  // global trace; only the entry node appends

    std::mutex inbox_mu_;
    std::condition_variable inbox_cv_;
    std::deque<Envelope> inbox_;

    std::map<std::string, std::unique_ptr<Peer>> peers_;
    std::set<std::string> down_;  // peers whose link has dropped
    // (node, oid, object_side) → bound proxy, so each remote object gets
    // one stable local stand-in.
    std::map<std::tuple<std::string, uint64_t, bool>, Value> proxies_;
    std::map<std::string, Value> static_proxies_;  // class → C-side proxy
    uint64_t next_call_id_ = 1;
    std::vector<uint64_t> wait_stack_;  // ids of calls awaiting replies
};

/// A whole deployment in one process: one Node per manifest node over
/// loopback links. Worker nodes serve on background threads; run() executes
/// the entry program on the calling thread and returns the global trace.
class Deployment {
  public:
    Deployment(const CheckedProgram& prog, Manifest manifest, BuiltinTable builtins,
               RunLimits limits = {});
    ~Deployment();

    Deployment(const Deployment&) = delete;
    Deployment& operator=(const Deployment&) = delete;

    Trace run();

    /// Runs on the entry node after the program completes but before the
    /// workers shut down — the window for cross-node queries such as
    /// Node::count_instances_on.
    std::function<void(Node& entry)> post_run;

    /// Swap in an updated manifest on every node (placement changes apply to
    /// objects created from then on).
    void reload(const Manifest& updated);

    Node& node(const std::string& id);
    const Manifest& manifest() const { return manifest_; }

  private:
    void shutdown_workers();

    Manifest manifest_;
    const CheckedProgram* prog_ = nullptr;
    std::map<std::string, std::unique_ptr<Node>> nodes_;
    std::vector<std::thread> workers_;
    bool finished_ = false;
};

}  // namespace moo
