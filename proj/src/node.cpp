#include "moo/node.hpp"

#include "moo/diag.hpp"

#include <utility>

namespace moo {

namespace {

// Error strings with this prefix mark distribution failures; they re-raise
// as TransportError at the caller instead of as program errors.
constexpr const char* kTransportTag = "transport: ";
constexpr size_t kTransportTagLen = 11;

// Member-name prefix for running a superclass constructor body on the
// object's owning node.
constexpr const char* kCtorInitPrefix = "$ctor_init:";
constexpr size_t kCtorInitPrefixLen = 11;

// Link-control payload asking the receiving node to stop serving.
const std::string kByeFrame("\x00\x00\x00\x03" "BYE", 7);

// Placeholder class for node-level services addressed at oid 0.
constexpr const char* kNodeServiceCls = "$node";

bool has_prefix(const std::string& s, const char* p, size_t n) {
    return s.compare(0, n, p) == 0;
}

// Strip a component-family suffix: the original class name for local parts,
// empty for anything else (untransformed instances must not cross nodes).
std::string original_of_local(const std::string& cls) {
    for (const char* suffix : {"_O_Local", "_C_Local"}) {
        size_t n = std::char_traits<char>::length(suffix);
        if (cls.size() > n && cls.compare(cls.size() - n, n, suffix) == 0)
            return cls.substr(0, cls.size() - n);
    }
    return {};
}

template <class... Fs> struct overloaded : Fs... { using Fs::operator()...; };
template <class... Fs> overloaded(Fs...) -> overloaded<Fs...>;

// Census by the class name the program wrote: instances of a componentised
// class live in registries under the generated local-part name, so a query
// for "C" must also count "C_O_Local". Exact generated names keep working.
size_t census(const Registry& reg, const std::string& cls) {
    size_t n = reg.count_instances_of(cls);
    if (original_of_local(cls).empty()) n += reg.count_instances_of(cls + "_O_Local");
    return n;
}

} // namespace

// ---------------------------------------------------------------------------
// Manifest ↔ program validation

void validate_placements(const CheckedProgram& prog, const Manifest& mf) {
    auto check = [&](const std::string& cls, const std::string& directive,
                     const char* part_suffix) {
        const ClassDecl* c = prog.find_class(cls);
        if (c && c->is_builtin)
            throw ConfigError("manifest " + directive + " names builtin class '" + cls +
                              "'; builtins run on every node");
        if (!prog.find_class(cls + part_suffix)) {
            if (c)
                throw ConfigError("manifest " + directive + " names class '" + cls +
                                  "', which was not componentised");
            throw ConfigError("manifest " + directive + " names unknown class '" + cls + "'");
        }
    };
    for (const auto& [cls, node] : mf.place) check(cls, "place directive", "_O_Local");
    for (const auto& [cls, node] : mf.statics_home) check(cls, "statics directive", "_C_Local");
}

// ---------------------------------------------------------------------------
// Node

Node::Node(std::string id, const CheckedProgram& prog, BuiltinTable builtins,
           std::shared_ptr<Policy> policy, RunLimits limits)
    : id_(std::move(id)), prog_(prog), policy_(std::move(policy)) {
    is_entry_ = policy_->entry() == id_;
    RuntimeHooks h;
    h.builtins = std::move(builtins);
    h.policy_create = [this](Machine&, const std::string& c) { return hook_create(c); };
    h.policy_discover = [this](Machine&, const std::string& c) { return hook_discover(c); };
    h.remote_invoke = [this](Machine&, Obj& o, const std::string& m, std::vector<Value> a) {
        return hook_remote_invoke(o, m, std::move(a));
    };
    h.seal_remote = [this](Machine&, const RemoteRefV& r) { hook_seal_remote(r); };
    h.emit_line = [this](Machine&, const std::string& l) { hook_emit(l); };
    mach_ = std::make_unique<Machine>(prog_, std::move(h), limits);
}

Node::~Node() {
    for (auto& [pid, p] : peers_) p->sink->close();
    for (auto& [pid, p] : peers_)
        if (p->reader.joinable()) p->reader.join();
}

void Node::connect(const std::string& peer_id, std::unique_ptr<FrameSink> sink) {
    auto p = std::make_unique<Peer>();
    p->sink = std::move(sink);
    Peer* raw = p.get();
    peers_[peer_id] = std::move(p);
    raw->reader = std::thread([this, peer_id, raw] { reader_loop(peer_id, raw); });
}

void Node::reader_loop(const std::string& peer_id, Peer* peer) {
    try {
        for (;;) {
            std::string frame = peer->sink->recv();
            if (frame.size() >= 4 && frame.compare(4, std::string::npos, "BYE") == 0) {
                push_inbox({Envelope::Tag::Shutdown, peer_id, {}, {}});
                return;
            }
            Message m = decode_message(frame);
            push_inbox({Envelope::Tag::Msg, peer_id, std::move(m), {}});
        }
    } catch (const std::exception& e) {
        peer->up = false;
        push_inbox({Envelope::Tag::PeerDown, peer_id, {}, e.what()});
    }
}

void Node::push_inbox(Envelope env) {
    {
        std::lock_guard<std::mutex> lk(inbox_mu_);
        inbox_.push_back(std::move(env));
    }
    inbox_cv_.notify_one();
}

Node::Envelope Node::pop_inbox() {
    std::unique_lock<std::mutex> lk(inbox_mu_);
    inbox_cv_.wait(lk, [&] { return !inbox_.empty(); });
    Envelope env = std::move(inbox_.front());
    inbox_.pop_front();
    return env;
}

void Node::send_frame(const std::string& node, const std::string& frame) {
    auto it = peers_.find(node);
    if (it == peers_.end())
        throw TransportError("no link to node '" + node + "'");
    it->second->sink->send(frame);
}

// ---------------------------------------------------------------------------
// Synchronous re-entrant RPC

Message Node::call(const std::string& node, Message req) {
    if (down_.count(node))
        throw TransportError("node '" + node + "' is unreachable");
    req.id = next_call_id_++;
    send_frame(node, encode_message(req));
    wait_stack_.push_back(req.id);
    struct PopGuard {
        std::vector<uint64_t>& s;
        ~PopGuard() { s.pop_back(); }
    } guard{wait_stack_};

    for (;;) {
        Envelope env = pop_inbox();
        switch (env.tag) {
        case Envelope::Tag::Shutdown:
            throw TransportError("shut down while awaiting a reply from node '" + node + "'");
        case Envelope::Tag::PeerDown:
            down_.insert(env.from);
            if (env.from == node)
                throw TransportError("lost connection to node '" + node + "': " + env.detail);
            break;  // unrelated peer; keep waiting
        case Envelope::Tag::Msg: {
            Message& m = env.msg;
            if (m.kind == MsgKind::Reply || m.kind == MsgKind::Err) {
                // Calls nest strictly (each side blocks until its request
                // completes), so a reply always answers the newest open call.
                if (m.id != wait_stack_.back())
                    throw TransportError("reply for call " + std::to_string(m.id) +
                                         " while awaiting call " +
                                         std::to_string(wait_stack_.back()));
                if (m.kind == MsgKind::Err) {
                    const std::string& err = *m.error;
                    if (has_prefix(err, kTransportTag, kTransportTagLen))
                        throw TransportError(err.substr(kTransportTagLen));
                    throw RuntimeError({0, 0}, err);
                }
                return std::move(m);
            }
            dispatch(env.from, m);  // serve while we wait
            break;
        }
        }
    }
}

void Node::dispatch(const std::string& from, const Message& req) {
    Message resp;
    try {
        std::optional<TaggedValue> result;
        switch (req.kind) {
        case MsgKind::Make: {
            ObjPtr h = mach_->instantiate_raw(req.cls + "_O_Local");
            uint64_t oid = reg_.export_object(h);
            result = TaggedValue{RemoteRef{id_, oid, req.cls}};
            break;
        }
        case MsgKind::Discover: {
            Value v = mach_->discover_local(req.cls);
            uint64_t oid = reg_.bind_singleton(req.cls, std::get<ObjPtr>(v));
            result = TaggedValue{RemoteRef{id_, oid, req.cls}};
            break;
        }
        case MsgKind::Invoke:
            result = dispatch_invoke(req);
            break;
        default:
            throw RuntimeError({0, 0},
                               std::string("unexpected ") + msg_kind_name(req.kind) + " message",
                               RunErrorKind::Transport);
        }
        resp = reply_message(req.id, std::move(result));
    } catch (const TransportError& e) {
        resp = error_message(req.id, kTransportTag + std::string(e.what()));
    } catch (const WireError& e) {
        resp = error_message(req.id, kTransportTag + std::string(e.what()));
    } catch (const RuntimeError& e) {
        std::string msg = e.what();
        if (e.kind == RunErrorKind::Transport) msg = kTransportTag + msg;
        resp = error_message(req.id, msg);
    } catch (const std::exception& e) {
        resp = error_message(req.id, e.what());
    }
    try {
        send_frame(from, encode_message(resp));
    } catch (const TransportError&) {
        // The requester vanished while we worked; its reader reports that.
    }
}

std::optional<TaggedValue> Node::dispatch_invoke(const Message& req) {
    const RemoteRef& t = *req.target;
    if (t.oid == 0) {
        // Node-level services.
        if (req.member == "$print") {
            if (req.args.size() != 1 || !std::holds_alternative<std::string>(req.args[0].v))
                throw RuntimeError({0, 0}, "malformed $print request", RunErrorKind::Transport);
            hook_emit(std::get<std::string>(req.args[0].v));
            return std::nullopt;
        }
        if (req.member == "$count") {
            if (req.args.size() != 1 || !std::holds_alternative<std::string>(req.args[0].v))
                throw RuntimeError({0, 0}, "malformed $count request", RunErrorKind::Transport);
            return TaggedValue{
                static_cast<int64_t>(census(reg_, std::get<std::string>(req.args[0].v)))};
        }
        throw RuntimeError({0, 0}, "unknown node service '" + req.member + "'",
                           RunErrorKind::Transport);
    }

    ObjPtr obj = reg_.find(t.oid);
    if (!obj)
        throw RuntimeError({0, 0},
                           "no exported object with id " + std::to_string(t.oid) + " on node '" +
                               id_ + "'",
                           RunErrorKind::Transport);
    if (req.member == "$seal") {
        mach_->seal_object(*obj);
        return std::nullopt;
    }
    std::vector<Value> args;
    args.reserve(req.args.size());
    for (const TaggedValue& tv : req.args) args.push_back(untag_value(tv));
    if (has_prefix(req.member, kCtorInitPrefix, kCtorInitPrefixLen)) {
        mach_->run_ctor_on(obj, req.member.substr(kCtorInitPrefixLen), std::move(args));
        return std::nullopt;
    }
    Value r = mach_->call_method(obj, req.member, std::move(args));
    if (is_null(r)) return std::nullopt;  // void results and nulls travel the same way
    return tag_value(r);
}

// ---------------------------------------------------------------------------
// Value crossing

TaggedValue Node::tag_value(const Value& v) {
    return std::visit(
        overloaded{
            [](std::monostate) { return TaggedValue{}; },
            [](int32_t x) { return TaggedValue{x}; },
            [](int64_t x) { return TaggedValue{x}; },
            [](bool x) { return TaggedValue{x}; },
            [](const std::string& x) { return TaggedValue{x}; },
            [](const RemoteRefV& r) { return TaggedValue{RemoteRef{r.node, r.oid, r.cls}}; },
            [&](const ObjPtr& o) -> TaggedValue {
                if (!o) return TaggedValue{};
                if (const RemoteRefV* r = proxy_ref(*o))
                    return TaggedValue{RemoteRef{r->node, r->oid, r->cls}};
                std::string orig = original_of_local(o->cls);
                if (orig.empty())
                    throw RuntimeError({0, 0}, "an instance of untransformed class '" + o->cls +
                                                   "' cannot cross nodes");
                return TaggedValue{RemoteRef{id_, reg_.export_object(o), orig}};
            },
        },
        v);
}

Value Node::untag_value(const TaggedValue& t) {
    return std::visit(
        overloaded{
            [](std::monostate) { return Value{}; },
            [](int32_t x) { return Value{x}; },
            [](int64_t x) { return Value{x}; },
            [](bool x) { return Value{x}; },
            [](const std::string& x) { return Value{x}; },
            [&](const RemoteRef& r) -> Value {
                if (r.node == id_) {
                    ObjPtr h = reg_.find(r.oid);
                    if (!h)
                        throw RuntimeError({0, 0},
                                           "no exported object with id " + std::to_string(r.oid) +
                                               " on node '" + id_ + "'",
                                           RunErrorKind::Transport);
                    return Value{h};
                }
                return bind_proxy(r, /*object_side=*/true);
            },
        },
        t.v);
}

Value Node::bind_proxy(const RemoteRef& ref, bool object_side) {
    auto key = std::make_tuple(ref.node, ref.oid, object_side);
    if (auto it = proxies_.find(key); it != proxies_.end()) return it->second;
    std::string pcls = ref.cls + (object_side ? "_O_Proxy_RAF" : "_C_Proxy_RAF");
    if (!prog_.find_class(pcls))
        throw RuntimeError({0, 0}, "this program has no proxy class '" + pcls + "'",
                           RunErrorKind::Transport);
    ObjPtr p = mach_->alloc_object(pcls);
    p->fields["$ref"] = RemoteRefV{ref.node, ref.oid, ref.cls};
    Value v{p};
    proxies_.emplace(std::move(key), v);
    return v;
}

// ---------------------------------------------------------------------------
// Intrinsic hooks

Value Node::hook_create(const std::string& cls) {
    std::string where = policy_->create_node(cls);
    if (where.empty())
        return Value{mach_->instantiate_raw(cls + "_O_Local")};
    Message rep = call(where, make_request(0, cls));
    if (!rep.result || !std::holds_alternative<RemoteRef>(rep.result->v))
        throw RuntimeError({0, 0}, "make reply carried no object reference",
                           RunErrorKind::Transport);
    return untag_value(*rep.result);
}

Value Node::hook_discover(const std::string& cls) {
    const ClassDecl* c = prog_.find_class(cls);
    if (c && c->is_builtin)  // builtin statics are node-local everywhere
        return mach_->discover_local(cls);
    std::string home = policy_->statics_node(cls);
    if (home.empty())
        return mach_->discover_local(cls);
    if (auto it = static_proxies_.find(cls); it != static_proxies_.end())
        return it->second;
    Message rep = call(home, discover_request(0, cls));
    if (!rep.result || !std::holds_alternative<RemoteRef>(rep.result->v))
        throw RuntimeError({0, 0}, "discover reply carried no object reference",
                           RunErrorKind::Transport);
    const RemoteRef& r = std::get<RemoteRef>(rep.result->v);
    Value v;
    if (r.node == id_) {
        ObjPtr h = reg_.find(r.oid);
        if (!h)
            throw RuntimeError({0, 0}, "stale singleton reference for class '" + cls + "'",
                               RunErrorKind::Transport);
        v = Value{h};
    } else {
        v = bind_proxy(r, /*object_side=*/false);
    }
    static_proxies_.emplace(cls, v);
    return v;
}

Value Node::hook_remote_invoke(Obj& proxy, const std::string& member, std::vector<Value> args) {
    const RemoteRefV* r = proxy_ref(proxy);
    if (!r)
        throw RuntimeError({0, 0}, "remote invocation target carries no remote reference",
                           RunErrorKind::Transport);
    std::vector<TaggedValue> targs;
    targs.reserve(args.size());
    for (const Value& a : args) targs.push_back(tag_value(a));
    Message rep = call(r->node, invoke_request(0, RemoteRef{r->node, r->oid, r->cls}, member,
                                               std::move(targs)));
    return rep.result ? untag_value(*rep.result) : Value{};
}

void Node::hook_seal_remote(const RemoteRefV& ref) {
    call(ref.node, invoke_request(0, RemoteRef{ref.node, ref.oid, ref.cls}, "$seal", {}));
}

void Node::hook_emit(const std::string& line) {
    if (is_entry_) {
        trace_.push_back(line);
        if (on_print) on_print(trace_.size());
        return;
    }
    // Route to the entry node and wait for the ack so the global print
    // order matches the execution order.
    call(policy_->entry(),
         invoke_request(0, RemoteRef{policy_->entry(), 0, kNodeServiceCls}, "$print",
                        {TaggedValue{line}}));
}

// ---------------------------------------------------------------------------
// Top-level loops

void Node::serve() {
    for (;;) {
        Envelope env = pop_inbox();
        switch (env.tag) {
        case Envelope::Tag::Shutdown:
            return;
        case Envelope::Tag::PeerDown:
            down_.insert(env.from);
            if (down_.size() >= peers_.size())
                throw TransportError("all peers disconnected");
            break;
        case Envelope::Tag::Msg:
            dispatch(env.from, env.msg);
            break;
        }
    }
}

Trace Node::run_entry_program() {
    mach_->run_entry();
    return trace_;
}

void Node::broadcast_shutdown() {
    for (auto& [pid, p] : peers_) {
        if (!p->up) continue;
        try {
            p->sink->send(kByeFrame);
        } catch (const TransportError&) {
            // already gone
        }
    }
}

int64_t Node::count_instances_on(const std::string& node, const std::string& cls) {
    if (node == id_) return static_cast<int64_t>(census(reg_, cls));
    Message rep = call(node, invoke_request(0, RemoteRef{node, 0, kNodeServiceCls}, "$count",
                                            {TaggedValue{cls}}));
    if (!rep.result || !std::holds_alternative<int64_t>(rep.result->v))
        throw RuntimeError({0, 0}, "count reply carried no number", RunErrorKind::Transport);
    return std::get<int64_t>(rep.result->v);
}

// ---------------------------------------------------------------------------
// Deployment

Deployment::Deployment(const CheckedProgram& prog, Manifest manifest, BuiltinTable builtins,
                       RunLimits limits)
    : manifest_(std::move(manifest)), prog_(&prog) {
    validate_placements(prog, manifest_);
    for (const auto& nd : manifest_.nodes)
        nodes_[nd.id] = std::make_unique<Node>(
            nd.id, prog, builtins, std::make_shared<Policy>(nd.id, manifest_), limits);
    for (size_t i = 0; i < manifest_.nodes.size(); ++i)
        for (size_t j = i + 1; j < manifest_.nodes.size(); ++j) {
            auto [a, b] = make_inproc_pair();
            nodes_[manifest_.nodes[i].id]->connect(manifest_.nodes[j].id, std::move(a));
            nodes_[manifest_.nodes[j].id]->connect(manifest_.nodes[i].id, std::move(b));
        }
    for (const auto& nd : manifest_.nodes)
        if (nd.id != manifest_.entry)
            workers_.emplace_back([n = nodes_[nd.id].get()] {
                try {
                    n->serve();
                } catch (const std::exception&) {
                    // A dropped deployment tears the mesh down; the entry
                    // node reports the failure.
                }
            });
}

Deployment::~Deployment() { shutdown_workers(); }

Trace Deployment::run() {
    Node& entry = *nodes_.at(manifest_.entry);
    try {
        Trace t = entry.run_entry_program();
        if (post_run) post_run(entry);
        shutdown_workers();
        return t;
    } catch (...) {
        shutdown_workers();
        throw;
    }
}

void Deployment::reload(const Manifest& updated) {
    validate_placements(*prog_, updated);
    for (auto& [id, n] : nodes_) n->policy().update(updated);
    manifest_ = updated;
}

Node& Deployment::node(const std::string& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw ConfigError("no node '" + id + "' in this deployment");
    return *it->second;
}

void Deployment::shutdown_workers() {
    if (finished_) return;
    finished_ = true;
    nodes_.at(manifest_.entry)->broadcast_shutdown();
    for (auto& t : workers_)
        if (t.joinable()) t.join();
}

}  // namespace moo
