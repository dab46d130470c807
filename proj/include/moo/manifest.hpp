#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace moo {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

/// Parsed deployment manifest. Line-oriented text format, one directive per
/// line, '#' starts a comment:
///
///   node <id> [host:port]        declare a node (address required for TCP)
///   entry <id>                   designate the entry node (default: first)
///   place <class> local          create instances of <class> locally
///   place <class> remote <id>    create instances of <class> on node <id>
///   statics <class> <id>         home <class>'s static state on node <id>
///
/// Unlisted classes default to local creation; unlisted statics default to
/// the entry node.
struct Manifest {
    struct NodeDecl {
        std::string id;
        std::string host;  // empty when no address given (in-process only)
        int port = 0;
    };
    std::vector<NodeDecl> nodes;
    std::string entry;
    std::map<std::string, std::string> place;         // class -> node id; "" = local
    std::map<std::string, std::string> statics_home;  // class -> node id

    const NodeDecl* find_node(const std::string& id) const;
};

Manifest parse_manifest(const std::string& text);
Manifest load_manifest(const std::string& path);

/// An all-local single-node manifest (used when no manifest is given).
Manifest single_node_manifest();

/// Thread-safe placement view consulted on every creation/discovery, so a
/// manifest reload changes where subsequent creations go. `self` is the node
/// consulting the policy.
class Policy {
  public:
    Policy(std::string self, Manifest m);

    /// Swap in a new manifest (node set must stay compatible: same entry,
    /// declared nodes only). Bumps the version.
    void update(const Manifest& m);

    /// Node that should own a fresh instance of cls; empty string = here.
    std::string create_node(const std::string& cls) const;

    /// Node that owns cls's static state; empty string = here.
    std::string statics_node(const std::string& cls) const;

    std::string self() const { return self_; }
    std::string entry() const;
    int version() const;

  private:
    mutable std::mutex mu_;
    std::string self_;
    Manifest m_;
    int version_ = 1;
};

} // namespace moo
