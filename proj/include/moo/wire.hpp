#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace moo {

/// Handle to an object registered at a node: owning node id, registry object
/// id, and the original (pre-transform) class name.
struct RemoteRef {
    std::string node;
    uint64_t oid = 0;
    std::string cls;
    bool operator==(const RemoteRef&) const = default;
};

/// The only shapes that cross node boundaries: null, the four primitive
/// kinds by value, and references to registered objects.
struct TaggedValue {
    std::variant<std::monostate, int32_t, int64_t, bool, std::string, RemoteRef> v;
    bool operator==(const TaggedValue&) const = default;
};

enum class MsgKind { Invoke, Reply, Err, Make, Discover };

const char* msg_kind_name(MsgKind k);

/// One protocol message. Field usage by kind:
///   make/discover: cls
///   invoke:        cls, member, target, args
///   reply:         result (absent for void)
///   err:           error
/// reply/err carry the id of the request they answer.
struct Message {
    int32_t v = 1;
    uint64_t id = 0;
    MsgKind kind = MsgKind::Invoke;
    std::string cls;
    std::string member;
    std::optional<RemoteRef> target;
    std::vector<TaggedValue> args;
    std::optional<TaggedValue> result;
    std::optional<std::string> error;
    bool operator==(const Message&) const = default;
};

struct WireError : std::runtime_error {
    explicit WireError(const std::string& m) : std::runtime_error(m) {}
};

inline constexpr size_t kMaxPayloadBytes = 16u * 1024 * 1024;
inline constexpr int32_t kProtocolVersion = 1;

/// Canonical payload: compact UTF-8 JSON with keys in the fixed order
/// v, id, kind, class, member, target, args, result, error (absent optionals
/// omitted). Tagged values serialise as {"t":...,"v":...} (refs as
/// {"t":"ref","node":...,"oid":...,"class":...}).
std::string encode_payload(const Message& m);

/// Full frame: 4-byte big-endian payload length followed by the canonical
/// payload. Throws WireError above the 16 MiB payload limit.
std::string encode_message(const Message& m);

/// Inverse of encode_payload. Accepts any key order; rejects unknown keys,
/// version mismatches, and per-kind field violations.
Message decode_payload(const std::string& payload);

/// Inverse of encode_message: validates the length prefix, then decodes.
Message decode_message(const std::string& frame);

// Construction helpers.
Message make_request(uint64_t id, std::string cls);
Message discover_request(uint64_t id, std::string cls);
Message invoke_request(uint64_t id, RemoteRef target, std::string member,
                       std::vector<TaggedValue> args);
Message reply_message(uint64_t id, std::optional<TaggedValue> result);
Message error_message(uint64_t id, std::string error);

} // namespace moo
