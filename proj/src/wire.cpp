#include "moo/wire.hpp"

#include "json.hpp"

#include <limits>

namespace moo {

namespace {

using Json = nlohmann::ordered_json;

Json tagged_json(const TaggedValue& t) {
    Json j;
    if (std::holds_alternative<std::monostate>(t.v)) {
        j["t"] = "null";
    } else if (auto* i = std::get_if<int32_t>(&t.v)) {
        j["t"] = "int";
        j["v"] = *i;
    } else if (auto* l = std::get_if<int64_t>(&t.v)) {
        j["t"] = "long";
        j["v"] = *l;
    } else if (auto* b = std::get_if<bool>(&t.v)) {
        j["t"] = "bool";
        j["v"] = *b;
    } else if (auto* s = std::get_if<std::string>(&t.v)) {
        j["t"] = "str";
        j["v"] = *s;
    } else {
        const auto& r = std::get<RemoteRef>(t.v);
        j["t"] = "ref";
        j["node"] = r.node;
        j["oid"] = r.oid;
        j["class"] = r.cls;
    }
    return j;
}

Json ref_json(const RemoteRef& r) {
    Json j;
    j["node"] = r.node;
    j["oid"] = r.oid;
    j["class"] = r.cls;
    return j;
}

[[noreturn]] void bad(const std::string& what) { throw WireError(what); }

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional,
                  const std::string& what) {
    for (const char* k : required)
        if (!j.contains(k)) bad(what + ": missing key '" + k + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : required) known = known || it.key() == k;
        for (const char* k : optional) known = known || it.key() == k;
        if (!known) bad(what + ": unknown key '" + it.key() + "'");
    }
}

std::string get_string(const nlohmann::json& j, const char* key, const std::string& what) {
    const auto& v = j.at(key);
    if (!v.is_string()) bad(what + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

uint64_t get_u64(const nlohmann::json& j, const char* key, const std::string& what) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        bad(what + ": '" + key + "' must be an integer");
    if (v.is_number_integer() && v.get<int64_t>() < 0)
        bad(what + ": '" + key + "' must be non-negative");
    return v.get<uint64_t>();
}

RemoteRef decode_ref_fields(const nlohmann::json& j, const std::string& what) {
    RemoteRef r;
    r.node = get_string(j, "node", what);
    r.oid = get_u64(j, "oid", what);
    r.cls = get_string(j, "class", what);
    return r;
}

TaggedValue decode_tagged(const nlohmann::json& j) {
    if (!j.is_object()) bad("tagged value must be an object");
    const std::string what = "tagged value";
    std::string t = get_string(j, "t", what);
    TaggedValue out;
    if (t == "null") {
        require_keys(j, {"t"}, {}, what);
        out.v = std::monostate{};
    } else if (t == "int") {
        require_keys(j, {"t", "v"}, {}, what);
        const auto& v = j.at("v");
        if (!v.is_number_integer() && !v.is_number_unsigned())
            bad("int tagged value must carry an integer");
        int64_t wide = v.get<int64_t>();
        if (wide < std::numeric_limits<int32_t>::min() ||
            wide > std::numeric_limits<int32_t>::max())
            bad("int tagged value out of 32-bit range");
        out.v = static_cast<int32_t>(wide);
    } else if (t == "long") {
        require_keys(j, {"t", "v"}, {}, what);
        const auto& v = j.at("v");
        if (!v.is_number_integer() && !v.is_number_unsigned())
            bad("long tagged value must carry an integer");
        out.v = v.get<int64_t>();
    } else if (t == "bool") {
        require_keys(j, {"t", "v"}, {}, what);
        const auto& v = j.at("v");
        if (!v.is_boolean()) bad("bool tagged value must carry a boolean");
        out.v = v.get<bool>();
    } else if (t == "str") {
        require_keys(j, {"t", "v"}, {}, what);
        const auto& v = j.at("v");
        if (!v.is_string()) bad("str tagged value must carry a string");
        out.v = v.get<std::string>();
    } else if (t == "ref") {
        require_keys(j, {"t", "node", "oid", "class"}, {}, what);
        out.v = decode_ref_fields(j, "ref tagged value");
    } else {
        bad("unknown tagged-value tag '" + t + "'");
    }
    return out;
}

} // namespace

const char* msg_kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::Invoke: return "invoke";
        case MsgKind::Reply: return "reply";
        case MsgKind::Err: return "err";
        case MsgKind::Make: return "make";
        case MsgKind::Discover: return "discover";
    }
    return "?";
}

std::string encode_payload(const Message& m) {
    if (m.v != kProtocolVersion) bad("cannot encode unsupported protocol version");
    Json j;
    j["v"] = m.v;
    j["id"] = m.id;
    j["kind"] = msg_kind_name(m.kind);
    switch (m.kind) {
        case MsgKind::Make:
        case MsgKind::Discover:
            if (m.cls.empty()) bad("make/discover requires a class");
            j["class"] = m.cls;
            break;
        case MsgKind::Invoke: {
            if (m.cls.empty()) bad("invoke requires a class");
            if (m.member.empty()) bad("invoke requires a member");
            if (!m.target) bad("invoke requires a target");
            j["class"] = m.cls;
            j["member"] = m.member;
            j["target"] = ref_json(*m.target);
            Json args = Json::array();
            for (const auto& a : m.args) args.push_back(tagged_json(a));
            j["args"] = std::move(args);
            break;
        }
        case MsgKind::Reply:
            if (m.result) j["result"] = tagged_json(*m.result);
            break;
        case MsgKind::Err:
            if (!m.error) bad("err requires an error string");
            j["error"] = *m.error;
            break;
    }
    std::string s = j.dump();
    if (s.size() > kMaxPayloadBytes) bad("message exceeds the 16 MiB payload limit");
    return s;
}

std::string encode_message(const Message& m) {
    std::string payload = encode_payload(m);
    uint32_t n = static_cast<uint32_t>(payload.size());
    std::string out;
    out.reserve(4 + payload.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out += payload;
    return out;
}

Message decode_payload(const std::string& payload) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        bad(std::string("malformed frame: ") + e.what());
    }
    if (!j.is_object()) bad("malformed frame: payload is not an object");

    const std::string what = "message";
    if (!j.contains("v")) bad("message: missing key 'v'");
    if (!j.at("v").is_number_integer() && !j.at("v").is_number_unsigned())
        bad("message: 'v' must be an integer");
    if (j.at("v").get<int64_t>() != kProtocolVersion)
        bad("protocol version mismatch: expected " + std::to_string(kProtocolVersion) +
            ", got " + j.at("v").dump());

    Message m;
    m.v = kProtocolVersion;
    m.id = get_u64(j, "id", what);

    std::string kind = get_string(j, "kind", what);
    if (kind == "make" || kind == "discover") {
        m.kind = kind == "make" ? MsgKind::Make : MsgKind::Discover;
        require_keys(j, {"v", "id", "kind", "class"}, {}, kind + " message");
        m.cls = get_string(j, "class", what);
        if (m.cls.empty()) bad(kind + " message: empty class");
    } else if (kind == "invoke") {
        m.kind = MsgKind::Invoke;
        require_keys(j, {"v", "id", "kind", "class", "member", "target", "args"}, {},
                     "invoke message");
        m.cls = get_string(j, "class", what);
        m.member = get_string(j, "member", what);
        if (m.member.empty()) bad("invoke message: empty member");
        const auto& t = j.at("target");
        if (!t.is_object()) bad("invoke message: target must be an object");
        require_keys(t, {"node", "oid", "class"}, {}, "target");
        m.target = decode_ref_fields(t, "target");
        const auto& a = j.at("args");
        if (!a.is_array()) bad("invoke message: args must be an array");
        for (const auto& e : a) m.args.push_back(decode_tagged(e));
    } else if (kind == "reply") {
        m.kind = MsgKind::Reply;
        require_keys(j, {"v", "id", "kind"}, {"result"}, "reply message");
        if (j.contains("result")) m.result = decode_tagged(j.at("result"));
    } else if (kind == "err") {
        m.kind = MsgKind::Err;
        require_keys(j, {"v", "id", "kind", "error"}, {}, "err message");
        m.error = get_string(j, "error", what);
    } else {
        bad("unknown message kind '" + kind + "'");
    }
    return m;
}

Message decode_message(const std::string& frame) {
    if (frame.size() < 4) bad("malformed frame: truncated length prefix");
    uint32_t n = (static_cast<uint32_t>(static_cast<unsigned char>(frame[0])) << 24) |
                 (static_cast<uint32_t>(static_cast<unsigned char>(frame[1])) << 16) |
                 (static_cast<uint32_t>(static_cast<unsigned char>(frame[2])) << 8) |
                 static_cast<uint32_t>(static_cast<unsigned char>(frame[3]));
    if (n > kMaxPayloadBytes) bad("frame exceeds the 16 MiB payload limit");
    if (frame.size() != 4 + static_cast<size_t>(n))
        bad("malformed frame: truncated payload");
    return decode_payload(frame.substr(4));
}

Message make_request(uint64_t id, std::string cls) {
    Message m;
    m.id = id;
    m.kind = MsgKind::Make;
    m.cls = std::move(cls);
    return m;
}

Message discover_request(uint64_t id, std::string cls) {
    Message m;
    m.id = id;
    m.kind = MsgKind::Discover;
    m.cls = std::move(cls);
    return m;
}

Message invoke_request(uint64_t id, RemoteRef target, std::string member,
                       std::vector<TaggedValue> args) {
    Message m;
    m.id = id;
    m.kind = MsgKind::Invoke;
    m.cls = target.cls;
    m.member = std::move(member);
    m.target = std::move(target);
    m.args = std::move(args);
    return m;
}

Message reply_message(uint64_t id, std::optional<TaggedValue> result) {
    Message m;
    m.id = id;
    m.kind = MsgKind::Reply;
    m.result = std::move(result);
    return m;
}

Message error_message(uint64_t id, std::string error) {
    Message m;
    m.id = id;
    m.kind = MsgKind::Err;
    m.error = std::move(error);
    return m;
}

} // namespace moo
