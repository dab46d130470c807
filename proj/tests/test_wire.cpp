// Wire protocol: golden frame layout, randomised round-trip property, and
// rejection of malformed input.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/wire.hpp"

#include <random>

using namespace moo;

namespace {

// Random message generator covering every kind, field shape, and string
// hazard (quotes, escapes, control bytes, multi-byte UTF-8).
struct Gen {
    std::mt19937 rng;
    explicit Gen(uint32_t seed) : rng(seed) {}

    int pick(int n) { return int(rng() % uint32_t(n)); }

    std::string str() {
        static const std::string atoms[] = {
            "",     "X",          "a_b",  "counter", "\"quoted\"", "back\\slash",
            "tab\t", "nl\nnl",    "nul",  "héllo",   "日本語",      "emoji🎲",
            "\x01\x02", "spaces  spaces", "{\"fake\":1}", "end"};
        std::string s = atoms[pick(16)];
        if (pick(4) == 0) s += atoms[pick(16)];
        return s;
    }

    // Messages require non-empty class/member names; refs keep theirs
    // non-empty too.
    std::string name() {
        std::string s = str();
        return s.empty() ? "k" : s;
    }

    RemoteRef ref() {
        return RemoteRef{name(), uint64_t(rng()) << 16 | rng() % 65536, name()};
    }

    TaggedValue value() {
        switch (pick(6)) {
        case 0: return TaggedValue{std::monostate{}};
        case 1: return TaggedValue{int32_t(rng())};
        case 2: return TaggedValue{int64_t(uint64_t(rng()) << 32 | rng())};
        case 3: return TaggedValue{pick(2) == 0};
        case 4: return TaggedValue{str()};
        default: return TaggedValue{ref()};
        }
    }

    Message message() {
        Message m;
        m.id = uint64_t(rng());
        switch (pick(5)) {
        case 0:
            m = make_request(m.id, name());
            break;
        case 1:
            m = discover_request(m.id, name());
            break;
        case 2: {
            std::vector<TaggedValue> args;
            int n = pick(5);
            for (int i = 0; i < n; ++i) args.push_back(value());
            m = invoke_request(m.id, ref(), name(), std::move(args));
            break;
        }
        case 3:
            m = reply_message(m.id, pick(3) == 0 ? std::nullopt
                                                 : std::optional<TaggedValue>(value()));
            break;
        default:
            m = error_message(m.id, str());
            break;
        }
        return m;
    }
};

} // namespace

TEST_CASE("golden discover frame: documented byte layout, bit-exact") {
    // 4-byte big-endian payload length, then compact JSON with keys in the
    // fixed order v,id,kind,class,member,target,args,result,error and absent
    // optionals omitted. The payload below is 44 bytes, so the prefix is
    // 0x0000002C and the whole frame spans 48 bytes.
    const std::string payload = R"({"v":1,"id":7,"kind":"discover","class":"X"})";
    REQUIRE(payload.size() == 44);
    const std::string expected = std::string("\x00\x00\x00\x2C", 4) + payload;

    Message m = discover_request(7, "X");
    CHECK(encode_payload(m) == payload);
    std::string frame = encode_message(m);
    CHECK(frame.size() == 48);
    CHECK(frame == expected);
    CHECK(decode_message(frame) == m);
}

TEST_CASE("golden invoke/reply payloads keep the fixed key order") {
    Message inv = invoke_request(3, RemoteRef{"n2", 12, "X"}, "m",
                                 {TaggedValue{int64_t(5)}});
    CHECK(encode_payload(inv) ==
          R"({"v":1,"id":3,"kind":"invoke","class":"X","member":"m",)"
          R"("target":{"node":"n2","oid":12,"class":"X"},)"
          R"("args":[{"t":"long","v":5}]})");

    Message rep = reply_message(3, TaggedValue{int32_t(6)});
    CHECK(encode_payload(rep) == R"({"v":1,"id":3,"kind":"reply","result":{"t":"int","v":6}})");

    Message void_rep = reply_message(4, std::nullopt);
    CHECK(encode_payload(void_rep) == R"({"v":1,"id":4,"kind":"reply"})");

    Message err = error_message(9, "division by zero");
    CHECK(encode_payload(err) == R"({"v":1,"id":9,"kind":"err","error":"division by zero"})");
}

TEST_CASE("decode tolerates any key order in the payload") {
    Message got = decode_payload(
        R"({"class":"X","kind":"discover","id":7,"v":1})");
    CHECK(got == discover_request(7, "X"));
}

TEST_CASE("round-trip identity over 10,000 generated messages") {
    Gen gen(0xD15C0BA1u);
    int ok = 0;
    for (int i = 0; i < 10000; ++i) {
        Message m = gen.message();
        Message back = decode_message(encode_message(m));
        if (back == m) {
            ++ok;
        } else {
            CAPTURE(encode_payload(m));
            CHECK(back == m);
        }
    }
    CHECK(ok == 10000);
}

TEST_CASE("malformed frames and payloads are rejected") {
    Message m = discover_request(7, "X");
    std::string frame = encode_message(m);

    SUBCASE("truncated prefix") {
        CHECK_THROWS_AS(decode_message(std::string("\x00\x00", 2)), WireError);
    }
    SUBCASE("length prefix larger than the remaining bytes") {
        std::string bad = frame;
        bad[3] = char(0xFF);
        CHECK_THROWS_AS(decode_message(bad), WireError);
    }
    SUBCASE("trailing garbage after the payload") {
        CHECK_THROWS_AS(decode_message(frame + "x"), WireError);
    }
    SUBCASE("payload is not JSON") {
        CHECK_THROWS_AS(decode_payload("not json"), WireError);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(
            decode_payload(R"({"v":1,"id":7,"kind":"discover","class":"X","extra":1})"),
            WireError);
    }
    SUBCASE("version mismatch is rejected") {
        CHECK_THROWS_AS(decode_payload(R"({"v":2,"id":7,"kind":"discover","class":"X"})"),
                        WireError);
    }
    SUBCASE("unknown kind is rejected") {
        CHECK_THROWS_AS(decode_payload(R"({"v":1,"id":7,"kind":"summon","class":"X"})"),
                        WireError);
    }
    SUBCASE("per-kind field violations are rejected") {
        // A reply may not carry a class; a discover may not carry a result.
        CHECK_THROWS_AS(decode_payload(R"({"v":1,"id":7,"kind":"reply","class":"X"})"),
                        WireError);
        CHECK_THROWS_AS(
            decode_payload(
                R"({"v":1,"id":7,"kind":"discover","class":"X","result":{"t":"int","v":1}})"),
            WireError);
    }
    SUBCASE("oversized payloads are refused at encode time") {
        Message big = error_message(1, std::string(kMaxPayloadBytes, 'x'));
        CHECK_THROWS_AS(encode_message(big), WireError);
    }
}
