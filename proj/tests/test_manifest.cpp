// Deployment manifests, placement policy, and the per-node object registry.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/manifest.hpp"
#include "moo/registry.hpp"

using namespace moo;

namespace {

void expect_config_error(const std::string& text, const std::string& frag) {
    try {
        parse_manifest(text);
        FAIL_CHECK("manifest accepted, wanted '" << frag << "': " << text);
    } catch (const ConfigError& e) {
        CHECK_MESSAGE(std::string(e.what()).find(frag) != std::string::npos,
                      "wanted '" << frag << "', got '" << e.what() << "'");
    }
}

} // namespace

TEST_CASE("manifest parsing: directives, comments, defaults") {
    Manifest m = parse_manifest(R"(# deployment for the counter demo
node n0 127.0.0.1:9000
node n1 127.0.0.1:9001
node n2            # in-process node without an address
entry n0
place Counter remote n2
place Helper local
statics Shared n1
)");
    REQUIRE(m.nodes.size() == 3);
    CHECK(m.nodes[0].id == "n0");
    CHECK(m.nodes[0].host == "127.0.0.1");
    CHECK(m.nodes[0].port == 9000);
    CHECK(m.nodes[2].host.empty());
    CHECK(m.entry == "n0");
    CHECK(m.place.at("Counter") == "n2");
    CHECK(m.place.at("Helper") == "");
    CHECK(m.statics_home.at("Shared") == "n1");
    CHECK(m.find_node("n1") != nullptr);
    CHECK(m.find_node("zz") == nullptr);

    SUBCASE("entry defaults to the first declared node") {
        Manifest d = parse_manifest("node a\nnode b\n");
        CHECK(d.entry == "a");
    }
    SUBCASE("the bundled single-node manifest is all-local") {
        Manifest s = single_node_manifest();
        REQUIRE(s.nodes.size() == 1);
        CHECK(s.entry == s.nodes[0].id);
        CHECK(s.place.empty());
        CHECK(s.statics_home.empty());
    }
}

TEST_CASE("manifest parsing rejects malformed input") {
    expect_config_error("", "declares no nodes");
    expect_config_error("node n0\nnode n0\n", "duplicate node");
    expect_config_error("node n0 localhost\n", "host:port");
    expect_config_error("node n0 localhost:0\n", "port out of range");
    expect_config_error("node n0 localhost:xx\n", "invalid port");
    expect_config_error("node n0\nentry ghost\n", "not declared");
    expect_config_error("node n0\nentry n0\nentry n0\n", "duplicate entry");
    expect_config_error("node n0\nplace C n0\n", "'local' or 'remote <id>'");
    expect_config_error("node n0\nplace C remote\n", "usage: place");
    expect_config_error("node n0\nplace C remote n1\nplace C local\n", "duplicate place");
    expect_config_error("node n0\nplace C remote nX\n", "undeclared node");
    expect_config_error("node n0\nstatics C\n", "usage: statics");
    expect_config_error("node n0\nstatics C nX\n", "undeclared node");
    expect_config_error("node n0\nstatics C n0\nstatics C n0\n", "duplicate statics");
    expect_config_error("node n0\nteleport C n0\n", "unknown directive");
}

TEST_CASE("policy answers creation and statics placement relative to self") {
    Manifest m = parse_manifest(R"(
node n0
node n1
node n2
entry n0
place Counter remote n2
statics Shared n1
)");
    Policy at_entry("n0", m);
    CHECK(at_entry.self() == "n0");
    CHECK(at_entry.entry() == "n0");
    CHECK(at_entry.create_node("Counter") == "n2");
    CHECK(at_entry.create_node("Unlisted") == ""); // default: local
    CHECK(at_entry.statics_node("Shared") == "n1");
    CHECK(at_entry.statics_node("Unlisted") == ""); // default: entry == self

    // The same manifest seen from the owning nodes: ownership is "here".
    Policy at_n2("n2", m);
    CHECK(at_n2.create_node("Counter") == "");
    CHECK(at_n2.statics_node("Unlisted") == "n0");
    Policy at_n1("n1", m);
    CHECK(at_n1.statics_node("Shared") == "");

    SUBCASE("a policy for an undeclared node is refused") {
        CHECK_THROWS_AS(Policy("ghost", m), ConfigError);
    }

    SUBCASE("update swaps placements and bumps the version") {
        Policy p("n0", m);
        CHECK(p.version() == 1);
        Manifest m2 = parse_manifest(R"(
node n0
node n1
node n2
entry n0
place Counter remote n1
)");
        p.update(m2);
        CHECK(p.version() == 2);
        CHECK(p.create_node("Counter") == "n1");
        CHECK(p.statics_node("Shared") == ""); // back to the entry default
    }

    SUBCASE("update may not change the entry or the node set") {
        Policy p("n0", m);
        CHECK_THROWS_AS(p.update(parse_manifest("node n0\nnode n1\nnode n2\nentry n1\n")),
                        ConfigError);
        CHECK_THROWS_AS(p.update(parse_manifest("node n0\nnode n1\nentry n0\n")), ConfigError);
        CHECK_THROWS_AS(
            p.update(parse_manifest("node n0\nnode n1\nnode n2\nnode n3\nentry n0\n")),
            ConfigError);
    }
}

TEST_CASE("registry: stable ids from 1, idempotent export, exact census") {
    Registry reg;
    auto mk = [](const std::string& cls) {
        auto o = std::make_shared<Obj>();
        o->cls = cls;
        return o;
    };
    ObjPtr a = mk("C_O_Local");
    ObjPtr b = mk("C_O_Local");
    ObjPtr c = mk("D_O_Local");

    CHECK(reg.export_object(a) == 1);
    CHECK(reg.export_object(b) == 2);
    CHECK(reg.export_object(a) == 1); // idempotent per handle
    CHECK(reg.export_object(c) == 3);

    CHECK(reg.find(1) == a);
    CHECK(reg.find(2) == b);
    CHECK(reg.find(99) == nullptr);
    CHECK(reg.find(0) == nullptr); // oid 0 is the node itself, never an object

    CHECK(reg.count_instances_of("C_O_Local") == 2);
    CHECK(reg.count_instances_of("D_O_Local") == 1);
    CHECK(reg.count_instances_of("C") == 0); // census is exact on runtime names
    CHECK(reg.size() == 3);

    SUBCASE("singletons are idempotent per class and are exported objects") {
        ObjPtr s = mk("C_C_Local");
        uint64_t oid = reg.bind_singleton("C", s);
        CHECK(oid == 4);
        CHECK(reg.bind_singleton("C", s) == oid);
        CHECK(reg.singleton("C") == s);
        CHECK(reg.singleton("D") == nullptr);
        CHECK(reg.find(oid) == s);
    }
}
