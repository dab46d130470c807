// Componentisability closure versus an independent oracle.
//
// The engine computes the non-componentisable set as a worklist fixpoint
// over the checked AST. The oracle here never looks at the AST: it rebuilds
// the exclusion relation from the generator's own ground-truth edge list and
// closes it with Floyd–Warshall reachability. Agreement on randomised class
// graphs is therefore evidence about the rules, not about shared code.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/checker.hpp"
#include "moo/parser.hpp"
#include "moo/xform.hpp"

#include <random>
#include <set>
#include <sstream>

using namespace moo;

namespace {

struct GraphSpec {
    int n = 0;
    std::vector<int> parent;             // -1 = none; parent[i] < i, never builtin
    std::vector<std::set<int>> refs;     // i references j (field/param/return type)
    std::set<int> native;                // classes declaring a native method
    std::set<int> builtin;               // builtin classes (no parent, no refs)

    std::string name(int i) const { return "K" + std::to_string(i); }
};

// Render the graph as a real program so the engine sees it only through the
// front end.
std::string emit_source(const GraphSpec& g) {
    std::ostringstream out;
    for (int i = 0; i < g.n; ++i) {
        if (g.builtin.count(i)) {
            out << "builtin class " << g.name(i) << " { }\n";
            continue;
        }
        out << "class " << g.name(i);
        if (g.parent[i] >= 0) out << " extends " << g.name(g.parent[i]);
        out << " {\n";
        int k = 0;
        for (int j : g.refs[i]) {
            // Rotate through the three reference positions the rules cover:
            // field types, parameter types, return types.
            switch (k++ % 3) {
            // Field names carry the owner's index too: a subclass may share a
            // referee with its superclass, and field shadowing is rejected.
            case 0:
                out << "    private " << g.name(j) << " r" << i << "_" << j << ";\n";
                break;
            case 1: out << "    public void use" << j << "(" << g.name(j) << " p) { }\n"; break;
            default: out << "    public " << g.name(j) << " mk" << j << "() { return null; }\n";
            }
        }
        if (g.native.count(i)) out << "    public native long nat(long x);\n";
        out << "    public int tag() { return " << i << "; }\n";
        out << "}\n";
    }
    return out.str();
}

// Independent closure: edge u->v means "u non-componentisable forces v
// non-componentisable" (v = u's superclass, or v referenced by u). The
// excluded set is everything reachable from the seeds.
std::set<std::string> oracle_excluded(const GraphSpec& g) {
    std::vector<std::vector<bool>> e(g.n, std::vector<bool>(g.n, false));
    for (int i = 0; i < g.n; ++i) {
        if (g.parent[i] >= 0) e[i][g.parent[i]] = true;
        for (int j : g.refs[i]) e[i][j] = true;
    }
    for (int k = 0; k < g.n; ++k)
        for (int i = 0; i < g.n; ++i)
            if (e[i][k])
                for (int j = 0; j < g.n; ++j)
                    if (e[k][j]) e[i][j] = true;

    std::set<std::string> out;
    auto seed = [&](int s) {
        out.insert(g.name(s));
        for (int j = 0; j < g.n; ++j)
            if (e[s][j]) out.insert(g.name(j));
    };
    for (int s : g.native) seed(s);
    for (int s : g.builtin) seed(s);
    return out;
}

TransformAnalysis analyse(const GraphSpec& g) {
    CheckOptions o;
    o.require_entry = false;
    CheckedProgram cp = check_program(parse_program(emit_source(g)), o);
    return analyse_transformability(cp);
}

// Every recorded justification must name a real edge of the graph.
void check_reasons(const GraphSpec& g, const TransformAnalysis& a) {
    auto index_of = [&](const std::string& name) {
        return std::stoi(name.substr(1));
    };
    for (const auto& cls : a.non_transformable) {
        REQUIRE(a.reasons.count(cls) == 1);
        const Exclusion& ex = a.reasons.at(cls);
        int i = index_of(cls);
        switch (ex.rule) {
        case ExclusionRule::Builtin:
            CHECK(g.builtin.count(i) == 1);
            break;
        case ExclusionRule::NativeMethod:
            CHECK(g.native.count(i) == 1);
            CHECK(ex.via == "nat");
            break;
        case ExclusionRule::SuperclassRule: {
            int child = index_of(ex.via);
            CHECK(g.parent[child] == i);
            CHECK(a.reasons.count(ex.via) == 1); // the child is itself excluded
            break;
        }
        case ExclusionRule::ReferencedByRule: {
            int referrer = index_of(ex.via);
            CHECK(g.refs[referrer].count(i) == 1);
            CHECK(a.reasons.count(ex.via) == 1);
            break;
        }
        }
    }
}

void agree(const GraphSpec& g) {
    TransformAnalysis a = analyse(g);
    std::set<std::string> want = oracle_excluded(g);
    std::set<std::string> got(a.non_transformable.begin(), a.non_transformable.end());
    CAPTURE(emit_source(g));
    CHECK(got == want);
    CHECK(a.transformable.size() + a.non_transformable.size() == size_t(g.n));
    check_reasons(g, a);
}

} // namespace

TEST_CASE("no natives and no builtins: everything is componentisable") {
    GraphSpec g;
    g.n = 4;
    g.parent = {-1, 0, -1, 2};
    g.refs.assign(4, {});
    g.refs[1] = {2};
    g.refs[3] = {0};
    agree(g);
    CHECK(analyse(g).non_transformable.empty());
}

TEST_CASE("four-class closure: native N extends S, references R; T extends R") {
    // Exclusion spreads to N's superclass and to what N references, but not
    // downward to R's subclass T.
    const std::string src = R"(
class S { }
class N extends S {
    private R r;
    public native long nat(long x);
}
class R { }
class T extends R { }
)";
    CheckOptions o;
    o.require_entry = false;
    TransformAnalysis a = analyse_transformability(check_program(parse_program(src), o));
    CHECK(a.non_transformable == std::vector<std::string>{"N", "R", "S"});
    CHECK(a.transformable == std::vector<std::string>{"T"});
    CHECK(a.reasons.at("N").rule == ExclusionRule::NativeMethod);
    CHECK(a.reasons.at("S").rule == ExclusionRule::SuperclassRule);
    CHECK(a.reasons.at("S").via == "N");
    CHECK(a.reasons.at("R").rule == ExclusionRule::ReferencedByRule);
    CHECK(a.reasons.at("R").via == "N");
}

TEST_CASE("exclusion cascades through derived exclusions") {
    // N(native) references P1, and P1 extends P2: P2 falls to the
    // superclass rule applied to an already-derived exclusion.
    GraphSpec g;
    g.n = 4; // K0 = W (clean), K1 = P2, K2 = P1 extends P2, K3 = N references P1
    g.parent = {-1, -1, 1, -1};
    g.refs.assign(4, {});
    g.refs[3] = {2};
    g.native = {3};
    agree(g);
    TransformAnalysis a = analyse(g);
    CHECK(a.non_transformable == std::vector<std::string>{"K1", "K2", "K3"});
    CHECK(a.transformable == std::vector<std::string>{"K0"});
}

TEST_CASE("references to builtins do not spread backwards") {
    GraphSpec g;
    g.n = 2; // K0 builtin, K1 holds a K0-typed field
    g.parent = {-1, -1};
    g.refs.assign(2, {});
    g.refs[1] = {0};
    g.builtin = {0};
    agree(g);
    TransformAnalysis a = analyse(g);
    CHECK(a.transformable == std::vector<std::string>{"K1"});
    CHECK(a.reasons.at("K0").rule == ExclusionRule::Builtin);
}

TEST_CASE("closure agrees with the oracle on 100 random class graphs") {
    std::mt19937 rng(0x5EED2026u);
    auto chance = [&](double p) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
    };
    int trials = 0;
    for (int t = 0; t < 100; ++t) {
        GraphSpec g;
        g.n = 1 + int(rng() % 12);
        g.parent.assign(g.n, -1);
        g.refs.assign(g.n, {});
        for (int i = 0; i < g.n; ++i) {
            if (chance(0.12)) {
                g.builtin.insert(i);
                continue;
            }
            if (chance(0.22)) g.native.insert(i);
            if (i > 0 && chance(0.45)) {
                std::vector<int> eligible;
                for (int j = 0; j < i; ++j)
                    if (!g.builtin.count(j)) eligible.push_back(j);
                if (!eligible.empty()) g.parent[i] = eligible[rng() % eligible.size()];
            }
            for (int j = 0; j < g.n; ++j)
                if (j != i && chance(0.18)) g.refs[i].insert(j);
        }
        agree(g);
        ++trials;
    }
    CHECK(trials == 100);
}
