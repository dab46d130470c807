#include "moo/manifest.hpp"

#include <fstream>
#include <sstream>

namespace moo {

const Manifest::NodeDecl* Manifest::find_node(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

namespace {

[[noreturn]] void bad(int line, const std::string& msg) {
    throw ConfigError("manifest:" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

} // namespace

Manifest parse_manifest(const std::string& text) {
    Manifest m;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::vector<std::string> w = split_ws(line);
        if (w.empty()) continue;
        const std::string& d = w[0];
        if (d == "node") {
            if (w.size() != 2 && w.size() != 3) bad(ln, "usage: node <id> [host:port]");
            Manifest::NodeDecl n;
            n.id = w[1];
            if (m.find_node(n.id)) bad(ln, "duplicate node '" + n.id + "'");
            if (w.size() == 3) {
                auto colon = w[2].rfind(':');
                if (colon == std::string::npos || colon == 0 || colon + 1 == w[2].size())
                    bad(ln, "address must be host:port");
                n.host = w[2].substr(0, colon);
                try {
                    n.port = std::stoi(w[2].substr(colon + 1));
                } catch (const std::exception&) {
                    bad(ln, "invalid port in '" + w[2] + "'");
                }
                if (n.port <= 0 || n.port > 65535) bad(ln, "port out of range");
            }
            m.nodes.push_back(std::move(n));
        } else if (d == "entry") {
            if (w.size() != 2) bad(ln, "usage: entry <id>");
            if (!m.entry.empty()) bad(ln, "duplicate entry directive");
            m.entry = w[1];
        } else if (d == "place") {
            if (w.size() < 3) bad(ln, "usage: place <class> local|remote <id>");
            const std::string& cls = w[1];
            if (m.place.count(cls)) bad(ln, "duplicate place for class '" + cls + "'");
            if (w[2] == "local") {
                if (w.size() != 3) bad(ln, "usage: place <class> local");
                m.place[cls] = "";
            } else if (w[2] == "remote") {
                if (w.size() != 4) bad(ln, "usage: place <class> remote <id>");
                m.place[cls] = w[3];
            } else {
                bad(ln, "placement must be 'local' or 'remote <id>'");
            }
        } else if (d == "statics") {
            if (w.size() != 3) bad(ln, "usage: statics <class> <id>");
            if (m.statics_home.count(w[1]))
                bad(ln, "duplicate statics for class '" + w[1] + "'");
            m.statics_home[w[1]] = w[2];
        } else {
            bad(ln, "unknown directive '" + d + "'");
        }
    }
    if (m.nodes.empty()) throw ConfigError("manifest declares no nodes");
    if (m.entry.empty()) m.entry = m.nodes.front().id;
    if (!m.find_node(m.entry))
        throw ConfigError("manifest: entry node '" + m.entry + "' is not declared");
    for (const auto& [cls, node] : m.place)
        if (!node.empty() && !m.find_node(node))
            throw ConfigError("manifest: class '" + cls + "' placed on undeclared node '" +
                              node + "'");
    for (const auto& [cls, node] : m.statics_home)
        if (!m.find_node(node))
            throw ConfigError("manifest: statics of '" + cls +
                              "' homed on undeclared node '" + node + "'");
    return m;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str());
}

Manifest single_node_manifest() {
    Manifest m;
    m.nodes.push_back({"n1", "", 0});
    m.entry = "n1";
    return m;
}

Policy::Policy(std::string self, Manifest m) : self_(std::move(self)), m_(std::move(m)) {
    if (!m_.find_node(self_))
        throw ConfigError("node '" + self_ + "' is not declared in the manifest");
}

void Policy::update(const Manifest& m) {
    std::lock_guard<std::mutex> lk(mu_);
    if (m.entry != m_.entry)
        throw ConfigError("manifest reload may not change the entry node");
    for (const auto& n : m.nodes)
        if (!m_.find_node(n.id))
            throw ConfigError("manifest reload may not add node '" + n.id + "'");
    for (const auto& n : m_.nodes)
        if (!m.find_node(n.id))
            throw ConfigError("manifest reload may not drop node '" + n.id + "'");
    m_.place = m.place;
    m_.statics_home = m.statics_home;
    ++version_;
}

std::string Policy::create_node(const std::string& cls) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = m_.place.find(cls);
    if (it == m_.place.end()) return "";  // default: local
    return it->second == self_ ? "" : it->second;
}

std::string Policy::statics_node(const std::string& cls) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = m_.statics_home.find(cls);
    std::string home = it == m_.statics_home.end() ? m_.entry : it->second;
    return home == self_ ? "" : home;
}

std::string Policy::entry() const {
    std::lock_guard<std::mutex> lk(mu_);
    return m_.entry;
}

int Policy::version() const {
    std::lock_guard<std::mutex> lk(mu_);
    return version_;
}

} // namespace moo
