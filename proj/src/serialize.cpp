#include "rpg/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace rpg {

namespace {

json node_to_json(const RpgNode& node) {
    json meta = json::object();
    if (node.path) meta["path"] = *node.path;
    if (node.qualified_name) meta["qualified_name"] = *node.qualified_name;
    if (node.span) meta["span"] = json::array({node.span->start, node.span->end});
    if (node.entity_kind) meta["entity_kind"] = to_string(*node.entity_kind);
    if (node.grounded_scopes) {
        meta["grounded_scopes"] = json::array();
        for (const auto& scope : node.grounded_scopes->scopes) {
            meta["grounded_scopes"].push_back(scope);
        }
    }
    return json{{"id", node.id},
                {"kind", to_string(node.kind)},
                {"level", to_string(node.level)},
                {"feature", node.feature},
                {"metadata", meta}};
}

std::string where(size_t index, const json& item) {
    std::string id;
    if (item.is_object() && item.contains("id") && item["id"].is_string()) {
        id = " (id=" + item["id"].get<std::string>() + ")";
    }
    return "nodes[" + std::to_string(index) + "]" + id;
}

}  // namespace

std::string serialize(const RpgGraph& g) {
    json doc;
    doc["version"] = g.version();
    doc["nodes"] = json::array();
    for (const auto& [id, node] : g.nodes()) {
        doc["nodes"].push_back(node_to_json(node));
    }
    json feature_edges = json::array();
    for (const auto& [id, node] : g.nodes()) {
        (void)node;
        for (const auto& child : g.children_of(id)) {
            feature_edges.push_back(json::array({id, child}));
        }
    }
    doc["feature_edges"] = feature_edges;
    json dep_edges = json::array();
    for (const auto& edge : g.dep_edges()) {
        dep_edges.push_back(
            json{{"src", edge.src}, {"dst", edge.dst}, {"kind", to_string(edge.kind)}});
    }
    doc["dep_edges"] = dep_edges;
    return doc.dump(2) + "\n";
}

RpgGraph deserialize(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level is not an object");
    for (const char* key : {"version", "nodes", "feature_edges", "dep_edges"}) {
        if (!doc.contains(key)) throw ParseError(std::string("missing top-level key '") + key + "'");
    }

    // nodes first, then edges; parents must exist before children, so order
    // insertions by hierarchy depth rather than document order.
    struct Pending {
        RpgNode node;
    };
    std::vector<Pending> pending;
    for (size_t i = 0; i < doc["nodes"].size(); ++i) {
        const json& item = doc["nodes"][i];
        if (!item.is_object()) throw ParseError(where(i, item) + ": not an object");
        for (const char* key : {"id", "kind", "level", "feature", "metadata"}) {
            if (!item.contains(key)) {
                throw ParseError(where(i, item) + ": missing '" + key + "'");
            }
        }
        RpgNode node;
        node.id = item["id"].get<std::string>();
        std::string kind = item["kind"].get<std::string>();
        if (kind == "high") {
            node.kind = NodeKind::High;
        } else if (kind == "low") {
            node.kind = NodeKind::Low;
        } else {
            throw ParseError(where(i, item) + ": unknown kind '" + kind + "'");
        }
        auto level = node_level_from_string(item["level"].get<std::string>());
        if (!level) {
            throw ParseError(where(i, item) + ": unknown level '" +
                             item["level"].get<std::string>() + "'");
        }
        node.level = *level;
        for (const auto& phrase : item["feature"]) {
            node.feature.push_back(phrase.get<std::string>());
        }
        const json& meta = item["metadata"];
        if (meta.contains("path")) node.path = meta["path"].get<std::string>();
        if (meta.contains("qualified_name")) {
            node.qualified_name = meta["qualified_name"].get<std::string>();
        }
        if (meta.contains("span")) {
            node.span = Span{meta["span"][0].get<int>(), meta["span"][1].get<int>()};
        }
        if (meta.contains("entity_kind")) {
            auto ek = entity_kind_from_string(meta["entity_kind"].get<std::string>());
            if (!ek) throw ParseError(where(i, item) + ": unknown entity_kind");
            node.entity_kind = *ek;
        }
        if (meta.contains("grounded_scopes")) {
            GroundedScopes scopes;
            for (const auto& s : meta["grounded_scopes"]) {
                scopes.scopes.insert(s.get<std::string>());
            }
            node.grounded_scopes = std::move(scopes);
        }
        pending.push_back({std::move(node)});
    }

    std::map<std::string, std::string> parent_of;
    for (size_t i = 0; i < doc["feature_edges"].size(); ++i) {
        const json& e = doc["feature_edges"][i];
        if (!e.is_array() || e.size() != 2) {
            throw ParseError("feature_edges[" + std::to_string(i) + "]: expected [parent, child]");
        }
        auto [it, fresh] = parent_of.emplace(e[1].get<std::string>(), e[0].get<std::string>());
        if (!fresh) {
            throw ParseError("feature_edges[" + std::to_string(i) + "]: node " +
                             e[1].get<std::string>() + " has two parents");
        }
    }

    RpgGraph g;
    // insert parents before children
    std::map<std::string, const Pending*> by_id;
    for (const auto& p : pending) by_id[p.node.id] = &p;
    std::function<void(const std::string&)> insert = [&](const std::string& id) {
        auto it = by_id.find(id);
        if (it == by_id.end() || g.node(id) != nullptr) return;
        std::optional<std::string> parent;
        if (auto p = parent_of.find(id); p != parent_of.end()) {
            parent = p->second;
            insert(p->second);
            if (!g.node(p->second)) {
                throw ParseError("feature edge parent missing from nodes: " + p->second);
            }
        }
        try {
            g.add_node(it->second->node, parent);
        } catch (const GraphError& e) {
            throw ParseError(std::string("node ") + id + ": " + e.what());
        }
    };
    for (const auto& p : pending) insert(p.node.id);

    for (size_t i = 0; i < doc["dep_edges"].size(); ++i) {
        const json& e = doc["dep_edges"][i];
        for (const char* key : {"src", "dst", "kind"}) {
            if (!e.contains(key)) {
                throw ParseError("dep_edges[" + std::to_string(i) + "]: missing '" + key + "'");
            }
        }
        auto kind = dep_kind_from_string(e["kind"].get<std::string>());
        if (!kind) {
            throw ParseError("dep_edges[" + std::to_string(i) + "]: unknown kind '" +
                             e["kind"].get<std::string>() + "'");
        }
        g.add_dep_edge({e["src"].get<std::string>(), e["dst"].get<std::string>(), *kind});
    }

    // restore the recorded revision (insertions above bumped it arbitrarily)
    g.set_version(doc["version"].get<std::uint64_t>());
    return g;
}

RpgGraph load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open graph file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize(buffer.str());
}

void save_graph_file(const RpgGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write graph file: " + path);
    out << serialize(g);
}

}  // namespace rpg
