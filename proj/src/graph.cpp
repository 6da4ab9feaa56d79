#include "rpg/graph.hpp"

#include <algorithm>
#include <functional>

namespace rpg {

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

bool is_low_level(NodeLevel level) {
    return level == NodeLevel::File || level == NodeLevel::Class ||
           level == NodeLevel::Function || level == NodeLevel::Method;
}

}  // namespace

std::string to_string(NodeKind kind) {
    return kind == NodeKind::High ? "high" : "low";
}

std::string to_string(NodeLevel level) {
    switch (level) {
        case NodeLevel::Area: return "area";
        case NodeLevel::Category: return "category";
        case NodeLevel::Subcategory: return "subcategory";
        case NodeLevel::File: return "file";
        case NodeLevel::Class: return "class";
        case NodeLevel::Function: return "function";
        case NodeLevel::Method: return "method";
    }
    return "unknown";
}

std::optional<NodeLevel> node_level_from_string(const std::string& name) {
    if (name == "area") return NodeLevel::Area;
    if (name == "category") return NodeLevel::Category;
    if (name == "subcategory") return NodeLevel::Subcategory;
    if (name == "file") return NodeLevel::File;
    if (name == "class") return NodeLevel::Class;
    if (name == "function") return NodeLevel::Function;
    if (name == "method") return NodeLevel::Method;
    return std::nullopt;
}

bool admits_child(NodeLevel parent_level, NodeLevel child_level) {
    switch (parent_level) {
        case NodeLevel::Area: return child_level == NodeLevel::Category;
        case NodeLevel::Category: return child_level == NodeLevel::Subcategory;
        case NodeLevel::Subcategory: return child_level == NodeLevel::File;
        case NodeLevel::File:
            return child_level == NodeLevel::Class || child_level == NodeLevel::Function;
        case NodeLevel::Class:
            return child_level == NodeLevel::Method || child_level == NodeLevel::Class;
        case NodeLevel::Function:
        case NodeLevel::Method:
            return child_level == NodeLevel::Function || child_level == NodeLevel::Class;
    }
    return false;
}

const RpgNode* RpgGraph::node(const std::string& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

std::optional<std::string> RpgGraph::parent_of(const std::string& id) const {
    auto it = parent_.find(id);
    return it == parent_.end() ? std::nullopt : std::optional(it->second);
}

std::vector<std::string> RpgGraph::children_of(const std::string& id) const {
    auto it = children_.find(id);
    if (it == children_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

std::vector<std::string> RpgGraph::roots() const {
    std::vector<std::string> out;
    for (const auto& [id, node] : nodes_) {
        if (node.level == NodeLevel::Area) out.push_back(id);
    }
    return out;
}

std::vector<std::string> RpgGraph::low_descendants(const std::string& id) const {
    std::vector<std::string> out;
    std::vector<std::string> stack{id};
    while (!stack.empty()) {
        std::string current = stack.back();
        stack.pop_back();
        const RpgNode* n = node(current);
        if (!n) continue;
        if (current != id && n->kind == NodeKind::Low) {
            out.push_back(current);
        }
        for (const auto& child : children_of(current)) {
            stack.push_back(child);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void RpgGraph::add_node(RpgNode n, const std::optional<std::string>& parent) {
    if (nodes_.count(n.id) != 0) {
        throw GraphError("duplicate node id: " + n.id);
    }
    if (n.level == NodeLevel::Area) {
        if (parent) throw GraphError("area node cannot have a parent: " + n.id);
    } else {
        if (!parent) throw GraphError("non-area node requires a parent: " + n.id);
        const RpgNode* p = node(*parent);
        if (!p) throw GraphError("unknown parent " + *parent + " for node " + n.id);
        if (!admits_child(p->level, n.level)) {
            throw GraphError("illegal level pair: " + to_string(p->level) + " -> " +
                             to_string(n.level) + " (node " + n.id + ")");
        }
    }
    std::string id = n.id;
    nodes_.emplace(id, std::move(n));
    if (parent) {
        parent_[id] = *parent;
        children_[*parent].insert(id);
    }
    ++version_;
}

void RpgGraph::add_floating(RpgNode n) {
    if (nodes_.count(n.id) != 0) {
        throw GraphError("duplicate node id: " + n.id);
    }
    std::string id = n.id;
    nodes_.emplace(id, std::move(n));
    ++version_;
}

void RpgGraph::remove_node(const std::string& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) return;
    if (auto p = parent_.find(id); p != parent_.end()) {
        children_[p->second].erase(id);
        parent_.erase(p);
    }
    children_.erase(id);
    dep_edges_.erase(std::remove_if(dep_edges_.begin(), dep_edges_.end(),
                                    [&](const GraphDepEdge& e) {
                                        return e.src == id || e.dst == id;
                                    }),
                     dep_edges_.end());
    nodes_.erase(it);
    ++version_;
}

void RpgGraph::reparent(const std::string& id, const std::string& new_parent) {
    const RpgNode* n = node(id);
    const RpgNode* p = node(new_parent);
    if (!n || !p) throw GraphError("reparent with unknown node");
    if (!admits_child(p->level, n->level)) {
        throw GraphError("illegal level pair: " + to_string(p->level) + " -> " +
                         to_string(n->level));
    }
    if (auto old = parent_.find(id); old != parent_.end()) {
        children_[old->second].erase(id);
    }
    parent_[id] = new_parent;
    children_[new_parent].insert(id);
    ++version_;
}

void RpgGraph::set_features(const std::string& id, std::vector<FeaturePhrase> feature) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw GraphError("set_features on unknown node " + id);
    it->second.feature = std::move(feature);
    ++version_;
}

void RpgGraph::set_scopes(const std::string& id, GroundedScopes scopes) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw GraphError("set_scopes on unknown node " + id);
    it->second.grounded_scopes = std::move(scopes);
    ++version_;
}

void RpgGraph::update_low_metadata(const std::string& id, Span span) {
    auto it = nodes_.find(id);
    if (it == nodes_.end() || it->second.kind != NodeKind::Low) return;
    if (it->second.span == span) return;
    it->second.span = span;
    ++version_;
}

void RpgGraph::add_dep_edge(GraphDepEdge edge) {
    auto pos = std::lower_bound(dep_edges_.begin(), dep_edges_.end(), edge);
    if (pos != dep_edges_.end() && *pos == edge) return;
    dep_edges_.insert(pos, std::move(edge));
    ++version_;
}

void RpgGraph::remove_dep_edges_if(const std::function<bool(const GraphDepEdge&)>& predicate) {
    auto before = dep_edges_.size();
    dep_edges_.erase(std::remove_if(dep_edges_.begin(), dep_edges_.end(), predicate),
                     dep_edges_.end());
    if (dep_edges_.size() != before) ++version_;
}

bool RpgGraph::operator==(const RpgGraph& other) const {
    return nodes_ == other.nodes_ && parent_ == other.parent_ && dep_edges_ == other.dep_edges_ &&
           version_ == other.version_;
}

ValidationReport validate(const RpgGraph& g) {
    ValidationReport report;
    auto add = [&](std::string code, std::string message, std::vector<std::string> ids = {}) {
        report.findings.push_back({std::move(code), std::move(message), std::move(ids)});
    };

    for (const auto& [id, node] : g.nodes()) {
        bool low = is_low_level(node.level);
        if (low != (node.kind == NodeKind::Low)) {
            add("kind-level-mismatch", "node kind does not match its level", {id});
        }
        auto parent = g.parent_of(id);
        if (node.level == NodeLevel::Area) {
            if (parent) add("area-with-parent", "area node has a feature-edge parent", {id});
        } else if (!parent) {
            add("orphan-node", "non-area node has no feature-edge parent", {id});
        } else if (const RpgNode* p = g.node(*parent)) {
            if (!admits_child(p->level, node.level)) {
                add("illegal-level-pair",
                    to_string(p->level) + " -> " + to_string(node.level), {*parent, id});
            }
        } else {
            add("dangling-parent", "feature edge references missing parent", {id});
        }
        for (const auto& phrase : node.feature) {
            if (!is_normalized_feature(phrase)) {
                add("unnormalized-feature", "feature phrase not normalized: '" + phrase + "'", {id});
            }
        }
        if (node.kind == NodeKind::Low) {
            if (!node.path || !node.span || !node.entity_kind) {
                add("missing-metadata", "low node lacks path/span/entity kind", {id});
            }
            if (node.grounded_scopes) {
                add("scopes-on-low", "low node carries grounded scopes", {id});
            }
            bool needs_qualified = node.level != NodeLevel::File;
            if (needs_qualified != node.qualified_name.has_value()) {
                add("qualified-name-mismatch",
                    "qualified name must be present exactly for class/function/method nodes", {id});
            }
        }
    }

    // forest reachability: every node reachable from exactly one area root
    std::map<std::string, int> seen;
    std::function<void(const std::string&, int)> walk = [&](const std::string& id, int depth) {
        if (depth > static_cast<int>(g.nodes().size())) return;  // cycle guard
        ++seen[id];
        if (seen[id] > 1) return;
        for (const auto& child : g.children_of(id)) walk(child, depth + 1);
    };
    for (const auto& root : g.roots()) walk(root, 0);
    for (const auto& [id, node] : g.nodes()) {
        auto it = seen.find(id);
        int count = it == seen.end() ? 0 : it->second;
        if (count == 0 && node.level != NodeLevel::Area) {
            add("unreachable", "node not reachable from any area root", {id});
        } else if (count > 1) {
            add("forest-violated", "node reachable via multiple paths", {id});
        }
    }

    for (const auto& [id, node] : g.nodes()) {
        if (node.kind != NodeKind::High) continue;
        auto lows = g.low_descendants(id);
        if (lows.empty()) {
            add("empty-abstract-node", "high-level node has no low-level descendants", {id});
        }
        if (node.grounded_scopes) {
            const auto& scopes = node.grounded_scopes->scopes;
            for (auto a = scopes.begin(); a != scopes.end(); ++a) {
                for (auto b = std::next(a); b != scopes.end(); ++b) {
                    if (scope_covers(*a, *b) || scope_covers(*b, *a)) {
                        add("scope-antichain-violated",
                            "grounded scopes nest: '" + *a + "' vs '" + *b + "'", {id});
                    }
                }
            }
            for (const auto& low : lows) {
                const RpgNode* leaf = g.node(low);
                if (!leaf || leaf->level != NodeLevel::File || !leaf->path) continue;
                std::string dir;
                if (auto pos = leaf->path->rfind('/'); pos != std::string::npos) {
                    dir = leaf->path->substr(0, pos);
                }
                bool covered = std::any_of(scopes.begin(), scopes.end(), [&](const auto& s) {
                    return scope_covers(s, dir);
                });
                if (!covered) {
                    add("scope-coverage-violated",
                        "leaf directory '" + dir + "' not covered", {id, low});
                }
            }
        }
    }

    // abstract chain above every file is exactly subcategory/category/area
    for (const auto& [id, node] : g.nodes()) {
        if (node.level != NodeLevel::File) continue;
        std::vector<NodeLevel> chain;
        auto current = g.parent_of(id);
        int guard = 0;
        while (current && guard++ < 8) {
            const RpgNode* p = g.node(*current);
            if (!p) break;
            chain.push_back(p->level);
            current = g.parent_of(*current);
        }
        bool ok = chain.size() == 3 && chain[0] == NodeLevel::Subcategory &&
                  chain[1] == NodeLevel::Category && chain[2] == NodeLevel::Area;
        if (!ok) {
            add("abstract-depth", "file node lacks the three-level abstract chain", {id});
        }
    }

    for (const auto& edge : g.dep_edges()) {
        const RpgNode* src = g.node(edge.src);
        const RpgNode* dst = g.node(edge.dst);
        if (!src || !dst) {
            add("dangling-dep-edge", "dependency edge references missing node",
                {edge.src, edge.dst});
            continue;
        }
        if (src->kind != NodeKind::Low || dst->kind != NodeKind::Low) {
            add("dep-edge-on-high", "dependency edge touches a high-level node",
                {edge.src, edge.dst});
        }
        if (edge.src == edge.dst && edge.kind != DepKind::Invokes) {
            add("self-dep-edge", "self edge of kind " + to_string(edge.kind), {edge.src});
        }
    }
    return report;
}

std::vector<GraphDepEdge> subgraph_view(const RpgGraph& g, GraphView view) {
    std::vector<GraphDepEdge> out;
    if (view == GraphView::Dependency) {
        return g.dep_edges();
    }
    for (const auto& [id, node] : g.nodes()) {
        (void)node;
        for (const auto& child : g.children_of(id)) {
            out.push_back({id, child, DepKind::Contains});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string low_node_id(const std::string& path, const std::optional<std::string>& qualified,
                        EntityKind kind) {
    std::string key = path + "\x1f" + (qualified ? *qualified : "") + "\x1f" + to_string(kind);
    return "L" + hex64(fnv1a(key));
}

std::string high_node_id(const std::string& label_path) {
    return "H" + hex64(fnv1a(label_path));
}

}  // namespace rpg
