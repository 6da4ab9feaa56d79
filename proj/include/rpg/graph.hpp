#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpg/entity.hpp"
#include "rpg/feature.hpp"
#include "rpg/grounding.hpp"

namespace rpg {

enum class NodeKind { High, Low };
enum class NodeLevel { Area, Category, Subcategory, File, Class, Function, Method };

std::string to_string(NodeKind kind);
std::string to_string(NodeLevel level);
std::optional<NodeLevel> node_level_from_string(const std::string& name);

// One node of the dual-view graph: a semantic feature list paired with
// structural metadata. Low nodes carry code coordinates; high nodes carry
// grounded directory scopes once grounding has run.
struct RpgNode {
    std::string id;
    NodeKind kind = NodeKind::Low;
    NodeLevel level = NodeLevel::File;
    std::vector<FeaturePhrase> feature;

    std::optional<std::string> path;
    std::optional<std::string> qualified_name;
    std::optional<Span> span;
    std::optional<EntityKind> entity_kind;
    std::optional<GroundedScopes> grounded_scopes;

    bool is_high() const { return kind == NodeKind::High; }
    bool operator==(const RpgNode&) const = default;
};

struct GraphDepEdge {
    std::string src;
    std::string dst;
    DepKind kind = DepKind::Contains;

    bool operator==(const GraphDepEdge&) const = default;
    auto operator<=>(const GraphDepEdge&) const = default;
};

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Finding {
    std::string code;
    std::string message;
    std::vector<std::string> node_ids;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool empty() const { return findings.empty(); }
};

// Whether `child_level` may sit directly under `parent_level` in the
// feature hierarchy. Nested definitions follow syntactic nesting.
bool admits_child(NodeLevel parent_level, NodeLevel child_level);

class RpgGraph {
public:
    const std::map<std::string, RpgNode>& nodes() const { return nodes_; }
    const RpgNode* node(const std::string& id) const;
    std::optional<std::string> parent_of(const std::string& id) const;
    // Children in id order.
    std::vector<std::string> children_of(const std::string& id) const;
    const std::vector<GraphDepEdge>& dep_edges() const { return dep_edges_; }
    std::uint64_t version() const { return version_; }
    // Restores a persisted revision counter (deserialization only).
    void set_version(std::uint64_t v) { version_ = v; }

    // Area roots in id order.
    std::vector<std::string> roots() const;
    // Low-level leaf descendants (file/class/function/method) of a subtree.
    std::vector<std::string> low_descendants(const std::string& id) const;

    // Inserts a node under `parent` (required unless the node is an area
    // root). Throws GraphError on duplicate ids or illegal level pairs.
    void add_node(RpgNode n, const std::optional<std::string>& parent);

    // Staged construction: inserts a node with no feature-edge parent yet;
    // the caller re-roots it before the graph is validated.
    void add_floating(RpgNode n);

    // Removes one node and every edge touching it in both views. Children
    // are left untouched; callers remove subtrees bottom-up.
    void remove_node(const std::string& id);

    void reparent(const std::string& id, const std::string& new_parent);
    void set_features(const std::string& id, std::vector<FeaturePhrase> feature);
    void set_scopes(const std::string& id, GroundedScopes scopes);
    // Refreshes a low node's span after a commit shifted its lines.
    void update_low_metadata(const std::string& id, Span span);

    void add_dep_edge(GraphDepEdge edge);
    void remove_dep_edges_if(const std::function<bool(const GraphDepEdge&)>& predicate);

    bool operator==(const RpgGraph& other) const;

private:
    std::map<std::string, RpgNode> nodes_;
    std::map<std::string, std::string> parent_;
    std::map<std::string, std::set<std::string>> children_;
    std::vector<GraphDepEdge> dep_edges_;
    std::uint64_t version_ = 0;
};

ValidationReport validate(const RpgGraph& g);

enum class GraphView { Feature, Dependency };

// Edges of one view over the shared node set. Feature edges are reported as
// `contains` for uniformity.
std::vector<GraphDepEdge> subgraph_view(const RpgGraph& g, GraphView view);

// Stable content-derived id for a low-level node.
std::string low_node_id(const std::string& path, const std::optional<std::string>& qualified,
                        EntityKind kind);
// Stable id for a high-level node from its label path ("area/cat/sub").
std::string high_node_id(const std::string& label_path);

}  // namespace rpg
