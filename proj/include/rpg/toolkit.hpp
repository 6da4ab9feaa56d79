#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpg/graph.hpp"

namespace rpg {

struct ToolResult {
    bool ok = true;
    std::string error;
    std::vector<std::string> warnings;
    nlohmann::json results = nlohmann::json::array();

    nlohmann::json to_json() const;
};

struct SearchParams {
    std::string mode;  // "features" | "snippets" | "auto"
    std::vector<std::string> feature_terms;
    std::vector<std::string> search_scopes;
    std::vector<std::string> search_terms;
    std::optional<std::pair<int, int>> line_nums;
    std::string file_path_or_pattern = "**/*.py";
};

struct FetchParams {
    std::vector<std::string> code_entities;
    std::vector<std::string> feature_entities;
};

struct ExploreParams {
    std::vector<std::string> start_code_entities;
    std::vector<std::string> start_feature_entities;
    std::string direction = "downstream";  // upstream | downstream | both
    int traversal_depth = 2;               // -1 = unlimited
    std::vector<std::string> entity_type_filter;
    std::vector<std::string> dependency_type_filter;
};

// Read-only query surface over a loaded graph snapshot. Source previews and
// snippet search need the subject checkout (`repo_root`); without it those
// results degrade to warnings.
class Toolkit {
public:
    explicit Toolkit(const RpgGraph* graph, std::string repo_root = "",
                     double min_similarity = 0.2);

    // Swaps the snapshot atomically between requests.
    void swap_graph(const RpgGraph* graph);

    ToolResult search_node(const SearchParams& params) const;
    ToolResult fetch_node(const FetchParams& params) const;
    ToolResult explore_rpg(const ExploreParams& params) const;

    // One ToolRequest object in, one ToolResult object out. Unknown tools
    // and unknown parameter names are request errors.
    nlohmann::json handle_request(const nlohmann::json& request) const;

    // Line-delimited JSON service over plain streams.
    void service_loop(std::istream& in, std::ostream& out) const;

    // "area label/category label/subcategory label" chain for a node.
    std::string feature_path(const std::string& id) const;

private:
    struct Index;
    const RpgGraph* graph_;
    std::string repo_root_;
    double min_similarity_;
    std::shared_ptr<const Index> index_;

    void rebuild_index();
    std::optional<std::string> resolve_code_entity(const std::string& text,
                                                   std::vector<std::string>& warnings) const;
    std::optional<std::string> resolve_feature_entity(const std::string& text,
                                                      std::vector<std::string>& warnings) const;
    nlohmann::json node_payload(const std::string& id) const;
    std::string preview_of(const RpgNode& node, std::vector<std::string>& warnings) const;
};

}  // namespace rpg
