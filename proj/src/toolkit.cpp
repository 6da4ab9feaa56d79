#include "rpg/toolkit.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "rpg/code_index.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rpg {

namespace {

constexpr int kPreviewLines = 40;
constexpr size_t kTopResults = 10;
constexpr size_t kSnippetCap = 20;

std::string join_path(const std::vector<std::string>& labels) {
    std::string out;
    for (const auto& label : labels) {
        if (!out.empty()) out.push_back('/');
        out += label;
    }
    return out;
}

std::string node_label(const RpgNode& node) {
    if (node.kind == NodeKind::High) {
        return node.feature.empty() ? std::string("?") : node.feature.front();
    }
    if (node.qualified_name) return *node.qualified_name;
    return node.path.value_or("?");
}

bool has_glob_chars(const std::string& text) {
    return text.find_first_of("*?[") != std::string::npos;
}

}  // namespace

struct Toolkit::Index {
    std::map<std::string, std::string> file_by_path;                  // path -> node id
    std::map<std::pair<std::string, std::string>, std::string> code;  // (path, qualified) -> id
    std::map<std::string, std::vector<std::string>> by_name;          // bare name -> ids
    std::map<std::string, std::string> feature_by_path;               // normalized label path -> id
    std::map<std::string, std::string> path_of_node;                  // id -> label path
};

Toolkit::Toolkit(const RpgGraph* graph, std::string repo_root, double min_similarity)
    : graph_(graph), repo_root_(std::move(repo_root)), min_similarity_(min_similarity) {
    rebuild_index();
}

void Toolkit::swap_graph(const RpgGraph* graph) {
    graph_ = graph;
    rebuild_index();
}

void Toolkit::rebuild_index() {
    auto index = std::make_shared<Index>();
    // label paths via depth-first walk from roots
    std::function<void(const std::string&, std::vector<std::string>&)> walk =
        [&](const std::string& id, std::vector<std::string>& labels) {
            const RpgNode* node = graph_->node(id);
            if (!node) return;
            labels.push_back(node_label(*node));
            index->path_of_node[id] = join_path(labels);
            if (node->kind == NodeKind::High) {
                index->feature_by_path[join_path(labels)] = id;
            }
            for (const auto& child : graph_->children_of(id)) {
                walk(child, labels);
            }
            labels.pop_back();
        };
    std::vector<std::string> labels;
    for (const auto& root : graph_->roots()) {
        walk(root, labels);
    }
    for (const auto& [id, node] : graph_->nodes()) {
        if (node.kind != NodeKind::Low || !node.path) continue;
        if (node.level == NodeLevel::File) {
            index->file_by_path[*node.path] = id;
        } else if (node.qualified_name) {
            index->code[{*node.path, *node.qualified_name}] = id;
            std::string bare = *node.qualified_name;
            if (auto dot = bare.rfind('.'); dot != std::string::npos) bare = bare.substr(dot + 1);
            index->by_name[bare].push_back(id);
            index->by_name[*node.qualified_name].push_back(id);
        }
    }
    index_ = std::move(index);
}

std::string Toolkit::feature_path(const std::string& id) const {
    auto it = index_->path_of_node.find(id);
    if (it != index_->path_of_node.end()) return it->second;
    // unrooted low node: fall back to the node label
    const RpgNode* node = graph_->node(id);
    return node ? node_label(*node) : "";
}

json Toolkit::node_payload(const std::string& id) const {
    const RpgNode* node = graph_->node(id);
    json out;
    out["node_id"] = id;
    if (!node) return out;
    out["feature_path"] = feature_path(id);
    out["features"] = node->feature;
    if (node->kind == NodeKind::High) {
        out["entity_type"] = "feature";
        if (node->grounded_scopes) {
            out["grounded_scopes"] = json::array();
            for (const auto& scope : node->grounded_scopes->scopes) {
                out["grounded_scopes"].push_back(scope);
            }
        }
    } else {
        out["entity_type"] = node->entity_kind ? to_string(*node->entity_kind) : "unknown";
        if (node->path) out["file_path"] = *node->path;
        if (node->qualified_name) out["qualified_name"] = *node->qualified_name;
        if (node->span) out["lines"] = json::array({node->span->start, node->span->end});
    }
    return out;
}

std::string Toolkit::preview_of(const RpgNode& node, std::vector<std::string>& warnings) const {
    if (!node.path || !node.span) return "";
    if (repo_root_.empty()) {
        warnings.push_back("no repository root configured; previews unavailable");
        return "";
    }
    std::ifstream in(fs::path(repo_root_) / *node.path, std::ios::binary);
    if (!in) {
        warnings.push_back("source unavailable: " + *node.path);
        return "";
    }
    std::string line;
    std::string out;
    int line_no = 0;
    int emitted = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no < node.span->start) continue;
        if (line_no > node.span->end || emitted >= kPreviewLines) break;
        out += line;
        out.push_back('\n');
        ++emitted;
    }
    return out;
}

std::optional<std::string> Toolkit::resolve_code_entity(const std::string& text,
                                                        std::vector<std::string>& warnings) const {
    const auto& index = *index_;
    if (auto file = index.file_by_path.find(text); file != index.file_by_path.end()) {
        return file->second;
    }
    if (auto colon = text.find(':'); colon != std::string::npos) {
        std::string path = text.substr(0, colon);
        std::string qualified = text.substr(colon + 1);
        if (auto hit = index.code.find({path, qualified}); hit != index.code.end()) {
            return hit->second;
        }
        warnings.push_back("unknown code entity ignored: " + text);
        return std::nullopt;
    }
    if (auto named = index.by_name.find(text); named != index.by_name.end()) {
        if (named->second.size() == 1) {
            return named->second.front();
        }
        warnings.push_back("ambiguous entity '" + text + "' matches " +
                           std::to_string(named->second.size()) + " definitions; ignored");
        return std::nullopt;
    }
    warnings.push_back("unknown code entity ignored: " + text);
    return std::nullopt;
}

std::optional<std::string> Toolkit::resolve_feature_entity(
    const std::string& text, std::vector<std::string>& warnings) const {
    auto segments = split_path_segments(text);
    std::vector<std::string> normalized;
    for (const auto& segment : segments) {
        normalized.push_back(label_phrase(segment));
    }
    auto hit = index_->feature_by_path.find(join_path(normalized));
    if (hit != index_->feature_by_path.end()) {
        return hit->second;
    }
    warnings.push_back("unknown feature path ignored: " + text);
    return std::nullopt;
}

ToolResult Toolkit::search_node(const SearchParams& params) const {
    ToolResult result;
    if (params.mode != "features" && params.mode != "snippets" && params.mode != "auto") {
        result.ok = false;
        result.error = "mode must be one of features|snippets|auto";
        return result;
    }
    bool want_features = params.mode == "features" || params.mode == "auto";
    bool want_snippets = params.mode == "snippets";
    if (want_features && params.feature_terms.empty()) {
        result.ok = false;
        result.error = "feature_terms required for mode " + params.mode;
        return result;
    }
    if (params.mode == "snippets" && params.search_terms.empty() && !params.line_nums) {
        result.ok = false;
        result.error = "search_terms required for snippets mode";
        return result;
    }
    if (params.line_nums &&
        (has_glob_chars(params.file_path_or_pattern) ||
         index_->file_by_path.find(params.file_path_or_pattern) == index_->file_by_path.end())) {
        result.ok = false;
        result.error = "line_nums requires an exact file path in file_path_or_pattern";
        return result;
    }

    double top_score = 0.0;
    if (want_features) {
        // optional scope restriction to named feature subtrees
        std::optional<std::set<std::string>> allowed;
        if (!params.search_scopes.empty()) {
            allowed.emplace();
            for (const auto& scope : params.search_scopes) {
                if (auto id = resolve_feature_entity(scope, result.warnings)) {
                    allowed->insert(*id);
                    for (const auto& low : graph_->low_descendants(*id)) allowed->insert(low);
                    std::deque<std::string> queue{*id};
                    while (!queue.empty()) {
                        auto current = queue.front();
                        queue.pop_front();
                        for (const auto& child : graph_->children_of(current)) {
                            allowed->insert(child);
                            queue.push_back(child);
                        }
                    }
                }
            }
        }
        std::vector<std::string> query;
        for (const auto& term : params.feature_terms) {
            if (auto normalized = normalize_feature(term)) query.push_back(*normalized);
        }
        TokenBag query_bag = token_bag(query);
        std::vector<std::pair<double, std::string>> ranked;
        for (const auto& [id, node] : graph_->nodes()) {
            if (node.feature.empty()) continue;
            if (allowed && allowed->count(id) == 0) continue;
            double score = jaccard(query_bag, token_bag(node.feature));
            if (score > 0.0) ranked.emplace_back(score, id);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        if (ranked.size() > kTopResults) ranked.resize(kTopResults);
        for (const auto& [score, id] : ranked) {
            json row = node_payload(id);
            row["score"] = score;
            row["match"] = "features";
            result.results.push_back(row);
        }
        top_score = ranked.empty() ? 0.0 : ranked.front().first;
        if (params.mode == "auto" && (ranked.empty() || top_score < min_similarity_)) {
            want_snippets = true;
            result.warnings.push_back("feature search weak; falling back to snippet search");
        }
    }

    if (want_snippets) {
        std::vector<std::string> terms = params.search_terms;
        if (terms.empty() && params.mode == "auto") {
            terms = params.feature_terms;
            result.warnings.push_back("auto fallback reused feature_terms as search_terms");
        }
        for (const auto& term : terms) {
            // qualified entity or exact path first
            std::vector<std::string> scratch;
            if (term.find(':') != std::string::npos ||
                index_->file_by_path.count(term) != 0) {
                if (auto id = resolve_code_entity(term, scratch)) {
                    json row = node_payload(*id);
                    row["match"] = "entity";
                    std::vector<std::string> preview_warnings;
                    row["preview"] = preview_of(*graph_->node(*id), preview_warnings);
                    result.results.push_back(row);
                    continue;
                }
            }
            // literal substring search over the checkout
            if (repo_root_.empty()) {
                result.warnings.push_back("no repository root configured; snippet search skipped");
                break;
            }
            size_t hits = 0;
            for (const auto& [path, file_id] : index_->file_by_path) {
                if (!glob_match(params.file_path_or_pattern, path)) continue;
                std::ifstream in(fs::path(repo_root_) / path, std::ios::binary);
                if (!in) continue;
                std::string line;
                int line_no = 0;
                while (std::getline(in, line) && hits < kSnippetCap) {
                    ++line_no;
                    if (line.find(term) == std::string::npos) continue;
                    json row;
                    row["match"] = "snippet";
                    row["file_path"] = path;
                    row["line"] = line_no;
                    row["snippet"] = line;
                    row["feature_path"] = feature_path(file_id);
                    result.results.push_back(row);
                    ++hits;
                }
                if (hits >= kSnippetCap) break;
            }
            if (hits >= kSnippetCap) {
                result.warnings.push_back("snippet results capped at " +
                                          std::to_string(kSnippetCap) + " for term: " + term);
            }
            if (hits == 0) {
                result.warnings.push_back("no snippet match for term: " + term);
            }
        }
        if (params.line_nums) {
            const std::string& path = params.file_path_or_pattern;
            std::ifstream in(fs::path(repo_root_) / path, std::ios::binary);
            if (!in) {
                result.warnings.push_back("source unavailable: " + path);
            } else {
                auto [start, end] = *params.line_nums;
                std::string line;
                std::string extracted;
                int line_no = 0;
                while (std::getline(in, line)) {
                    ++line_no;
                    if (line_no < start) continue;
                    if (line_no > end) break;
                    extracted += line;
                    extracted.push_back('\n');
                }
                json row;
                row["match"] = "lines";
                row["file_path"] = path;
                row["lines"] = json::array({start, end});
                row["snippet"] = extracted;
                result.results.push_back(row);
            }
        }
    }
    return result;
}

ToolResult Toolkit::fetch_node(const FetchParams& params) const {
    ToolResult result;
    if (params.code_entities.empty() && params.feature_entities.empty()) {
        result.ok = false;
        result.error = "fetch_node requires code_entities or feature_entities";
        return result;
    }
    for (const auto& text : params.code_entities) {
        auto id = resolve_code_entity(text, result.warnings);
        if (!id) continue;
        const RpgNode* node = graph_->node(*id);
        json row = node_payload(*id);
        row["preview"] = preview_of(*node, result.warnings);
        result.results.push_back(row);
    }
    for (const auto& text : params.feature_entities) {
        auto id = resolve_feature_entity(text, result.warnings);
        if (!id) continue;
        json row = node_payload(*id);
        json children = json::array();
        for (const auto& child : graph_->children_of(*id)) {
            const RpgNode* child_node = graph_->node(child);
            children.push_back(json{{"node_id", child}, {"label", node_label(*child_node)}});
        }
        row["children"] = children;
        result.results.push_back(row);
    }
    return result;
}

ToolResult Toolkit::explore_rpg(const ExploreParams& params) const {
    ToolResult result;
    if (params.direction != "upstream" && params.direction != "downstream" &&
        params.direction != "both") {
        result.ok = false;
        result.error = "direction must be upstream|downstream|both";
        return result;
    }
    if (params.traversal_depth < 1 && params.traversal_depth != -1) {
        result.ok = false;
        result.error = "traversal_depth must be >= 1 or -1 for unlimited";
        return result;
    }
    std::set<std::string> allowed_types;
    for (const auto& value : params.entity_type_filter) {
        if (value != "directory" && value != "file" && value != "class" && value != "function" &&
            value != "method") {
            result.ok = false;
            result.error = "invalid entity_type_filter value: " + value;
            return result;
        }
        allowed_types.insert(value);
    }
    std::set<DepKind> allowed_kinds;
    for (const auto& value : params.dependency_type_filter) {
        auto kind = dep_kind_from_string(value);
        if (!kind) {
            result.ok = false;
            result.error = "invalid dependency_type_filter value: " + value;
            return result;
        }
        allowed_kinds.insert(*kind);
    }

    auto type_admits = [&](const std::string& id) {
        if (allowed_types.empty()) return true;
        const RpgNode* node = graph_->node(id);
        if (!node) return false;
        if (node->kind == NodeKind::High) return allowed_types.count("directory") != 0;
        return node->entity_kind && allowed_types.count(to_string(*node->entity_kind)) != 0;
    };
    auto kind_admits = [&](DepKind kind) {
        return allowed_kinds.empty() || allowed_kinds.count(kind) != 0;
    };

    // traversal edges: dependency view plus the containment hierarchy
    std::vector<GraphDepEdge> edges = graph_->dep_edges();
    for (const auto& [id, node] : graph_->nodes()) {
        (void)node;
        for (const auto& child : graph_->children_of(id)) {
            edges.push_back({id, child, DepKind::Contains});
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::map<std::string, std::vector<std::pair<std::string, size_t>>> forward;
    std::map<std::string, std::vector<std::pair<std::string, size_t>>> backward;
    for (size_t i = 0; i < edges.size(); ++i) {
        forward[edges[i].src].emplace_back(edges[i].dst, i);
        backward[edges[i].dst].emplace_back(edges[i].src, i);
    }

    std::vector<std::string> starts;
    for (const auto& text : params.start_code_entities) {
        if (auto id = resolve_code_entity(text, result.warnings)) starts.push_back(*id);
    }
    for (const auto& text : params.start_feature_entities) {
        if (auto id = resolve_feature_entity(text, result.warnings)) starts.push_back(*id);
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    starts.erase(std::remove_if(starts.begin(), starts.end(),
                                [&](const std::string& id) { return !type_admits(id); }),
                 starts.end());
    if (starts.empty()) {
        result.ok = false;
        result.error = "no valid start entity";
        return result;
    }

    std::map<std::string, int> depth_of;
    std::deque<std::string> queue;
    for (const auto& id : starts) {
        depth_of[id] = 0;
        queue.push_back(id);
    }
    std::set<size_t> used_edges;
    while (!queue.empty()) {
        std::string current = queue.front();
        queue.pop_front();
        int depth = depth_of[current];
        if (params.traversal_depth != -1 && depth >= params.traversal_depth) continue;

        std::vector<std::pair<std::string, size_t>> nexts;
        if (params.direction == "downstream" || params.direction == "both") {
            if (auto it = forward.find(current); it != forward.end()) {
                nexts.insert(nexts.end(), it->second.begin(), it->second.end());
            }
        }
        if (params.direction == "upstream" || params.direction == "both") {
            if (auto it = backward.find(current); it != backward.end()) {
                nexts.insert(nexts.end(), it->second.begin(), it->second.end());
            }
        }
        std::sort(nexts.begin(), nexts.end());
        for (const auto& [next, edge_index] : nexts) {
            if (!kind_admits(edges[edge_index].kind)) continue;
            if (!type_admits(next)) continue;
            used_edges.insert(edge_index);
            if (depth_of.count(next) == 0) {
                depth_of[next] = depth + 1;
                queue.push_back(next);
            }
        }
    }

    json nodes = json::array();
    for (const auto& [id, depth] : depth_of) {
        json row = node_payload(id);
        row["depth"] = depth;
        nodes.push_back(row);
    }
    json edge_rows = json::array();
    for (size_t index : used_edges) {
        edge_rows.push_back(json{{"src", edges[index].src},
                                 {"dst", edges[index].dst},
                                 {"kind", to_string(edges[index].kind)}});
    }
    result.results.push_back(json{{"nodes", nodes}, {"edges", edge_rows}});
    return result;
}

json ToolResult::to_json() const {
    json out;
    out["ok"] = ok;
    if (!ok) out["error"] = error;
    out["warnings"] = warnings;
    out["results"] = results;
    return out;
}

namespace {

std::vector<std::string> string_list(const json& value) {
    std::vector<std::string> out;
    if (value.is_string()) {
        out.push_back(value.get<std::string>());
        return out;
    }
    if (value.is_array()) {
        for (const auto& item : value) {
            if (item.is_string()) out.push_back(item.get<std::string>());
        }
    }
    return out;
}

}  // namespace

json Toolkit::handle_request(const nlohmann::json& request) const {
    json reply;
    if (request.contains("id")) reply["id"] = request["id"];
    auto fail = [&](const std::string& message) {
        reply["ok"] = false;
        reply["error"] = message;
        reply["warnings"] = json::array();
        reply["results"] = json::array();
        return reply;
    };
    if (!request.is_object() || !request.contains("tool_name")) {
        return fail("request must carry tool_name");
    }
    std::string tool = request["tool_name"].get<std::string>();
    json params = request.value("parameters", json::object());
    if (!params.is_object()) {
        return fail("parameters must be an object");
    }

    auto check_keys = [&](std::initializer_list<const char*> known) -> std::optional<std::string> {
        for (const auto& [key, value] : params.items()) {
            (void)value;
            bool ok = false;
            for (const char* k : known) {
                if (key == k) { ok = true; break; }
            }
            if (!ok) return key;
        }
        return std::nullopt;
    };

    ToolResult result;
    if (tool == "SearchNode") {
        if (auto bad = check_keys({"mode", "feature_terms", "search_scopes", "search_terms",
                                   "line_nums", "file_path_or_pattern"})) {
            return fail("unknown parameter: " + *bad);
        }
        SearchParams sp;
        sp.mode = params.value("mode", "");
        sp.feature_terms = string_list(params.value("feature_terms", json::array()));
        sp.search_scopes = string_list(params.value("search_scopes", json::array()));
        sp.search_terms = string_list(params.value("search_terms", json::array()));
        if (params.contains("line_nums") && params["line_nums"].is_array() &&
            params["line_nums"].size() == 2) {
            sp.line_nums = {params["line_nums"][0].get<int>(), params["line_nums"][1].get<int>()};
        }
        sp.file_path_or_pattern = params.value("file_path_or_pattern", std::string("**/*.py"));
        result = search_node(sp);
    } else if (tool == "FetchNode") {
        if (auto bad = check_keys({"code_entities", "feature_entities"})) {
            return fail("unknown parameter: " + *bad);
        }
        FetchParams fp;
        fp.code_entities = string_list(params.value("code_entities", json::array()));
        fp.feature_entities = string_list(params.value("feature_entities", json::array()));
        result = fetch_node(fp);
    } else if (tool == "ExploreRPG") {
        if (auto bad = check_keys({"start_code_entities", "start_feature_entities", "direction",
                                   "traversal_depth", "entity_type_filter",
                                   "dependency_type_filter"})) {
            return fail("unknown parameter: " + *bad);
        }
        ExploreParams ep;
        ep.start_code_entities = string_list(params.value("start_code_entities", json::array()));
        ep.start_feature_entities =
            string_list(params.value("start_feature_entities", json::array()));
        ep.direction = params.value("direction", std::string("downstream"));
        if (params.contains("traversal_depth") && params["traversal_depth"].is_number()) {
            ep.traversal_depth = params["traversal_depth"].get<int>();
        }
        ep.entity_type_filter = string_list(params.value("entity_type_filter", json::array()));
        ep.dependency_type_filter =
            string_list(params.value("dependency_type_filter", json::array()));
        result = explore_rpg(ep);
    } else {
        return fail("unknown tool: " + tool);
    }

    json out = result.to_json();
    if (request.contains("id")) out["id"] = request["id"];
    out["tool_name"] = tool;
    return out;
}

void Toolkit::service_loop(std::istream& in, std::ostream& out) const {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json request = json::parse(line, nullptr, false);
        json reply;
        if (request.is_discarded()) {
            reply["ok"] = false;
            reply["error"] = "invalid JSON request";
            reply["warnings"] = json::array();
            reply["results"] = json::array();
        } else {
            reply = handle_request(request);
        }
        out << reply.dump() << "\n";
        out.flush();
    }
}

}  // namespace rpg
