#include "rpg/grounding.hpp"

#include <map>
#include <memory>

namespace rpg {

namespace {

struct TrieNode {
    std::map<std::string, std::unique_ptr<TrieNode>> children;
    bool terminal = false;
};

void insert_path(TrieNode& root, const std::vector<std::string>& segments) {
    TrieNode* node = &root;
    for (const auto& seg : segments) {
        auto& child = node->children[seg];
        if (!child) {
            child = std::make_unique<TrieNode>();
        }
        node = child.get();
    }
    node->terminal = true;
}

std::string join_segments(const std::vector<std::string>& segments) {
    std::string out;
    for (const auto& seg : segments) {
        if (!out.empty()) out.push_back('/');
        out += seg;
    }
    return out;
}

void emit_scopes(const TrieNode& node, std::vector<std::string>& prefix, int min_depth,
                 std::set<std::string>& out) {
    int depth = static_cast<int>(prefix.size());
    if (depth >= min_depth) {
        out.insert(join_segments(prefix));
        return;
    }
    if (node.terminal) {
        // A terminal above min depth (in practice: the repository root)
        // cannot be covered by anything deeper; emit it to keep coverage.
        out.insert(join_segments(prefix));
        return;
    }
    for (const auto& [seg, child] : node.children) {
        prefix.push_back(seg);
        emit_scopes(*child, prefix, min_depth, out);
        prefix.pop_back();
    }
}

}  // namespace

bool scope_covers(const std::string& scope, const std::string& dir) {
    if (scope.empty()) return true;
    if (dir.size() < scope.size()) return false;
    if (dir.compare(0, scope.size(), scope) != 0) return false;
    return dir.size() == scope.size() || dir[scope.size()] == '/';
}

std::vector<std::string> split_path_segments(const std::string& path) {
    std::vector<std::string> segments;
    std::string current;
    for (char c : path) {
        if (c == '/') {
            if (!current.empty()) {
                segments.push_back(current);
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) segments.push_back(current);
    return segments;
}

GroundedScopes compute_lca(const std::set<std::string>& dirs, int min_scope_depth) {
    GroundedScopes result;
    if (dirs.empty()) {
        return result;
    }
    TrieNode root;
    for (const auto& dir : dirs) {
        if (!dir.empty() && (dir.front() == '/' || dir.front() == '\\')) {
            throw GroundingError("absolute path not allowed: " + dir);
        }
        auto segments = split_path_segments(dir);
        for (const auto& seg : segments) {
            if (seg == "." || seg == "..") {
                throw GroundingError("path escapes scope root: " + dir);
            }
        }
        insert_path(root, segments);
    }

    // Walk down the unique spine until the structure branches or ends.
    const TrieNode* node = &root;
    std::vector<std::string> prefix;
    while (!node->terminal && node->children.size() == 1) {
        const auto& [seg, child] = *node->children.begin();
        prefix.push_back(seg);
        node = child.get();
    }
    emit_scopes(*node, prefix, min_scope_depth, result.scopes);
    return result;
}

}  // namespace rpg
