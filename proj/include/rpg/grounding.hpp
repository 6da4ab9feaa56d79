#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpg {

// Minimal antichain of directory paths covering a set of leaf directories.
struct GroundedScopes {
    std::set<std::string> scopes;

    bool operator==(const GroundedScopes&) const = default;
};

struct GroundingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// True when `scope` is `dir` itself or a path prefix of it on a segment
// boundary. The empty scope denotes the repository root and covers any dir.
bool scope_covers(const std::string& scope, const std::string& dir);

// Collapses a set of relative directory paths into grounded scopes via a
// prefix trie: descend from the root through single-child non-terminal
// chains; the first terminal-or-branching node becomes the scope when its
// depth reaches `min_scope_depth`, otherwise each child is emitted instead.
// Rejects absolute paths and paths containing "." / ".." segments.
GroundedScopes compute_lca(const std::set<std::string>& dirs, int min_scope_depth = 1);

std::vector<std::string> split_path_segments(const std::string& path);

}  // namespace rpg
