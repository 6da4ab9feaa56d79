#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rpg {

struct DiffError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DiffHunk {
    int old_start = 0;
    int old_count = 0;
    int new_start = 0;
    int new_count = 0;
};

struct FileDiff {
    std::string old_path;  // empty when the file was added
    std::string new_path;  // empty when the file was deleted
    std::vector<DiffHunk> hunks;
    std::vector<int> old_touched;  // removed line numbers (pre-image)
    std::vector<int> new_touched;  // added line numbers (post-image)

    bool added() const { return old_path.empty(); }
    bool deleted() const { return new_path.empty(); }
};

// Parses standard unified-diff text ("--- a/x", "+++ b/x", "@@ -a,b +c,d @@"
// hunks). Throws DiffError with the offending line number.
std::vector<FileDiff> parse_unified_diff(const std::string& text);

}  // namespace rpg
