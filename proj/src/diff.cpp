#include "rpg/diff.hpp"

#include <sstream>

namespace rpg {

namespace {

std::string strip_prefix(const std::string& path) {
    if (path == "/dev/null") return "";
    if (path.rfind("a/", 0) == 0 || path.rfind("b/", 0) == 0) {
        return path.substr(2);
    }
    return path;
}

std::string first_token(const std::string& line) {
    size_t start = line.find_first_not_of(' ');
    if (start == std::string::npos) return "";
    size_t end = line.find_first_of(" \t", start);
    return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

bool parse_range(const std::string& text, int& start, int& count) {
    // "-12,3" / "+12" forms, sign already stripped by caller
    size_t comma = text.find(',');
    try {
        start = std::stoi(comma == std::string::npos ? text : text.substr(0, comma));
        count = comma == std::string::npos ? 1 : std::stoi(text.substr(comma + 1));
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

}  // namespace

std::vector<FileDiff> parse_unified_diff(const std::string& text) {
    std::vector<FileDiff> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    FileDiff* current = nullptr;
    int old_line = 0;
    int new_line = 0;
    int old_remaining = 0;
    int new_remaining = 0;
    bool in_hunk = false;

    auto require_file = [&]() -> FileDiff& {
        if (!current) throw DiffError("hunk outside of file header at line " + std::to_string(line_no));
        return *current;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        if (line.rfind("diff ", 0) == 0) {
            out.emplace_back();
            current = &out.back();
            in_hunk = false;
            continue;
        }
        if (line.rfind("--- ", 0) == 0) {
            if (!current) {
                out.emplace_back();
                current = &out.back();
            }
            current->old_path = strip_prefix(first_token(line.substr(4)));
            in_hunk = false;
            continue;
        }
        if (line.rfind("+++ ", 0) == 0) {
            require_file().new_path = strip_prefix(first_token(line.substr(4)));
            in_hunk = false;
            continue;
        }
        if (line.rfind("@@", 0) == 0) {
            size_t close = line.find("@@", 2);
            if (close == std::string::npos) {
                throw DiffError("malformed hunk header at line " + std::to_string(line_no));
            }
            std::istringstream header(line.substr(2, close - 2));
            std::string old_part;
            std::string new_part;
            header >> old_part >> new_part;
            DiffHunk hunk;
            if (old_part.size() < 2 || old_part[0] != '-' || new_part.size() < 2 ||
                new_part[0] != '+' || !parse_range(old_part.substr(1), hunk.old_start, hunk.old_count) ||
                !parse_range(new_part.substr(1), hunk.new_start, hunk.new_count)) {
                throw DiffError("malformed hunk header at line " + std::to_string(line_no));
            }
            require_file().hunks.push_back(hunk);
            old_line = hunk.old_start;
            new_line = hunk.new_start;
            old_remaining = hunk.old_count;
            new_remaining = hunk.new_count;
            in_hunk = true;
            continue;
        }
        if (!in_hunk) continue;  // index lines, mode lines, etc.
        if (line.empty()) {
            // blank context line with stripped trailing space
            if (old_remaining > 0) { ++old_line; --old_remaining; }
            if (new_remaining > 0) { ++new_line; --new_remaining; }
            continue;
        }
        switch (line[0]) {
            case ' ':
                ++old_line; --old_remaining;
                ++new_line; --new_remaining;
                break;
            case '-':
                require_file().old_touched.push_back(old_line);
                ++old_line; --old_remaining;
                break;
            case '+':
                require_file().new_touched.push_back(new_line);
                ++new_line; --new_remaining;
                break;
            case '\\':
                break;  // "\ No newline at end of file"
            default:
                throw DiffError("unexpected hunk content at line " + std::to_string(line_no));
        }
        if (old_remaining <= 0 && new_remaining <= 0) in_hunk = false;
    }
    return out;
}

}  // namespace rpg
