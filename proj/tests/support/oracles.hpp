#pragma once

// Independent reference implementations used to cross-check the library:
// deliberately written from the definitions, not from the production code.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rpg/evalkit.hpp"

namespace oracle {

// ---- grounded-scope oracle -------------------------------------------------
//
// Characterization of the trie walk via plain segment arithmetic: the longest
// common segment prefix of all inputs when it is deep enough, otherwise the
// distinct prefixes one segment below the point where the inputs diverge.

inline std::vector<std::string> segments_of(const std::string& path) {
    std::vector<std::string> out;
    std::string current;
    for (char c : path) {
        if (c == '/') {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

inline std::string join_segments(const std::vector<std::string>& segments, size_t count) {
    std::string out;
    for (size_t i = 0; i < count && i < segments.size(); ++i) {
        if (!out.empty()) out.push_back('/');
        out += segments[i];
    }
    return out;
}

inline std::set<std::string> scope_oracle(const std::set<std::string>& dirs, int min_depth) {
    std::set<std::string> result;
    if (dirs.empty()) return result;

    std::vector<std::vector<std::string>> paths;
    for (const auto& dir : dirs) paths.push_back(segments_of(dir));

    // longest common prefix, clipped at the shortest terminal
    size_t lcp = paths.front().size();
    for (const auto& p : paths) {
        size_t i = 0;
        while (i < lcp && i < p.size() && p[i] == paths.front()[i]) ++i;
        lcp = std::min(lcp, i);
        lcp = std::min(lcp, p.size());
    }

    std::function<void(std::vector<std::string>, size_t)> emit =
        [&](std::vector<std::string> prefix, size_t depth) {
            if (static_cast<int>(depth) >= min_depth) {
                result.insert(join_segments(prefix, depth));
                return;
            }
            // emit each distinct (depth+1)-segment extension present
            bool any_terminal_here = false;
            std::set<std::string> next;
            for (const auto& p : paths) {
                bool extends = p.size() > depth;
                bool matches = true;
                for (size_t i = 0; i < depth && matches; ++i) matches = p[i] == prefix[i];
                if (!matches) continue;
                if (extends) {
                    next.insert(p[depth]);
                } else {
                    any_terminal_here = true;
                }
            }
            if (any_terminal_here || next.empty()) {
                // an input terminates above min depth; it can only cover itself
                result.insert(join_segments(prefix, depth));
                return;
            }
            for (const auto& seg : next) {
                auto extended = prefix;
                extended.push_back(seg);
                emit(extended, depth + 1);
            }
        };

    emit({paths.front().begin(), paths.front().begin() + static_cast<long>(lcp)}, lcp);
    return result;
}

inline bool covers(const std::string& scope, const std::string& dir) {
    if (scope.empty()) return true;
    if (dir.size() < scope.size() || dir.compare(0, scope.size(), scope) != 0) return false;
    return dir.size() == scope.size() || dir[scope.size()] == '/';
}

inline bool is_covering_antichain(const std::set<std::string>& scopes,
                                  const std::set<std::string>& dirs) {
    for (auto a = scopes.begin(); a != scopes.end(); ++a) {
        for (auto b = std::next(a); b != scopes.end(); ++b) {
            if (covers(*a, *b) || covers(*b, *a)) return false;
        }
    }
    for (const auto& dir : dirs) {
        bool covered = false;
        for (const auto& scope : scopes) {
            if (covers(scope, dir)) {
                covered = true;
                break;
            }
        }
        if (!covered) return false;
    }
    return true;
}

// ---- traversal oracle --------------------------------------------------------
//
// Frontier-expansion reachability over an explicit edge list; recomputed from
// scratch each round rather than with a queue.

struct OracleEdge {
    std::string src;
    std::string dst;
    std::string kind;
};

struct TraversalExpect {
    std::map<std::string, int> depth_of;
    std::set<std::pair<std::string, std::string>> edges;  // (src, dst)
};

inline TraversalExpect bfs_oracle(const std::vector<OracleEdge>& edges,
                                  const std::vector<std::string>& starts,
                                  const std::string& direction, int max_depth,
                                  const std::set<std::string>& allowed_kinds,
                                  const std::map<std::string, std::string>& node_types,
                                  const std::set<std::string>& allowed_types) {
    auto type_ok = [&](const std::string& id) {
        if (allowed_types.empty()) return true;
        auto it = node_types.find(id);
        return it != node_types.end() && allowed_types.count(it->second) != 0;
    };
    auto kind_ok = [&](const std::string& kind) {
        return allowed_kinds.empty() || allowed_kinds.count(kind) != 0;
    };

    TraversalExpect expect;
    for (const auto& start : starts) {
        if (type_ok(start)) expect.depth_of[start] = 0;
    }
    bool grew = true;
    int depth = 0;
    while (grew && (max_depth == -1 || depth < max_depth)) {
        grew = false;
        ++depth;
        std::map<std::string, int> additions;
        for (const auto& edge : edges) {
            if (!kind_ok(edge.kind)) continue;
            bool down = direction == "downstream" || direction == "both";
            bool up = direction == "upstream" || direction == "both";
            if (down) {
                auto it = expect.depth_of.find(edge.src);
                if (it != expect.depth_of.end() && it->second == depth - 1 && type_ok(edge.dst) &&
                    expect.depth_of.count(edge.dst) == 0) {
                    additions.emplace(edge.dst, depth);
                }
            }
            if (up) {
                auto it = expect.depth_of.find(edge.dst);
                if (it != expect.depth_of.end() && it->second == depth - 1 && type_ok(edge.src) &&
                    expect.depth_of.count(edge.src) == 0) {
                    additions.emplace(edge.src, depth);
                }
            }
        }
        for (const auto& [id, d] : additions) {
            expect.depth_of.emplace(id, d);
            grew = true;
        }
    }
    // traversed edges: admissible edges followed from an expanded endpoint
    for (const auto& edge : edges) {
        if (!kind_ok(edge.kind)) continue;
        bool down = direction == "downstream" || direction == "both";
        bool up = direction == "upstream" || direction == "both";
        auto expanded = [&](const std::string& id) {
            auto it = expect.depth_of.find(id);
            if (it == expect.depth_of.end()) return false;
            return max_depth == -1 || it->second < max_depth;
        };
        bool used = false;
        if (down && expanded(edge.src) && type_ok(edge.dst) &&
            expect.depth_of.count(edge.dst) != 0) {
            used = true;
        }
        if (up && expanded(edge.dst) && type_ok(edge.src) &&
            expect.depth_of.count(edge.src) != 0) {
            used = true;
        }
        if (used) expect.edges.insert({edge.src, edge.dst});
    }
    return expect;
}

// ---- metrics oracle ----------------------------------------------------------

inline double naive_acc_at_k(const std::vector<rpg::LocalizationInstance>& instances, int k) {
    double total = 0.0;
    for (const auto& instance : instances) {
        bool hit = false;
        for (int j = 0; j < k && j < static_cast<int>(instance.predictions.size()); ++j) {
            for (const auto& g : instance.gold) {
                if (g == instance.predictions[static_cast<size_t>(j)]) hit = true;
            }
        }
        total += hit ? 1.0 : 0.0;
    }
    return total / static_cast<double>(instances.size());
}

inline double naive_precision(const std::vector<rpg::LocalizationInstance>& instances) {
    double total = 0.0;
    for (const auto& instance : instances) {
        if (instance.predictions.empty()) continue;
        int hits = 0;
        for (const auto& p : instance.predictions) {
            for (const auto& g : instance.gold) {
                if (g == p) { ++hits; break; }
            }
        }
        total += static_cast<double>(hits) / static_cast<double>(instance.predictions.size());
    }
    return total / static_cast<double>(instances.size());
}

inline double naive_recall(const std::vector<rpg::LocalizationInstance>& instances) {
    double total = 0.0;
    for (const auto& instance : instances) {
        if (instance.gold.empty()) continue;
        int hits = 0;
        for (const auto& p : instance.predictions) {
            for (const auto& g : instance.gold) {
                if (g == p) { ++hits; break; }
            }
        }
        total += static_cast<double>(hits) / static_cast<double>(instance.gold.size());
    }
    return total / static_cast<double>(instances.size());
}

}  // namespace oracle
