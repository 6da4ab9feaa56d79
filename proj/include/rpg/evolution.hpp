#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rpg/code_index.hpp"
#include "rpg/graph.hpp"
#include "rpg/provider.hpp"

namespace rpg {

enum class ChangeKind { Insert, Delete, Modify };

std::string to_string(ChangeKind kind);

// Entity-level change derived from a commit diff: post-state entity for
// inserts/modifies, pre-state entity for deletes.
struct ChangeEvent {
    ChangeKind kind = ChangeKind::Modify;
    EntityRef entity;
    std::optional<std::string> new_source;

    bool operator==(const ChangeEvent&) const = default;
};

struct UpdateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UpdateReport {
    int deletes_applied = 0;
    int modifies_applied = 0;
    int inserts_applied = 0;
    std::vector<std::string> pruned_nodes;
    std::vector<std::string> rerouted_nodes;
    StageCounters token_delta;
    int dep_edges_added = 0;
    int dep_edges_removed = 0;
    std::vector<Diagnostic> diagnostics;
};

struct EvolutionOptions {
    double tau_drift = 0.5;
    int min_scope_depth = 1;
};

// Maps diff hunks to entity-level events via innermost-span lookup; file
// additions/removals expand to events for the file and all its entities.
// Events come out deduplicated, ordered deletes -> modifies -> inserts.
std::vector<ChangeEvent> parse_diff(const std::string& diff_text, const EntitySet& before,
                                    const EntitySet& after);

// Removes the node's subtree and every incident edge in both views, then
// prunes emptied abstract ancestors (area roots are never pruned). An
// unknown id leaves the graph untouched.
void delete_node(RpgGraph& g, const std::string& id, UpdateReport* report = nullptr);

// Re-parses features for the modified entities of one file, gates on drift
// (strictly above tau re-routes as delete + insert), and re-synthesizes the
// file summary from its updated children.
void process_modification(RpgGraph& g, const std::string& path,
                          const std::vector<ChangeEvent>& events, SemanticProvider& provider,
                          const EvolutionOptions& options, UpdateReport* report = nullptr);

// Semantic-routing insertion: files route down the abstract hierarchy from
// the best-fitting area; classes/functions/methods attach under their
// syntactic parent directly.
void insert_node(RpgGraph& g, const ChangeEvent& event, SemanticProvider& provider,
                 const EvolutionOptions& options, UpdateReport* report = nullptr);

// Applies one commit transactionally: deletes, modifications, inserts, a
// localized dependency refresh over changed files and their dependents, and
// a grounding refresh. Throws UpdateError (leaving `g` untouched) when the
// updated graph fails validation.
std::pair<RpgGraph, UpdateReport> apply_commit(const RpgGraph& g, const std::string& diff_text,
                                               const EntitySet& before, const EntitySet& after,
                                               SemanticProvider& provider,
                                               const EvolutionOptions& options = {});

}  // namespace rpg
