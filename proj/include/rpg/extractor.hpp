#pragma once

#include <string>
#include <vector>

#include "rpg/code_index.hpp"
#include "rpg/graph.hpp"
#include "rpg/provider.hpp"

namespace rpg {

struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_name(stage) {}
    std::string stage_name;
};

// Phase 1: lift every scanned entity into a low-level node with parsed
// features; file features are synthesized from their members. Files become
// unrooted until Phase 2 assigns their abstract chain.
RpgGraph phase1_lift(const EntitySet& es, SemanticProvider& provider);

// Phase 2: discover areas from file-level summaries only, assign each
// top-level directory group a three-level path and re-root the files.
void phase2_reorganize(RpgGraph& g, SemanticProvider& provider);

// Phase 3: bottom-up coverage propagation + trie LCA grounding, then
// dependency edges from the entity set.
void phase3_ground(RpgGraph& g, const EntitySet& es, int min_scope_depth = 1);

// Recomputes grounded scopes for every high node from current placement.
void refresh_grounding(RpgGraph& g, int min_scope_depth = 1);

struct BuildOutput {
    RpgGraph graph;
    EntitySet entities;
    std::vector<Diagnostic> diagnostics;
};

BuildOutput build(const std::string& root, SemanticProvider& provider, int min_scope_depth = 1,
                  const std::vector<std::string>& include_globs = {},
                  const std::vector<std::string>& exclude_globs = {});

// Node id helpers shared with evolution.
std::string node_id_for(const EntityRef& entity);
NodeLevel node_level_for(EntityKind kind);

// Lines [span.start, span.end] of `source`, 1-based inclusive.
std::string slice_lines(const std::string& source, Span span);

}  // namespace rpg
