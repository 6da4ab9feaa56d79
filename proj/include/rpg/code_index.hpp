#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpg/entity.hpp"

namespace rpg {

struct ScanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scans a repository checkout into entities plus `contains` edges. Files the
// scanner cannot parse are kept as file entities flagged with a parse error
// and contribute no children. Unreadable files become diagnostics entries.
EntitySet scan_repository(const std::string& root,
                          const std::vector<std::string>& include_globs = {},
                          const std::vector<std::string>& exclude_globs = {});

struct DependencyAnalysis {
    std::vector<DepEdge> edges;
    int unresolved = 0;
};

// Lexical single-hop reference resolution over a scanned entity set.
// Resolves imports to intra-repo files, calls/bases/compositions to
// module-level symbols of the local file or of imported modules.
class Resolver {
public:
    explicit Resolver(const EntitySet& es);
    ~Resolver();

    Resolver(const Resolver&) = delete;
    Resolver& operator=(const Resolver&) = delete;

    // Dependency edges whose source lies in `path` (deduplicated, sorted).
    DependencyAnalysis file_dependencies(const std::string& path) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Imports / invokes / inherits / composes edges for the whole entity set.
DependencyAnalysis extract_dependencies(const EntitySet& es);

// Appends the extracted edges onto es.dep_edges and records the tally.
void inject_dependencies(EntitySet& es);

struct EntityLookup {
    std::optional<EntityRef> entity;
    bool known_path = false;
};

// Innermost entity whose span contains `line`, falling back to the file
// entity for lines outside any definition.
EntityLookup entity_at(const EntitySet& es, const std::string& path, int line);

// Shell-style glob matching with `**` crossing directory separators.
bool glob_match(const std::string& pattern, const std::string& path);

}  // namespace rpg
