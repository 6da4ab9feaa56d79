#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rpg/python_scanner.hpp"

namespace rpg {

enum class EntityKind { Directory, File, Class, Function, Method };

std::string to_string(EntityKind kind);
std::optional<EntityKind> entity_kind_from_string(const std::string& name);

// 1-based inclusive line range.
struct Span {
    int start = 0;
    int end = 0;

    auto operator<=>(const Span&) const = default;
    bool contains(int line) const { return start <= line && line <= end; }
};

struct EntityRef {
    std::string path;  // repo-relative, '/'-separated
    std::optional<std::string> qualified_name;
    EntityKind kind = EntityKind::File;
    Span span;

    bool operator==(const EntityRef&) const = default;
    // Canonical order: path, then span start, outermost first.
    std::strong_ordering operator<=>(const EntityRef& other) const;

    // "path" for files, "path:qualified_name" otherwise.
    std::string key() const;
};

enum class DepKind { Composes, Contains, Inherits, Invokes, Imports };

std::string to_string(DepKind kind);
std::optional<DepKind> dep_kind_from_string(const std::string& name);

struct DepEdge {
    EntityRef src;
    EntityRef dst;
    DepKind kind = DepKind::Contains;

    bool operator==(const DepEdge&) const = default;
    std::strong_ordering operator<=>(const DepEdge&) const = default;
};

struct Diagnostic {
    std::string path;
    std::string issue;
};

struct FileRecord {
    std::string path;
    std::string source;
    bool parse_error = false;
    PyFileParse parse;  // syntax-level facts used by dependency extraction
};

struct EntitySet {
    std::vector<EntityRef> entities;  // canonical order
    std::vector<DepEdge> dep_edges;   // `contains` after scan; full set after extract_dependencies
    std::map<std::string, FileRecord> files;
    std::vector<Diagnostic> diagnostics;
    int unresolved_references = 0;

    const FileRecord* file(const std::string& path) const;
    const EntityRef* find(const std::string& path, const std::optional<std::string>& qualified,
                          EntityKind kind) const;
    std::vector<const EntityRef*> entities_in(const std::string& path) const;
};

}  // namespace rpg
