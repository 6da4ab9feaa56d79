#include "rpg/entity.hpp"

#include <algorithm>

namespace rpg {

std::string to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::Directory: return "directory";
        case EntityKind::File: return "file";
        case EntityKind::Class: return "class";
        case EntityKind::Function: return "function";
        case EntityKind::Method: return "method";
    }
    return "unknown";
}

std::optional<EntityKind> entity_kind_from_string(const std::string& name) {
    if (name == "directory") return EntityKind::Directory;
    if (name == "file") return EntityKind::File;
    if (name == "class") return EntityKind::Class;
    if (name == "function") return EntityKind::Function;
    if (name == "method") return EntityKind::Method;
    return std::nullopt;
}

std::string to_string(DepKind kind) {
    switch (kind) {
        case DepKind::Composes: return "composes";
        case DepKind::Contains: return "contains";
        case DepKind::Inherits: return "inherits";
        case DepKind::Invokes: return "invokes";
        case DepKind::Imports: return "imports";
    }
    return "unknown";
}

std::optional<DepKind> dep_kind_from_string(const std::string& name) {
    if (name == "composes") return DepKind::Composes;
    if (name == "contains") return DepKind::Contains;
    if (name == "inherits") return DepKind::Inherits;
    if (name == "invokes") return DepKind::Invokes;
    if (name == "imports") return DepKind::Imports;
    return std::nullopt;
}

std::strong_ordering EntityRef::operator<=>(const EntityRef& other) const {
    if (auto c = path <=> other.path; c != 0) return c;
    if (auto c = span.start <=> other.span.start; c != 0) return c;
    // outermost (larger) span first, so files precede their members
    if (auto c = other.span.end <=> span.end; c != 0) return c;
    if (auto c = kind <=> other.kind; c != 0) return c;
    return qualified_name <=> other.qualified_name;
}

std::string EntityRef::key() const {
    if (!qualified_name) return path;
    return path + ":" + *qualified_name;
}

const FileRecord* EntitySet::file(const std::string& path) const {
    auto it = files.find(path);
    return it == files.end() ? nullptr : &it->second;
}

const EntityRef* EntitySet::find(const std::string& path,
                                 const std::optional<std::string>& qualified,
                                 EntityKind kind) const {
    for (const auto& e : entities) {
        if (e.path == path && e.kind == kind && e.qualified_name == qualified) {
            return &e;
        }
    }
    return nullptr;
}

std::vector<const EntityRef*> EntitySet::entities_in(const std::string& path) const {
    std::vector<const EntityRef*> out;
    for (const auto& e : entities) {
        if (e.path == path) out.push_back(&e);
    }
    return out;
}

}  // namespace rpg
