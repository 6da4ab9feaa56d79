#include "rpg/code_index.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace rpg {

namespace {

std::string to_regex(const std::string& glob) {
    std::string out;
    for (size_t i = 0; i < glob.size(); ++i) {
        char c = glob[i];
        if (c == '*') {
            if (i + 1 < glob.size() && glob[i + 1] == '*') {
                // "**/" may match nothing at all
                if (i + 2 < glob.size() && glob[i + 2] == '/') {
                    out += "(?:.*/)?";
                    i += 2;
                } else {
                    out += ".*";
                    ++i;
                }
            } else {
                out += "[^/]*";
            }
        } else if (c == '?') {
            out += "[^/]";
        } else if (std::string(".^$+()[]{}|\\").find(c) != std::string::npos) {
            out += '\\';
            out += c;
        } else {
            out += c;
        }
    }
    return out;
}

std::vector<std::string> split_dotted(const std::string& dotted) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : dotted) {
        if (c == '.') {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    return parts;
}

std::string dirname_of(const std::string& path) {
    size_t pos = path.rfind('/');
    return pos == std::string::npos ? std::string() : path.substr(0, pos);
}

EntityKind to_entity_kind(PyEntityKind kind) {
    switch (kind) {
        case PyEntityKind::Class: return EntityKind::Class;
        case PyEntityKind::Method: return EntityKind::Method;
        case PyEntityKind::Function: return EntityKind::Function;
    }
    return EntityKind::Function;
}

}  // namespace

bool glob_match(const std::string& pattern, const std::string& path) {
    static std::map<std::string, std::regex> cache;
    auto it = cache.find(pattern);
    if (it == cache.end()) {
        it = cache.emplace(pattern, std::regex("^" + to_regex(pattern) + "$")).first;
    }
    return std::regex_match(path, it->second);
}

EntitySet scan_repository(const std::string& root, const std::vector<std::string>& include_globs,
                          const std::vector<std::string>& exclude_globs) {
    fs::path root_path(root);
    if (!fs::exists(root_path) || !fs::is_directory(root_path)) {
        throw ScanError("repository root missing or not a directory: " + root);
    }
    std::vector<std::string> includes = include_globs;
    if (includes.empty()) {
        includes.push_back("**/*.py");
    }

    std::vector<std::string> paths;
    for (const auto& entry : fs::recursive_directory_iterator(root_path)) {
        if (!entry.is_regular_file()) continue;
        std::string rel = fs::relative(entry.path(), root_path).generic_string();
        bool included = std::any_of(includes.begin(), includes.end(),
                                    [&](const auto& g) { return glob_match(g, rel); });
        bool excluded = std::any_of(exclude_globs.begin(), exclude_globs.end(),
                                    [&](const auto& g) { return glob_match(g, rel); });
        if (included && !excluded) {
            paths.push_back(rel);
        }
    }
    std::sort(paths.begin(), paths.end());

    EntitySet es;
    for (const auto& rel : paths) {
        std::ifstream in(root_path / rel, std::ios::binary);
        if (!in) {
            es.diagnostics.push_back({rel, "unreadable file"});
            continue;
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();

        FileRecord record;
        record.path = rel;
        record.source = buffer.str();
        record.parse = parse_python_source(record.source);
        record.parse_error = !record.parse.ok;
        if (record.parse_error) {
            es.diagnostics.push_back({rel, "parse error: " + record.parse.error});
        }

        EntityRef file_entity{rel, std::nullopt, EntityKind::File,
                              {1, std::max(1, record.parse.line_count)}};
        es.entities.push_back(file_entity);
        if (!record.parse_error) {
            for (const auto& py : record.parse.entities) {
                EntityRef ref{rel, py.qualified_name, to_entity_kind(py.kind),
                              {py.start_line, py.end_line}};
                es.entities.push_back(ref);
                EntityRef parent =
                    py.parent < 0
                        ? file_entity
                        : EntityRef{rel, record.parse.entities[static_cast<size_t>(py.parent)].qualified_name,
                                    to_entity_kind(record.parse.entities[static_cast<size_t>(py.parent)].kind),
                                    {record.parse.entities[static_cast<size_t>(py.parent)].start_line,
                                     record.parse.entities[static_cast<size_t>(py.parent)].end_line}};
                es.dep_edges.push_back({parent, ref, DepKind::Contains});
            }
        }
        es.files.emplace(rel, std::move(record));
    }
    std::sort(es.entities.begin(), es.entities.end());
    std::sort(es.dep_edges.begin(), es.dep_edges.end());
    return es;
}

struct Resolver::Impl {
    const EntitySet* es = nullptr;
    // dotted module -> file path
    std::map<std::string, std::string> modules;
    // file -> module-level symbol -> entity
    std::map<std::string, std::map<std::string, EntityRef>> top_level;
    // file -> class name -> method name -> entity
    std::map<std::string, std::map<std::string, std::map<std::string, EntityRef>>> methods;

    std::optional<std::string> module_file(const std::string& dotted) const {
        auto it = modules.find(dotted);
        return it == modules.end() ? std::nullopt : std::optional(it->second);
    }

    const EntityRef* symbol(const std::string& file, const std::string& name) const {
        auto f = top_level.find(file);
        if (f == top_level.end()) return nullptr;
        auto s = f->second.find(name);
        return s == f->second.end() ? nullptr : &s->second;
    }

    const EntityRef* method(const std::string& file, const std::string& cls,
                            const std::string& name) const {
        auto f = methods.find(file);
        if (f == methods.end()) return nullptr;
        auto c = f->second.find(cls);
        if (c == f->second.end()) return nullptr;
        auto m = c->second.find(name);
        return m == c->second.end() ? nullptr : &m->second;
    }

    // Resolves a dotted module reference, honoring relative import levels.
    std::optional<std::string> resolve_module_path(const std::string& importer,
                                                   const std::string& dotted, int level) const {
        if (level == 0) {
            return module_file(dotted);
        }
        std::string base = dirname_of(importer);
        for (int i = 1; i < level; ++i) {
            if (base.empty()) return std::nullopt;
            base = dirname_of(base);
        }
        std::string combined = base;
        if (!dotted.empty()) {
            std::string as_path = dotted;
            std::replace(as_path.begin(), as_path.end(), '.', '/');
            combined = combined.empty() ? as_path : combined + "/" + as_path;
        }
        if (combined.empty()) return std::nullopt;
        std::string as_dotted = combined;
        std::replace(as_dotted.begin(), as_dotted.end(), '/', '.');
        return module_file(as_dotted);
    }
};

Resolver::Resolver(const EntitySet& es) : impl_(std::make_unique<Impl>()) {
    impl_->es = &es;
    for (const auto& [path, record] : es.files) {
        std::string dotted;
        std::string stem = path;
        if (stem.size() > 3 && stem.compare(stem.size() - 3, 3, ".py") == 0) {
            stem.resize(stem.size() - 3);
        }
        if (stem == "__init__" ||
            (stem.size() >= 9 && stem.compare(stem.size() - 9, 9, "/__init__") == 0)) {
            dotted = stem == "__init__" ? "" : stem.substr(0, stem.size() - 9);
        } else {
            dotted = stem;
        }
        std::replace(dotted.begin(), dotted.end(), '/', '.');
        if (!dotted.empty()) {
            impl_->modules.emplace(dotted, path);
        }
    }
    for (const auto& e : es.entities) {
        if (!e.qualified_name) continue;
        const std::string& q = *e.qualified_name;
        size_t dot = q.find('.');
        if (dot == std::string::npos) {
            impl_->top_level[e.path].emplace(q, e);
        } else if (e.kind == EntityKind::Method && q.rfind('.') == dot) {
            impl_->methods[e.path][q.substr(0, dot)].emplace(q.substr(dot + 1), e);
        }
    }
}

Resolver::~Resolver() = default;

namespace {

struct Alias {
    std::string file;
    std::optional<std::string> entity;  // module-level symbol in `file`
};

}  // namespace

DependencyAnalysis Resolver::file_dependencies(const std::string& path) const {
    DependencyAnalysis out;
    const auto& ctx = *impl_;
    const EntitySet& es = *ctx.es;
    const FileRecord* record = es.file(path);
    if (!record || record->parse_error) {
        return out;
    }
    const PyFileParse& parse = record->parse;
    const EntityRef* file_entity = es.find(path, std::nullopt, EntityKind::File);
    if (!file_entity) return out;

    std::set<DepEdge> edges;
    std::map<std::string, Alias> aliases;

    auto entity_ref = [&](int index) -> EntityRef {
        if (index < 0) return *file_entity;
        const auto& py = parse.entities[static_cast<size_t>(index)];
        return EntityRef{path, py.qualified_name, to_entity_kind(py.kind),
                         {py.start_line, py.end_line}};
    };

    // imports: aliases + file->file edges
    for (const auto& imp : parse.imports) {
        if (!imp.from_form) {
            for (const auto& [module, alias] : imp.names) {
                auto target = ctx.resolve_module_path(path, module, 0);
                if (!target) {
                    ++out.unresolved;
                    continue;
                }
                if (*target != path) {
                    edges.insert({*file_entity, {*target, std::nullopt, EntityKind::File, {}},
                                  DepKind::Imports});
                }
                aliases[alias.empty() ? module : alias] = {*target, std::nullopt};
                if (alias.empty()) {
                    // `import a.b` also binds the top package
                    std::string top = split_dotted(module).front();
                    if (auto top_file = ctx.resolve_module_path(path, top, 0)) {
                        aliases.emplace(top, Alias{*top_file, std::nullopt});
                    }
                }
            }
            continue;
        }
        auto container = ctx.resolve_module_path(path, imp.module, imp.relative_level);
        std::string container_dotted = imp.module;
        if (!container && imp.relative_level == 0) {
            ++out.unresolved;
            continue;
        }
        for (const auto& [name, alias] : imp.names) {
            if (name == "*") {
                if (container && *container != path) {
                    edges.insert({*file_entity, {*container, std::nullopt, EntityKind::File, {}},
                                  DepKind::Imports});
                }
                continue;
            }
            // the imported name may itself be a submodule
            std::string sub = imp.module.empty() ? name : imp.module + "." + name;
            auto sub_file = ctx.resolve_module_path(path, sub, imp.relative_level);
            if (sub_file) {
                if (*sub_file != path) {
                    edges.insert({*file_entity, {*sub_file, std::nullopt, EntityKind::File, {}},
                                  DepKind::Imports});
                }
                aliases[alias.empty() ? name : alias] = {*sub_file, std::nullopt};
            } else if (container) {
                if (*container != path) {
                    edges.insert({*file_entity, {*container, std::nullopt, EntityKind::File, {}},
                                  DepKind::Imports});
                }
                if (ctx.symbol(*container, name) != nullptr) {
                    aliases[alias.empty() ? name : alias] = {*container, name};
                } else {
                    ++out.unresolved;
                }
            } else {
                ++out.unresolved;
            }
        }
    }

    // Resolves a dotted reference to a concrete entity, or nullopt.
    auto resolve = [&](const std::string& dotted, int from_entity) -> std::optional<EntityRef> {
        auto segments = split_dotted(dotted);
        if (segments.front() == "self") {
            if (segments.size() != 2 || from_entity < 0) return std::nullopt;
            int cls = parse.entities[static_cast<size_t>(from_entity)].parent;
            while (cls >= 0 && parse.entities[static_cast<size_t>(cls)].kind != PyEntityKind::Class) {
                cls = parse.entities[static_cast<size_t>(cls)].parent;
            }
            if (cls < 0) return std::nullopt;
            const auto* hit = ctx.method(path, parse.entities[static_cast<size_t>(cls)].qualified_name,
                                         segments[1]);
            return hit ? std::optional(*hit) : std::nullopt;
        }
        if (segments.size() == 1) {
            if (const auto* local = ctx.symbol(path, segments[0])) return *local;
            auto it = aliases.find(segments[0]);
            if (it != aliases.end() && it->second.entity) {
                if (const auto* hit = ctx.symbol(it->second.file, *it->second.entity)) return *hit;
            }
            return std::nullopt;
        }
        // dotted: longest alias prefix naming a module, remainder one symbol
        for (size_t take = segments.size() - 1; take >= 1; --take) {
            std::string prefix = segments[0];
            for (size_t i = 1; i < take; ++i) prefix += "." + segments[i];
            auto it = aliases.find(prefix);
            if (it == aliases.end()) continue;
            if (!it->second.entity && take == segments.size() - 1) {
                if (const auto* hit = ctx.symbol(it->second.file, segments.back())) return *hit;
            }
            if (it->second.entity && take == segments.size() - 1) {
                // Class imported via from-import, remainder is a method
                if (const auto* hit =
                        ctx.method(it->second.file, *it->second.entity, segments.back())) {
                    return *hit;
                }
            }
            break;
        }
        // local class + method
        if (segments.size() == 2) {
            if (const auto* local = ctx.symbol(path, segments[0]);
                local && local->kind == EntityKind::Class) {
                if (const auto* hit = ctx.method(path, segments[0], segments[1])) return *hit;
            }
        }
        return std::nullopt;
    };

    for (const auto& call : parse.calls) {
        auto target = resolve(call.dotted, call.entity);
        if (!target) {
            ++out.unresolved;
            continue;
        }
        edges.insert({entity_ref(call.entity), *target, DepKind::Invokes});
    }
    for (const auto& base : parse.bases) {
        auto target = resolve(base.dotted, -1);
        if (!target || target->kind != EntityKind::Class) {
            ++out.unresolved;
            continue;
        }
        EntityRef src = entity_ref(base.entity);
        if (src == *target) {
            ++out.unresolved;  // self-inheritance dropped
            continue;
        }
        edges.insert({src, *target, DepKind::Inherits});
    }
    for (const auto& site : parse.composes) {
        auto target = resolve(site.dotted, -1);
        if (!target || target->kind != EntityKind::Class) {
            ++out.unresolved;
            continue;
        }
        EntityRef src = entity_ref(site.class_entity);
        if (src == *target) {
            ++out.unresolved;
            continue;
        }
        edges.insert({src, *target, DepKind::Composes});
    }

    // normalize import edge targets to the real file entities (with spans)
    DependencyAnalysis result;
    result.unresolved = out.unresolved;
    for (const auto& edge : edges) {
        DepEdge fixed = edge;
        if (edge.kind == DepKind::Imports) {
            if (const auto* dst = es.find(edge.dst.path, std::nullopt, EntityKind::File)) {
                fixed.dst = *dst;
            }
        }
        result.edges.push_back(fixed);
    }
    std::sort(result.edges.begin(), result.edges.end());
    return result;
}

DependencyAnalysis extract_dependencies(const EntitySet& es) {
    Resolver resolver(es);
    DependencyAnalysis total;
    for (const auto& [path, record] : es.files) {
        auto per_file = resolver.file_dependencies(path);
        total.unresolved += per_file.unresolved;
        total.edges.insert(total.edges.end(), per_file.edges.begin(), per_file.edges.end());
    }
    std::sort(total.edges.begin(), total.edges.end());
    return total;
}

void inject_dependencies(EntitySet& es) {
    auto analysis = extract_dependencies(es);
    es.unresolved_references = analysis.unresolved;
    es.dep_edges.insert(es.dep_edges.end(), analysis.edges.begin(), analysis.edges.end());
    std::sort(es.dep_edges.begin(), es.dep_edges.end());
    es.dep_edges.erase(std::unique(es.dep_edges.begin(), es.dep_edges.end()), es.dep_edges.end());
}

EntityLookup entity_at(const EntitySet& es, const std::string& path, int line) {
    EntityLookup out;
    if (es.files.find(path) == es.files.end()) {
        return out;
    }
    out.known_path = true;
    const EntityRef* best = nullptr;
    for (const auto& e : es.entities) {
        if (e.path != path || !e.span.contains(line)) continue;
        if (!best || (e.span.end - e.span.start) < (best->span.end - best->span.start)) {
            best = &e;
        }
    }
    if (best) {
        out.entity = *best;
    }
    return out;
}

}  // namespace rpg
