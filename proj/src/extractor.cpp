#include "rpg/extractor.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace rpg {

namespace {

std::string top_level_dir(const std::string& path) {
    auto pos = path.find('/');
    return pos == std::string::npos ? "_root" : path.substr(0, pos);
}

std::string parent_dir(const std::string& path) {
    auto pos = path.rfind('/');
    return pos == std::string::npos ? std::string() : path.substr(0, pos);
}

// Frequency-ordered aggregate (most frequent first, ties lexicographic).
std::vector<FeaturePhrase> aggregate_phrases(const std::vector<FeaturePhrase>& phrases) {
    std::map<std::string, int> counts;
    for (const auto& p : phrases) ++counts[p];
    std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<FeaturePhrase> out;
    out.reserve(ranked.size());
    for (const auto& [phrase, count] : ranked) {
        (void)count;
        out.push_back(phrase);
    }
    return out;
}

std::string normalized_segment(const std::string& segment) {
    if (auto n = normalize_feature(segment)) return *n;
    return label_phrase(segment);
}

}  // namespace

std::string node_id_for(const EntityRef& entity) {
    return low_node_id(entity.path, entity.qualified_name, entity.kind);
}

NodeLevel node_level_for(EntityKind kind) {
    switch (kind) {
        case EntityKind::File: return NodeLevel::File;
        case EntityKind::Class: return NodeLevel::Class;
        case EntityKind::Method: return NodeLevel::Method;
        case EntityKind::Function:
        case EntityKind::Directory: return NodeLevel::Function;
    }
    return NodeLevel::Function;
}

std::string slice_lines(const std::string& source, Span span) {
    std::string out;
    int line = 1;
    size_t start = 0;
    for (size_t i = 0; i <= source.size(); ++i) {
        if (i == source.size() && start >= i) break;  // no dangling pseudo-line
        if (i == source.size() || source[i] == '\n') {
            if (line >= span.start && line <= span.end) {
                out.append(source, start, i - start);
                out.push_back('\n');
            }
            if (line > span.end) break;
            ++line;
            start = i + 1;
        }
    }
    return out;
}

RpgGraph phase1_lift(const EntitySet& es, SemanticProvider& provider) {
    provider.set_stage("phase1");
    RpgGraph g;

    // low-level nodes for every entity; files first so parents exist
    for (const auto& entity : es.entities) {
        RpgNode node;
        node.id = node_id_for(entity);
        node.kind = NodeKind::Low;
        node.level = node_level_for(entity.kind);
        node.path = entity.path;
        node.qualified_name = entity.qualified_name;
        node.span = entity.span;
        node.entity_kind = entity.kind;
        if (entity.kind == EntityKind::File) {
            g.add_floating(std::move(node));
        }
    }
    // member entities attach under their syntactic parent (contains edges)
    std::map<std::string, std::string> parent_of;  // child node id -> parent node id
    for (const auto& edge : es.dep_edges) {
        if (edge.kind == DepKind::Contains) {
            parent_of[node_id_for(edge.dst)] = node_id_for(edge.src);
        }
    }
    for (const auto& entity : es.entities) {
        if (entity.kind == EntityKind::File) continue;
        RpgNode node;
        node.id = node_id_for(entity);
        node.kind = NodeKind::Low;
        node.level = node_level_for(entity.kind);
        node.path = entity.path;
        node.qualified_name = entity.qualified_name;
        node.span = entity.span;
        node.entity_kind = entity.kind;
        auto parent = parent_of.find(node.id);
        if (parent == parent_of.end()) {
            throw StageError("phase1", "entity without containing parent: " + entity.key());
        }
        g.add_node(std::move(node), parent->second);
    }

    // batched feature parsing for every non-file entity
    std::vector<ParseItem> items;
    for (const auto& entity : es.entities) {
        if (entity.kind == EntityKind::File) continue;
        const FileRecord* record = es.file(entity.path);
        std::string source = record ? slice_lines(record->source, entity.span) : "";
        items.push_back({entity, std::move(source)});
    }
    std::vector<BatchItem> sized;
    sized.reserve(items.size());
    for (const auto& item : items) {
        sized.push_back({item.entity.key(), estimate_tokens(item.entity.key() + item.source)});
    }
    std::map<EntityRef, std::vector<FeaturePhrase>> features;
    for (const auto& batch : make_batches(sized, provider.options().budget)) {
        std::vector<ParseItem> chunk;
        chunk.reserve(batch.size());
        for (size_t index : batch) chunk.push_back(items[index]);
        auto parsed = provider.parse_features(chunk);
        for (const auto& item : chunk) {
            auto it = parsed.find(item.entity);
            if (it == parsed.end()) {
                throw StageError("phase1", "provider dropped entity " + item.entity.key());
            }
            features[item.entity] = it->second;
        }
    }
    for (const auto& [entity, phrases] : features) {
        g.set_features(node_id_for(entity), phrases);
    }

    // file summaries from member phrases
    for (const auto& entity : es.entities) {
        if (entity.kind != EntityKind::File) continue;
        std::vector<FeaturePhrase> member_phrases;
        for (const auto& member : es.entities) {
            if (member.path != entity.path || member.kind == EntityKind::File) continue;
            const auto& phrases = features[member];
            member_phrases.insert(member_phrases.end(), phrases.begin(), phrases.end());
        }
        std::vector<FeaturePhrase> summary;
        if (!member_phrases.empty()) {
            summary = provider.summarize_file(entity.path, member_phrases);
        }
        g.set_features(node_id_for(entity), summary);
    }
    return g;
}

void phase2_reorganize(RpgGraph& g, SemanticProvider& provider) {
    provider.set_stage("phase2");

    // file-level summaries only; function-level features stay out of the payload
    std::vector<std::pair<std::string, std::string>> files;  // path -> node id
    for (const auto& [id, node] : g.nodes()) {
        if (node.level == NodeLevel::File && node.path) {
            files.emplace_back(*node.path, id);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        return;  // empty repository: nothing to organize
    }
    std::vector<FileSummaryInput> summaries;
    summaries.reserve(files.size());
    for (const auto& [path, id] : files) {
        summaries.push_back({path, g.node(id)->feature});
    }
    auto areas = provider.discover_domains(summaries);

    std::map<std::string, GroupSummary> groups;
    for (const auto& [path, id] : files) {
        auto& group = groups[top_level_dir(path)];
        group.id = top_level_dir(path);
        group.member_files.push_back(path);
        const auto& phrases = g.node(id)->feature;
        group.phrases.insert(group.phrases.end(), phrases.begin(), phrases.end());
    }
    std::vector<GroupSummary> group_list;
    for (auto& [id, group] : groups) {
        group.phrases = aggregate_phrases(group.phrases);
        group_list.push_back(group);
    }
    auto assignment = provider.assign_paths(group_list, areas);

    // instantiate shared area/category/subcategory chains
    std::map<std::string, std::string> group_to_subcat;
    for (const auto& [path, group_ids] : assignment) {
        auto segments = split_path_segments(path);
        if (segments.size() != 3) {
            throw StageError("phase2", "assigned path is not three levels: " + path);
        }
        std::string area_phrase = label_phrase(segments[0]);
        std::string cat_phrase = normalized_segment(segments[1]);
        std::string sub_phrase = normalized_segment(segments[2]);

        std::string area_id = high_node_id(area_phrase);
        if (!g.node(area_id)) {
            g.add_node(RpgNode{.id = area_id,
                               .kind = NodeKind::High,
                               .level = NodeLevel::Area,
                               .feature = {area_phrase}},
                       std::nullopt);
        }
        std::string cat_id = high_node_id(area_phrase + "/" + cat_phrase);
        if (!g.node(cat_id)) {
            g.add_node(RpgNode{.id = cat_id,
                               .kind = NodeKind::High,
                               .level = NodeLevel::Category,
                               .feature = {cat_phrase}},
                       area_id);
        }
        std::string sub_id = high_node_id(area_phrase + "/" + cat_phrase + "/" + sub_phrase);
        if (!g.node(sub_id)) {
            g.add_node(RpgNode{.id = sub_id,
                               .kind = NodeKind::High,
                               .level = NodeLevel::Subcategory,
                               .feature = {sub_phrase}},
                       cat_id);
        }
        for (const auto& group_id : group_ids) {
            group_to_subcat[group_id] = sub_id;
        }
    }

    for (const auto& [path, id] : files) {
        auto it = group_to_subcat.find(top_level_dir(path));
        if (it == group_to_subcat.end()) {
            throw StageError("phase2", "group without assignment: " + top_level_dir(path));
        }
        g.reparent(id, it->second);
    }
}

void refresh_grounding(RpgGraph& g, int min_scope_depth) {
    // post-order coverage aggregation over the feature forest
    std::map<std::string, std::set<std::string>> coverage;
    std::function<std::set<std::string>(const std::string&)> walk =
        [&](const std::string& id) -> std::set<std::string> {
        const RpgNode* node = g.node(id);
        std::set<std::string> acc;
        if (!node) return acc;
        if (node->level == NodeLevel::File && node->path) {
            acc.insert(parent_dir(*node->path));
            return acc;  // members below the file share its directory
        }
        for (const auto& child : g.children_of(id)) {
            auto sub = walk(child);
            acc.insert(sub.begin(), sub.end());
        }
        if (node->kind == NodeKind::High) {
            coverage[id] = acc;
        }
        return acc;
    };
    for (const auto& root : g.roots()) {
        walk(root);
    }
    for (const auto& [id, dirs] : coverage) {
        g.set_scopes(id, compute_lca(dirs, min_scope_depth));
    }
}

void phase3_ground(RpgGraph& g, const EntitySet& es, int min_scope_depth) {
    refresh_grounding(g, min_scope_depth);

    auto analysis = extract_dependencies(es);
    for (const auto& edge : es.dep_edges) {
        if (edge.kind == DepKind::Contains) {
            g.add_dep_edge({node_id_for(edge.src), node_id_for(edge.dst), DepKind::Contains});
        }
    }
    for (const auto& edge : analysis.edges) {
        g.add_dep_edge({node_id_for(edge.src), node_id_for(edge.dst), edge.kind});
    }
}

BuildOutput build(const std::string& root, SemanticProvider& provider, int min_scope_depth,
                  const std::vector<std::string>& include_globs,
                  const std::vector<std::string>& exclude_globs) {
    BuildOutput out;
    out.entities = scan_repository(root, include_globs, exclude_globs);
    out.graph = phase1_lift(out.entities, provider);
    phase2_reorganize(out.graph, provider);
    phase3_ground(out.graph, out.entities, min_scope_depth);
    out.diagnostics = out.entities.diagnostics;
    const auto& provider_notes = provider.diagnostics();
    out.diagnostics.insert(out.diagnostics.end(), provider_notes.begin(), provider_notes.end());
    return out;
}

}  // namespace rpg
