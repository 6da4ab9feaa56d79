#include "rpg/evolution.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rpg/diff.hpp"
#include "rpg/extractor.hpp"

namespace rpg {

namespace {

std::string parent_dir(const std::string& path) {
    auto pos = path.rfind('/');
    return pos == std::string::npos ? std::string() : path.substr(0, pos);
}

std::string file_stem(const std::string& path) {
    auto slash = path.rfind('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = name.rfind('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

// Post-state source slice for an entity of `es`.
std::string source_slice(const EntitySet& es, const EntityRef& entity) {
    const FileRecord* record = es.file(entity.path);
    if (!record) return "";
    if (entity.kind == EntityKind::File) return record->source;
    return slice_lines(record->source, entity.span);
}

struct EventKey {
    ChangeKind kind;
    std::string entity_key;
    EntityKind entity_kind;

    auto operator<=>(const EventKey&) const = default;
};

EventKey key_of(const ChangeEvent& event) {
    return {event.kind, event.entity.key(), event.entity.kind};
}

bool is_area(const RpgGraph& g, const std::string& id) {
    const RpgNode* node = g.node(id);
    return node && node->level == NodeLevel::Area;
}

// Removes emptied abstract ancestors bottom-up, stopping at area roots.
void prune_orphans(RpgGraph& g, std::optional<std::string> id, UpdateReport* report) {
    while (id) {
        const RpgNode* node = g.node(*id);
        if (!node || node->kind != NodeKind::High || is_area(g, *id)) return;
        if (!g.children_of(*id).empty()) return;
        auto parent = g.parent_of(*id);
        if (report) report->pruned_nodes.push_back(*id);
        g.remove_node(*id);
        id = parent;
    }
}

// A candidate is advertised by its own features plus the labels of every
// abstract node below it, so a deep match can pull routing down its branch.
std::vector<FeaturePhrase> subtree_phrases(const RpgGraph& g, const std::string& id) {
    std::vector<FeaturePhrase> phrases;
    std::vector<std::string> stack{id};
    while (!stack.empty()) {
        std::string current = stack.back();
        stack.pop_back();
        const RpgNode* node = g.node(current);
        if (!node || node->kind != NodeKind::High) continue;
        phrases.insert(phrases.end(), node->feature.begin(), node->feature.end());
        for (const auto& child : g.children_of(current)) stack.push_back(child);
    }
    return dedup_phrases(std::move(phrases));
}

std::vector<RouteCandidate> abstract_children(const RpgGraph& g, const std::string& id) {
    std::vector<RouteCandidate> out;
    for (const auto& child : g.children_of(id)) {
        const RpgNode* node = g.node(child);
        if (node && node->kind == NodeKind::High) {
            out.push_back({child, subtree_phrases(g, child)});
        }
    }
    return out;
}

// Top-down semantic routing from the area roots; returns the abstract node
// the new entity should live under, materializing any missing category or
// subcategory from its leading feature phrases.
std::string route_file_parent(RpgGraph& g, const std::vector<FeaturePhrase>& summary,
                              const std::string& fallback_label, SemanticProvider& provider,
                              UpdateReport* report) {
    auto ensure_chain = [&](const std::string& area_label, const std::string& cat_label,
                            const std::string& sub_label) -> std::string {
        std::string area_phrase = label_phrase(area_label);
        std::string area_id = high_node_id(area_phrase);
        if (!g.node(area_id)) {
            g.add_node(RpgNode{.id = area_id,
                               .kind = NodeKind::High,
                               .level = NodeLevel::Area,
                               .feature = {area_phrase}},
                       std::nullopt);
        }
        std::string cat_id = high_node_id(area_phrase + "/" + cat_label);
        if (!g.node(cat_id)) {
            g.add_node(RpgNode{.id = cat_id,
                               .kind = NodeKind::High,
                               .level = NodeLevel::Category,
                               .feature = {cat_label}},
                       area_id);
        }
        std::string sub_id = high_node_id(area_phrase + "/" + cat_label + "/" + sub_label);
        if (!g.node(sub_id)) {
            g.add_node(RpgNode{.id = sub_id,
                               .kind = NodeKind::High,
                               .level = NodeLevel::Subcategory,
                               .feature = {sub_label}},
                       cat_id);
        }
        return sub_id;
    };

    std::string seg1 = !summary.empty() ? summary.front() : label_phrase(fallback_label);
    std::string seg2 = summary.size() > 1 ? summary[1] : seg1;

    // pick an area
    std::vector<RouteCandidate> areas;
    for (const auto& root : g.roots()) {
        areas.push_back({root, subtree_phrases(g, root)});
    }
    std::optional<std::string> area_id;
    if (!areas.empty()) {
        area_id = provider.route(areas, summary);
    }
    if (!area_id) {
        if (report) {
            report->diagnostics.push_back({fallback_label, "no area fits; using fallback area"});
        }
        return ensure_chain("Unclassified", "general", "general");
    }

    // descend: category, then subcategory
    std::string current = *area_id;
    for (NodeLevel next : {NodeLevel::Category, NodeLevel::Subcategory}) {
        auto candidates = abstract_children(g, current);
        std::optional<std::string> choice;
        if (!candidates.empty()) {
            choice = provider.route(candidates, summary);
        }
        if (!choice) {
            // no child is a better fit: extend the chain down to subcategory
            const RpgNode* node = g.node(current);
            std::string area_phrase;
            std::string cat_label;
            if (node->level == NodeLevel::Area) {
                area_phrase = node->feature.empty() ? "area" : node->feature.front();
                cat_label = seg1;
            } else {
                area_phrase = g.node(*g.parent_of(current))->feature.front();
                cat_label = node->feature.empty() ? seg1 : node->feature.front();
            }
            std::string sub_label = next == NodeLevel::Category ? seg2 : seg1;
            if (node->level == NodeLevel::Area) {
                return ensure_chain(area_phrase, cat_label, seg2);
            }
            std::string sub_id = high_node_id(area_phrase + "/" + cat_label + "/" + sub_label);
            if (!g.node(sub_id)) {
                g.add_node(RpgNode{.id = sub_id,
                                   .kind = NodeKind::High,
                                   .level = NodeLevel::Subcategory,
                                   .feature = {sub_label}},
                           current);
            }
            return sub_id;
        }
        current = *choice;
    }
    return current;
}

// Syntactic parent node for a class/function/method entity.
std::optional<std::string> member_parent_id(const RpgGraph& g, const EntityRef& entity) {
    if (!entity.qualified_name) return std::nullopt;
    const std::string& qualified = *entity.qualified_name;
    size_t dot = qualified.rfind('.');
    if (dot == std::string::npos) {
        std::string file_id = low_node_id(entity.path, std::nullopt, EntityKind::File);
        return g.node(file_id) ? std::optional(file_id) : std::nullopt;
    }
    std::string parent_qualified = qualified.substr(0, dot);
    for (EntityKind kind : {EntityKind::Class, EntityKind::Function, EntityKind::Method}) {
        std::string id = low_node_id(entity.path, parent_qualified, kind);
        if (g.node(id)) return id;
    }
    return std::nullopt;
}

void resynthesize_file(RpgGraph& g, const std::string& path, SemanticProvider& provider,
                       const EvolutionOptions& options, UpdateReport* report) {
    std::string file_id = low_node_id(path, std::nullopt, EntityKind::File);
    const RpgNode* file_node = g.node(file_id);
    if (!file_node) return;

    std::vector<FeaturePhrase> member_phrases;
    for (const auto& low : g.low_descendants(file_id)) {
        const RpgNode* member = g.node(low);
        member_phrases.insert(member_phrases.end(), member->feature.begin(),
                              member->feature.end());
    }
    std::vector<FeaturePhrase> summary;
    if (!member_phrases.empty()) {
        summary = provider.summarize_file(path, member_phrases);
    }
    if (summary == file_node->feature) return;

    double drift = provider.judge_drift(file_node->feature, summary);
    g.set_features(file_id, summary);
    if (drift > options.tau_drift) {
        std::string old_parent = g.parent_of(file_id).value_or("");
        std::string new_parent =
            route_file_parent(g, summary, file_stem(path), provider, report);
        g.reparent(file_id, new_parent);
        if (!old_parent.empty() && old_parent != new_parent) {
            prune_orphans(g, old_parent, report);
        }
        if (report) report->rerouted_nodes.push_back(file_id);
    }
}

}  // namespace

std::string to_string(ChangeKind kind) {
    switch (kind) {
        case ChangeKind::Insert: return "insert";
        case ChangeKind::Delete: return "delete";
        case ChangeKind::Modify: return "modify";
    }
    return "unknown";
}

std::vector<ChangeEvent> parse_diff(const std::string& diff_text, const EntitySet& before,
                                    const EntitySet& after) {
    auto file_diffs = parse_unified_diff(diff_text);

    std::set<EventKey> seen;
    std::vector<ChangeEvent> deletes;
    std::vector<ChangeEvent> modifies;
    std::vector<ChangeEvent> inserts;
    auto push = [&](ChangeEvent event) {
        if (!seen.insert(key_of(event)).second) return;
        switch (event.kind) {
            case ChangeKind::Delete: deletes.push_back(std::move(event)); break;
            case ChangeKind::Modify: modifies.push_back(std::move(event)); break;
            case ChangeKind::Insert: inserts.push_back(std::move(event)); break;
        }
    };

    auto classify = [&](const EntityRef& touched) {
        const EntityRef* pre = before.find(touched.path, touched.qualified_name, touched.kind);
        const EntityRef* post = after.find(touched.path, touched.qualified_name, touched.kind);
        if (pre && post) {
            push({ChangeKind::Modify, *post, source_slice(after, *post)});
        } else if (pre && !post) {
            push({ChangeKind::Delete, *pre, std::nullopt});
        } else if (post) {
            push({ChangeKind::Insert, *post, source_slice(after, *post)});
        }
    };

    for (const auto& fd : file_diffs) {
        if (fd.added()) {
            for (const auto* entity : after.entities_in(fd.new_path)) {
                push({ChangeKind::Insert, *entity, source_slice(after, *entity)});
            }
            continue;
        }
        if (fd.deleted()) {
            for (const auto* entity : before.entities_in(fd.old_path)) {
                push({ChangeKind::Delete, *entity, std::nullopt});
            }
            continue;
        }
        for (int line : fd.old_touched) {
            auto hit = entity_at(before, fd.old_path, line);
            if (!hit.known_path) {
                throw DiffError("diff references unknown path: " + fd.old_path);
            }
            if (hit.entity) classify(*hit.entity);
        }
        for (int line : fd.new_touched) {
            auto hit = entity_at(after, fd.new_path, line);
            if (!hit.known_path) {
                throw DiffError("diff references unknown path: " + fd.new_path);
            }
            if (hit.entity) classify(*hit.entity);
        }
    }

    // deletes: innermost first; inserts: outermost first (files before members)
    std::sort(deletes.begin(), deletes.end(), [](const ChangeEvent& a, const ChangeEvent& b) {
        if (a.entity.path != b.entity.path) return a.entity.path < b.entity.path;
        return b.entity < a.entity;
    });
    std::sort(modifies.begin(), modifies.end(),
              [](const ChangeEvent& a, const ChangeEvent& b) { return a.entity < b.entity; });
    std::sort(inserts.begin(), inserts.end(),
              [](const ChangeEvent& a, const ChangeEvent& b) { return a.entity < b.entity; });

    std::vector<ChangeEvent> events;
    events.insert(events.end(), deletes.begin(), deletes.end());
    events.insert(events.end(), modifies.begin(), modifies.end());
    events.insert(events.end(), inserts.begin(), inserts.end());
    return events;
}

void delete_node(RpgGraph& g, const std::string& id, UpdateReport* report) {
    if (!g.node(id)) {
        return;  // unknown id: identity
    }
    auto parent = g.parent_of(id);
    // remove the subtree bottom-up so no child is ever orphaned
    std::vector<std::string> order;
    std::vector<std::string> stack{id};
    while (!stack.empty()) {
        std::string current = stack.back();
        stack.pop_back();
        order.push_back(current);
        for (const auto& child : g.children_of(current)) stack.push_back(child);
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        g.remove_node(*it);
    }
    prune_orphans(g, parent, report);
}

void insert_node(RpgGraph& g, const ChangeEvent& event, SemanticProvider& provider,
                 const EvolutionOptions& options, UpdateReport* report) {
    const EntityRef& entity = event.entity;
    std::string id = node_id_for(entity);
    if (g.node(id)) {
        return;  // already present (file insertion materializes its members)
    }

    if (entity.kind != EntityKind::File) {
        auto parent = member_parent_id(g, entity);
        if (!parent) {
            throw UpdateError("insert of " + entity.key() + " has no containing node");
        }
        auto parsed = provider.parse_features({{entity, event.new_source.value_or("")}});
        RpgNode node{.id = id,
                     .kind = NodeKind::Low,
                     .level = node_level_for(entity.kind),
                     .feature = parsed[entity],
                     .path = entity.path,
                     .qualified_name = entity.qualified_name,
                     .span = entity.span,
                     .entity_kind = entity.kind};
        g.add_node(std::move(node), *parent);
        g.add_dep_edge({*parent, id, DepKind::Contains});
        if (report) ++report->inserts_applied;
        return;
    }

    // New file: lift its members from source, synthesize the summary, route.
    std::string source = event.new_source.value_or("");
    PyFileParse parse = parse_python_source(source);

    std::vector<ParseItem> items;
    std::vector<EntityRef> members;
    if (parse.ok) {
        for (const auto& py : parse.entities) {
            EntityKind kind = py.kind == PyEntityKind::Class      ? EntityKind::Class
                              : py.kind == PyEntityKind::Method   ? EntityKind::Method
                                                                  : EntityKind::Function;
            EntityRef member{entity.path, py.qualified_name, kind, {py.start_line, py.end_line}};
            members.push_back(member);
            items.push_back({member, slice_lines(source, member.span)});
        }
    }
    std::map<EntityRef, std::vector<FeaturePhrase>> features;
    if (!items.empty()) {
        features = provider.parse_features(items);
    }
    std::vector<FeaturePhrase> member_phrases;
    for (const auto& member : members) {
        const auto& phrases = features[member];
        member_phrases.insert(member_phrases.end(), phrases.begin(), phrases.end());
    }
    std::vector<FeaturePhrase> summary;
    if (!member_phrases.empty()) {
        summary = provider.summarize_file(entity.path, member_phrases);
    }

    std::string parent = route_file_parent(g, summary, file_stem(entity.path), provider, report);
    RpgNode file_node{.id = id,
                      .kind = NodeKind::Low,
                      .level = NodeLevel::File,
                      .feature = summary,
                      .path = entity.path,
                      .span = entity.span,
                      .entity_kind = EntityKind::File};
    g.add_node(std::move(file_node), parent);
    if (report) ++report->inserts_applied;

    // members attach under their syntactic parents (outer entities first)
    std::vector<size_t> order(members.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return members[a] < members[b]; });
    for (size_t index : order) {
        const EntityRef& member = members[index];
        auto member_parent = member_parent_id(g, member);
        if (!member_parent) {
            throw UpdateError("insert of " + member.key() + " has no containing node");
        }
        std::string member_id = node_id_for(member);
        RpgNode node{.id = member_id,
                     .kind = NodeKind::Low,
                     .level = node_level_for(member.kind),
                     .feature = features[member],
                     .path = member.path,
                     .qualified_name = member.qualified_name,
                     .span = member.span,
                     .entity_kind = member.kind};
        g.add_node(std::move(node), *member_parent);
        g.add_dep_edge({*member_parent, member_id, DepKind::Contains});
        if (report) ++report->inserts_applied;
    }
}

namespace {

// Member-entity modifications only; the file summary pass runs separately
// once every event of the commit has been applied.
void modify_members(RpgGraph& g, const std::string& path, const std::vector<ChangeEvent>& events,
                    SemanticProvider& provider, const EvolutionOptions& options,
                    UpdateReport* report) {
    std::vector<ParseItem> items;
    for (const auto& event : events) {
        if (event.kind != ChangeKind::Modify || event.entity.kind == EntityKind::File) continue;
        if (!g.node(node_id_for(event.entity))) {
            if (report) {
                report->diagnostics.push_back(
                    {event.entity.key(), "modify event for unknown node skipped"});
            }
            continue;
        }
        items.push_back({event.entity, event.new_source.value_or("")});
    }

    if (report) {
        for (const auto& event : events) {
            if (event.kind == ChangeKind::Modify && event.entity.kind == EntityKind::File) {
                ++report->modifies_applied;  // file summary refresh below
            }
        }
    }
    if (!items.empty()) {
        auto features = provider.parse_features(items);
        for (const auto& item : items) {
            std::string id = node_id_for(item.entity);
            const RpgNode* node = g.node(id);
            auto new_phrases = features[item.entity];
            double drift = provider.judge_drift(node->feature, new_phrases);
            if (report) ++report->modifies_applied;
            if (drift > options.tau_drift) {
                // logic drift: relocate as delete + insert
                delete_node(g, id, report);
                ChangeEvent insertion{ChangeKind::Insert, item.entity, item.source};
                insert_node(g, insertion, provider, options, report);
                if (report) {
                    --report->inserts_applied;  // counted as a modify, not a fresh insert
                    report->rerouted_nodes.push_back(id);
                }
            } else {
                g.set_features(id, new_phrases);
                g.update_low_metadata(id, item.entity.span);
            }
        }
    }
}

}  // namespace

void process_modification(RpgGraph& g, const std::string& path,
                          const std::vector<ChangeEvent>& events, SemanticProvider& provider,
                          const EvolutionOptions& options, UpdateReport* report) {
    modify_members(g, path, events, provider, options, report);
    resynthesize_file(g, path, provider, options, report);
}

std::pair<RpgGraph, UpdateReport> apply_commit(const RpgGraph& g, const std::string& diff_text,
                                               const EntitySet& before, const EntitySet& after,
                                               SemanticProvider& provider,
                                               const EvolutionOptions& options) {
    RpgGraph updated = g;
    UpdateReport report;
    StageCounters tokens_before = provider.account().total();
    provider.set_stage("update");

    auto events = parse_diff(diff_text, before, after);
    if (events.empty()) {
        return {std::move(updated), report};
    }

    std::set<std::string> changed_files;
    for (const auto& event : events) {
        changed_files.insert(event.entity.path);
    }

    // deletes
    for (const auto& event : events) {
        if (event.kind != ChangeKind::Delete) continue;
        std::string id = node_id_for(event.entity);
        if (updated.node(id)) {
            delete_node(updated, id, &report);
            ++report.deletes_applied;
        }
    }

    // modifications, grouped per file
    std::map<std::string, std::vector<ChangeEvent>> modifies_by_file;
    for (const auto& event : events) {
        if (event.kind == ChangeKind::Modify) {
            modifies_by_file[event.entity.path].push_back(event);
        }
    }
    for (const auto& [path, file_events] : modifies_by_file) {
        modify_members(updated, path, file_events, provider, options, &report);
    }

    // insertions (files come before their members in event order)
    for (const auto& event : events) {
        if (event.kind != ChangeKind::Insert) continue;
        insert_node(updated, event, provider, options, &report);
    }

    // one summary pass per changed file, against the fully updated members
    for (const auto& path : changed_files) {
        resynthesize_file(updated, path, provider, options, &report);
    }

    // span metadata refresh for every entity of the changed files
    for (const auto& path : changed_files) {
        for (const auto* entity : after.entities_in(path)) {
            std::string id = node_id_for(*entity);
            if (updated.node(id)) {
                updated.update_low_metadata(id, entity->span);
            }
        }
    }

    // localized dependency refresh: changed files plus their reverse
    // dependents at file granularity
    std::set<std::string> affected = changed_files;
    for (const auto& edge : g.dep_edges()) {
        if (edge.kind == DepKind::Contains) continue;
        const RpgNode* src = g.node(edge.src);
        const RpgNode* dst = g.node(edge.dst);
        if (!src || !dst || !src->path || !dst->path) continue;
        if (changed_files.count(*dst->path) != 0) {
            affected.insert(*src->path);
        }
    }
    size_t removed = 0;
    updated.remove_dep_edges_if([&](const GraphDepEdge& edge) {
        if (edge.kind == DepKind::Contains) return false;
        const RpgNode* src = updated.node(edge.src);
        if (!src || !src->path) return false;
        bool drop = affected.count(*src->path) != 0;
        removed += drop ? 1 : 0;
        return drop;
    });
    report.dep_edges_removed = static_cast<int>(removed);

    Resolver resolver(after);
    for (const auto& path : affected) {
        if (!after.file(path)) continue;
        auto analysis = resolver.file_dependencies(path);
        for (const auto& edge : analysis.edges) {
            GraphDepEdge mapped{node_id_for(edge.src), node_id_for(edge.dst), edge.kind};
            if (updated.node(mapped.src) && updated.node(mapped.dst)) {
                updated.add_dep_edge(mapped);
                ++report.dep_edges_added;
            }
        }
    }

    refresh_grounding(updated, options.min_scope_depth);

    auto validation = validate(updated);
    if (!validation.empty()) {
        std::string summary;
        for (const auto& finding : validation.findings) {
            summary += finding.code + "; ";
        }
        throw UpdateError("post-commit validation failed, rolling back: " + summary);
    }

    StageCounters tokens_after = provider.account().total();
    report.token_delta.request_count = tokens_after.request_count - tokens_before.request_count;
    report.token_delta.prompt_tokens_est =
        tokens_after.prompt_tokens_est - tokens_before.prompt_tokens_est;
    report.token_delta.completion_tokens_est =
        tokens_after.completion_tokens_est - tokens_before.completion_tokens_est;
    return {std::move(updated), report};
}

}  // namespace rpg
