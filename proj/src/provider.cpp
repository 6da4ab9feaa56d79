#include "rpg/provider.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace rpg {

int estimate_tokens(const std::string& text) {
    return static_cast<int>((text.size() + 3) / 4);
}

void TokenAccount::record(long long prompt_est, long long completion_est) {
    auto& counters = per_stage_[stage_];
    counters.request_count += 1;
    counters.prompt_tokens_est += prompt_est;
    counters.completion_tokens_est += completion_est;
}

StageCounters TokenAccount::stage_counters(const std::string& stage) const {
    auto it = per_stage_.find(stage);
    return it == per_stage_.end() ? StageCounters{} : it->second;
}

StageCounters TokenAccount::total() const {
    StageCounters sum;
    for (const auto& [stage, counters] : per_stage_) {
        sum.request_count += counters.request_count;
        sum.prompt_tokens_est += counters.prompt_tokens_est;
        sum.completion_tokens_est += counters.completion_tokens_est;
    }
    return sum;
}

std::vector<std::vector<size_t>> make_batches(const std::vector<BatchItem>& items,
                                              const ProviderBudget& budget) {
    std::vector<std::vector<size_t>> batches;
    std::vector<int> loads;
    for (size_t i = 0; i < items.size(); ++i) {
        if (items[i].tokens > budget.max_payload_tokens) {
            throw ProviderError("item exceeds token budget: " + items[i].name);
        }
        bool placed = false;
        for (size_t b = 0; b < batches.size(); ++b) {
            if (loads[b] + items[i].tokens <= budget.max_payload_tokens) {
                batches[b].push_back(i);
                loads[b] += items[i].tokens;
                placed = true;
                break;
            }
        }
        if (!placed) {
            batches.push_back({i});
            loads.push_back(items[i].tokens);
        }
    }
    return batches;
}

void SemanticProvider::bill(const std::string& op, const std::string& payload,
                            const std::string& completion) {
    account_.record(estimate_tokens(payload), estimate_tokens(completion));
    if (record_payloads_) {
        payload_log_.push_back({account_.stage(), op, payload});
    }
}

void SemanticProvider::note(const std::string& path, const std::string& issue) {
    diagnostics_.push_back({path, issue});
}

namespace {

const std::unordered_map<std::string, std::string>& verb_remap() {
    static const std::unordered_map<std::string, std::string> table = {
        {"get", "retrieve"}, {"fetch", "retrieve"}, {"is", "check"},   {"has", "check"},
        {"can", "check"},    {"calc", "compute"},   {"init", "initialize"},
    };
    return table;
}

const std::unordered_set<std::string>& known_verbs() {
    static const std::unordered_set<std::string> verbs = {
        "load",      "save",    "read",     "write",    "open",    "close",     "parse",
        "build",     "create",  "make",     "compute",  "validate", "check",    "convert",
        "update",    "serialize", "deserialize", "transform", "normalize", "encode", "decode",
        "scan",      "extract", "merge",    "split",    "sort",    "filter",    "find",
        "search",    "insert",  "delete",   "remove",   "add",     "apply",     "run",
        "render",    "train",   "fit",      "predict",  "score",   "solve",     "scale",
        "clip",      "plot",    "format",   "set",      "reset",   "retrieve",  "initialize",
        "generate",  "register", "resolve", "route",    "emit",    "collect",   "count",
        "clamp",     "copy",    "send",     "receive",  "report",  "print",     "log",
        "list",      "lookup",  "map",      "reduce",   "test",    "verify",    "wrap",
        "flatten",   "join",    "cache",    "store",    "clean",   "strip",     "mask",
        "sample",    "shuffle", "tokenize", "summarize", "rank",   "match",     "measure",
    };
    return verbs;
}

std::string join_tokens(const std::vector<std::string>& tokens, size_t from, size_t cap = 8) {
    std::string out;
    size_t used = 0;
    for (size_t i = from; i < tokens.size() && used < cap; ++i, ++used) {
        if (!out.empty()) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::string payload_of_phrases(const std::vector<FeaturePhrase>& phrases) {
    std::string out;
    for (const auto& p : phrases) {
        out += p;
        out.push_back('\n');
    }
    return out;
}

// Most frequent first, ties lexicographic, capped at `cap`.
std::vector<FeaturePhrase> top_phrases(const std::vector<FeaturePhrase>& phrases, size_t cap) {
    std::map<std::string, int> counts;
    for (const auto& p : phrases) ++counts[p];
    std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<FeaturePhrase> out;
    for (const auto& [phrase, count] : ranked) {
        (void)count;
        if (out.size() >= cap) break;
        out.push_back(phrase);
    }
    return out;
}

class DeterministicProvider final : public SemanticProvider {
public:
    explicit DeterministicProvider(ProviderOptions options)
        : SemanticProvider(std::move(options)) {}

    std::map<EntityRef, std::vector<FeaturePhrase>> parse_features(
        const std::vector<ParseItem>& batch) override {
        std::map<EntityRef, std::vector<FeaturePhrase>> out;
        std::string payload;
        std::string completion;
        for (const auto& item : batch) {
            payload += item.entity.key();
            payload.push_back('\n');
            payload += item.source;
            payload.push_back('\n');
            auto phrases = derive_phrases(item.entity);
            completion += payload_of_phrases(phrases);
            out[item.entity] = std::move(phrases);
        }
        bill("parse_features", payload, completion);
        return out;
    }

    std::vector<FeaturePhrase> summarize_file(
        const std::string& path, const std::vector<FeaturePhrase>& child_phrases) override {
        auto summary = top_phrases(child_phrases, 8);
        bill("summarize_file", path + "\n" + payload_of_phrases(child_phrases),
             payload_of_phrases(summary));
        return summary;
    }

    std::vector<std::string> discover_domains(
        const std::vector<FileSummaryInput>& file_summaries) override {
        if (file_summaries.empty()) {
            throw ProviderError("nothing to organize: no file summaries");
        }
        std::map<std::string, int> dir_files;
        std::string payload;
        for (const auto& fs : file_summaries) {
            auto pos = fs.path.find('/');
            std::string top = pos == std::string::npos ? "_root" : fs.path.substr(0, pos);
            ++dir_files[top];
            payload += fs.path + "\n" + payload_of_phrases(fs.phrases);
        }
        std::vector<std::pair<std::string, int>> ranked(dir_files.begin(), dir_files.end());
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        std::set<std::string> seen;
        std::vector<std::string> areas;
        for (const auto& [dir, count] : ranked) {
            (void)count;
            if (areas.size() >= 12) break;
            std::string label = to_pascal_case(dir);
            if (label.empty()) label = "Root";
            if (seen.insert(label).second) areas.push_back(label);
        }
        std::sort(areas.begin(), areas.end());
        bill("discover_domains", payload, payload_of_phrases(areas));
        return areas;
    }

    std::map<std::string, std::vector<std::string>> assign_paths(
        const std::vector<GroupSummary>& groups, const std::vector<std::string>& areas) override {
        if (areas.empty()) {
            throw ProviderError("assign_paths requires at least one area");
        }
        std::map<std::string, std::vector<std::string>> out;
        std::string payload;
        for (const auto& group : groups) {
            payload += group.id + "\n" + payload_of_phrases(group.phrases);
            // most similar area by token overlap; ties by area name
            std::vector<std::string> group_tokens = tokenize_identifier(group.id);
            TokenBag bag = token_bag(group.phrases);
            for (const auto& tok : group_tokens) ++bag[tok];
            std::string best_area = areas.front();
            double best = -1.0;
            for (const auto& area : areas) {
                double sim = jaccard(bag, token_bag({label_phrase(area)}));
                if (sim > best || (sim == best && area < best_area)) {
                    best = sim;
                    best_area = area;
                }
            }
            std::string category =
                !group.phrases.empty() ? group.phrases.front() : label_phrase(group.id);
            std::string subcategory =
                group.phrases.size() > 1 ? group.phrases[1] : label_phrase(group.id);
            std::string path = best_area + "/" + category + "/" + subcategory;
            out[path].push_back(group.id);
        }
        std::string completion;
        for (const auto& [path, ids] : out) completion += path + "\n";
        bill("assign_paths", payload, completion);
        return out;
    }

    std::optional<std::string> route(const std::vector<RouteCandidate>& candidates,
                                     const std::vector<FeaturePhrase>& target) override {
        if (candidates.empty()) {
            throw ProviderError("route requires candidates");
        }
        TokenBag target_bag = token_bag(target);
        std::string payload = payload_of_phrases(target);
        std::optional<std::string> best_id;
        double best = -1.0;
        for (const auto& candidate : candidates) {
            payload += candidate.id + "\n" + payload_of_phrases(candidate.phrases);
            double sim = jaccard(target_bag, token_bag(candidate.phrases));
            if (sim > best || (sim == best && best_id && candidate.id < *best_id)) {
                best = sim;
                best_id = candidate.id;
            }
        }
        if (best < options_.min_similarity) {
            best_id.reset();
        }
        bill("route", payload, best_id ? *best_id : "none");
        return best_id;
    }

    double judge_drift(const std::vector<FeaturePhrase>& old_phrases,
                       const std::vector<FeaturePhrase>& new_phrases) override {
        double drift = 1.0 - jaccard(token_bag(old_phrases), token_bag(new_phrases));
        bill("judge_drift", payload_of_phrases(old_phrases) + payload_of_phrases(new_phrases),
             std::to_string(drift));
        return drift;
    }
};

}  // namespace

std::vector<FeaturePhrase> derive_phrases(const EntityRef& entity) {
    if (!entity.qualified_name) {
        return {};
    }
    const std::string& qualified = *entity.qualified_name;
    size_t dot = qualified.rfind('.');
    std::string name = dot == std::string::npos ? qualified : qualified.substr(dot + 1);
    std::string context = dot == std::string::npos ? "" : qualified.substr(0, dot);

    auto tokens = tokenize_identifier(name);
    if (tokens.empty()) {
        return {};
    }
    std::string verb;
    size_t object_from = 0;
    if (auto it = verb_remap().find(tokens.front()); it != verb_remap().end()) {
        verb = it->second;
        object_from = 1;
    } else if (known_verbs().count(tokens.front()) != 0) {
        verb = tokens.front();
        object_from = 1;
    } else {
        verb = "define";
    }
    std::string object = join_tokens(tokens, object_from, 7);
    if (object.empty() && !context.empty()) {
        // bare verb: fall back to the innermost enclosing name as the object
        size_t inner_dot = context.rfind('.');
        std::string inner =
            inner_dot == std::string::npos ? context : context.substr(inner_dot + 1);
        object = join_tokens(tokenize_identifier(inner), 0, 7);
    }
    std::string phrase = object.empty() ? verb : verb + " " + object;
    auto normalized = normalize_feature(phrase);
    return normalized ? std::vector<FeaturePhrase>{*normalized} : std::vector<FeaturePhrase>{};
}

std::unique_ptr<SemanticProvider> make_deterministic_provider(ProviderOptions options) {
    return std::make_unique<DeterministicProvider>(std::move(options));
}

}  // namespace rpg
