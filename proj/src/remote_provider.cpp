#include <algorithm>
#include <cctype>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "rpg/prompts.hpp"
#include "rpg/provider.hpp"

using nlohmann::json;

namespace rpg {

namespace {

struct Endpoint {
    std::string base;  // scheme://host:port
    std::string path;  // /v1/chat/completions
};

Endpoint split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    size_t path_start =
        scheme_end == std::string::npos ? url.find('/') : url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string phrases_text(const std::vector<FeaturePhrase>& phrases) {
    std::string out;
    for (const auto& p : phrases) {
        out += "- " + p + "\n";
    }
    return out;
}

class RemoteProvider final : public SemanticProvider {
public:
    explicit RemoteProvider(ProviderOptions options) : SemanticProvider(std::move(options)) {
        endpoint_ = split_endpoint(options_.endpoint);
    }

    std::map<EntityRef, std::vector<FeaturePhrase>> parse_features(
        const std::vector<ParseItem>& batch) override {
        std::string listing;
        for (const auto& item : batch) {
            listing += "### " + item.entity.key() + "\n" + item.source + "\n";
        }
        std::string prompt =
            prompts::instantiate(prompts::semantic_parsing(), "subject repository", listing);

        std::map<EntityRef, std::vector<FeaturePhrase>> out;
        for (const auto& item : batch) {
            out[item.entity] = {};
        }
        auto solution = call("parse_features", prompt);
        if (!solution) {
            for (const auto& item : batch) {
                note(item.entity.key(), "feature parsing fell back to empty list");
            }
            return out;
        }
        json parsed = json::parse(*solution, nullptr, false);
        if (!parsed.is_object()) {
            for (const auto& item : batch) {
                note(item.entity.key(), "feature parsing fell back to empty list");
            }
            return out;
        }
        for (const auto& item : batch) {
            auto it = parsed.find(item.entity.key());
            if (it == parsed.end() && item.entity.qualified_name) {
                // tolerate bare names in the reply
                it = parsed.find(*item.entity.qualified_name);
            }
            if (it == parsed.end() || !it->is_array()) {
                note(item.entity.key(), "missing from provider reply; empty feature list");
                continue;
            }
            std::vector<FeaturePhrase> phrases;
            for (const auto& raw : *it) {
                if (!raw.is_string()) continue;
                if (auto normalized = normalize_feature(raw.get<std::string>())) {
                    phrases.push_back(*normalized);
                } else {
                    note(item.entity.key(), "rejected oversized feature phrase");
                }
            }
            out[item.entity] = dedup_phrases(std::move(phrases));
        }
        return out;
    }

    std::vector<FeaturePhrase> summarize_file(
        const std::string& path, const std::vector<FeaturePhrase>& child_phrases) override {
        std::string prompt =
            prompts::instantiate(prompts::file_summary(), path, phrases_text(child_phrases));
        auto solution = call("summarize_file", prompt);
        if (solution) {
            json parsed = json::parse(*solution, nullptr, false);
            if (parsed.is_array()) {
                std::vector<FeaturePhrase> phrases;
                for (const auto& raw : parsed) {
                    if (!raw.is_string()) continue;
                    if (auto normalized = normalize_feature(raw.get<std::string>())) {
                        phrases.push_back(*normalized);
                    }
                }
                return dedup_phrases(std::move(phrases));
            }
        }
        note(path, "file summary fell back to member phrases");
        std::vector<FeaturePhrase> fallback = dedup_phrases(child_phrases);
        if (fallback.size() > 8) fallback.resize(8);
        return fallback;
    }

    std::vector<std::string> discover_domains(
        const std::vector<FileSummaryInput>& file_summaries) override {
        if (file_summaries.empty()) {
            throw ProviderError("nothing to organize: no file summaries");
        }
        std::string listing;
        for (const auto& fs : file_summaries) {
            listing += fs.path + ":\n" + phrases_text(fs.phrases);
        }
        std::string prompt =
            prompts::instantiate(prompts::domain_discovery(), "subject repository", listing);
        auto solution = call("discover_domains", prompt);
        if (!solution) {
            throw ProviderError("domain discovery failed after retries");
        }
        json parsed = json::parse(*solution, nullptr, false);
        if (!parsed.is_array()) {
            throw ProviderError("domain discovery returned no area list");
        }
        std::vector<std::string> areas;
        for (const auto& raw : parsed) {
            if (!raw.is_string()) continue;
            std::string area = to_pascal_case(raw.get<std::string>());
            if (!area.empty() && std::find(areas.begin(), areas.end(), area) == areas.end()) {
                areas.push_back(area);
            }
        }
        if (areas.empty()) {
            throw ProviderError("domain discovery returned no usable areas");
        }
        if (areas.size() > 12) areas.resize(12);
        return areas;
    }

    std::map<std::string, std::vector<std::string>> assign_paths(
        const std::vector<GroupSummary>& groups, const std::vector<std::string>& areas) override {
        if (areas.empty()) {
            throw ProviderError("assign_paths requires at least one area");
        }
        std::string listing = "<functional_areas>\n";
        for (const auto& area : areas) listing += area + "\n";
        listing += "</functional_areas>\n<parsed_folder_tree>\n";
        for (const auto& group : groups) {
            listing += group.id + ":\n" + phrases_text(group.phrases);
        }
        listing += "</parsed_folder_tree>\n";
        std::string prompt = prompts::instantiate(prompts::hierarchical_construction(),
                                                  "subject repository", listing);

        std::map<std::string, std::vector<std::string>> result;
        std::set<std::string> assigned;
        auto solution = call("assign_paths", prompt, [&](const std::string& body) {
            json parsed = json::parse(body, nullptr, false);
            if (!parsed.is_object()) return false;
            // reject replies naming unknown areas; retry instead
            for (const auto& [path, ids] : parsed.items()) {
                auto slash = path.find('/');
                std::string area = slash == std::string::npos ? path : path.substr(0, slash);
                if (std::find(areas.begin(), areas.end(), area) == areas.end()) return false;
                if (!ids.is_array()) return false;
            }
            return true;
        });
        if (solution) {
            json parsed = json::parse(*solution, nullptr, false);
            for (const auto& [raw_path, ids] : parsed.items()) {
                auto segments = split_solution_path(raw_path);
                if (segments.empty()) continue;
                for (const auto& id : ids) {
                    if (!id.is_string()) continue;
                    result[segments_to_path(segments)].push_back(id.get<std::string>());
                    assigned.insert(id.get<std::string>());
                }
            }
        }
        // fallback: any group the reply dropped goes to its most similar area
        for (const auto& group : groups) {
            if (assigned.count(group.id) != 0) continue;
            TokenBag bag = token_bag(group.phrases);
            for (const auto& tok : tokenize_identifier(group.id)) ++bag[tok];
            std::string best_area = areas.front();
            double best = -1.0;
            for (const auto& area : areas) {
                double sim = jaccard(bag, token_bag({label_phrase(area)}));
                if (sim > best) {
                    best = sim;
                    best_area = area;
                }
            }
            std::string category =
                !group.phrases.empty() ? group.phrases.front() : label_phrase(group.id);
            std::string subcategory =
                group.phrases.size() > 1 ? group.phrases[1] : label_phrase(group.id);
            result[best_area + "/" + category + "/" + subcategory].push_back(group.id);
            note(group.id, "path assignment fallback to most similar area");
        }
        return result;
    }

    std::optional<std::string> route(const std::vector<RouteCandidate>& candidates,
                                     const std::vector<FeaturePhrase>& target) override {
        if (candidates.empty()) {
            throw ProviderError("route requires candidates");
        }
        std::string listing;
        for (const auto& candidate : candidates) {
            listing += candidate.id + ":\n" + phrases_text(candidate.phrases);
        }
        std::string prompt =
            prompts::instantiate(prompts::routing(), phrases_text(target), listing);
        auto solution = call("route", prompt);
        if (!solution) {
            note("route", "routing fell back to no-fit after retries");
            return std::nullopt;
        }
        json parsed = json::parse(*solution, nullptr, false);
        if (!parsed.is_object() || !parsed.contains("choice")) {
            return std::nullopt;
        }
        if (parsed["choice"].is_null()) return std::nullopt;
        std::string choice = parsed["choice"].get<std::string>();
        for (const auto& candidate : candidates) {
            if (candidate.id == choice) return choice;
        }
        return std::nullopt;
    }

    double judge_drift(const std::vector<FeaturePhrase>& old_phrases,
                       const std::vector<FeaturePhrase>& new_phrases) override {
        std::string prompt = prompts::instantiate(prompts::drift_judgment(),
                                                  phrases_text(old_phrases),
                                                  phrases_text(new_phrases));
        auto solution = call("judge_drift", prompt);
        if (solution) {
            json parsed = json::parse(*solution, nullptr, false);
            if (parsed.is_object() && parsed.contains("drift") && parsed["drift"].is_number()) {
                return std::clamp(parsed["drift"].get<double>(), 0.0, 1.0);
            }
        }
        note("judge_drift", "drift judgment fell back to token overlap");
        return 1.0 - jaccard(token_bag(old_phrases), token_bag(new_phrases));
    }

private:
    static std::vector<std::string> split_solution_path(const std::string& path) {
        std::vector<std::string> segments;
        std::string current;
        for (char c : path) {
            if (c == '/') {
                segments.push_back(current);
                current.clear();
            } else {
                current.push_back(c);
            }
        }
        segments.push_back(current);
        if (segments.size() != 3) return {};
        return segments;
    }

    static std::string segments_to_path(const std::vector<std::string>& segments) {
        return segments[0] + "/" + segments[1] + "/" + segments[2];
    }

    // POSTs one chat request; retries on transport failures and malformed
    // replies; returns the <solution> body or nullopt once retries run out.
    std::optional<std::string> call(
        const std::string& op, const std::string& user_content,
        const std::function<bool(const std::string&)>& acceptable = nullptr) {
        json request = {
            {"model", options_.model},
            {"messages", json::array({json{{"role", "user"}, {"content", user_content}}})},
        };
        std::string body = request.dump();

        int attempts = std::max(1, options_.retries);
        std::string last_error = "no attempts made";
        for (int attempt = 0; attempt < attempts; ++attempt) {
            httplib::Client client(endpoint_.base);
            client.set_read_timeout(30, 0);
            auto response = client.Post(endpoint_.path, body, "application/json");
            if (!response || response->status != 200) {
                last_error = response ? "status " + std::to_string(response->status)
                                      : "transport failure";
                continue;
            }
            bill(op, user_content, response->body);
            std::string content = response->body;
            json reply = json::parse(content, nullptr, false);
            if (reply.is_object() && reply.contains("choices") && reply["choices"].is_array() &&
                !reply["choices"].empty()) {
                const auto& message = reply["choices"][0];
                if (message.contains("message") && message["message"].contains("content")) {
                    content = message["message"]["content"].get<std::string>();
                }
            }
            std::string solution = prompts::solution_block(content);
            if (solution.empty()) {
                last_error = "reply without <solution> block";
                continue;
            }
            if (acceptable && !acceptable(solution)) {
                last_error = "reply failed validation";
                continue;
            }
            return solution;
        }
        note(op, "remote call failed: " + last_error);
        if (last_error == "transport failure" || last_error.rfind("status ", 0) == 0) {
            throw ProviderError(op + ": " + last_error + " after " + std::to_string(attempts) +
                                " attempts");
        }
        return std::nullopt;
    }

    Endpoint endpoint_;
};

}  // namespace

std::unique_ptr<SemanticProvider> make_remote_provider(ProviderOptions options) {
    return std::make_unique<RemoteProvider>(std::move(options));
}

}  // namespace rpg
