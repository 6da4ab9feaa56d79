#include "rpg/evalkit.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace rpg {

namespace {

const std::string kInitSuffix = ".__init__";

std::vector<std::string> dedup_ordered(const std::vector<std::string>& entries) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& entry : entries) {
        if (seen.insert(entry).second) out.push_back(entry);
    }
    return out;
}

int hits_in_prefix(const LocalizationInstance& instance, size_t limit) {
    std::set<std::string> gold(instance.gold.begin(), instance.gold.end());
    int hits = 0;
    for (size_t j = 0; j < instance.predictions.size() && j < limit; ++j) {
        if (gold.count(instance.predictions[j]) != 0) ++hits;
    }
    return hits;
}

}  // namespace

std::string canonicalize(const std::string& path, const std::optional<std::string>& entity,
                         Granularity granularity) {
    if (path.empty()) {
        throw EvalError("canonicalize requires a nonempty path");
    }
    if (granularity == Granularity::File) {
        return path;
    }
    if (!entity || entity->empty()) {
        throw EvalError("function granularity requires an entity name: " + path);
    }
    std::string name = *entity;
    if (name.size() > kInitSuffix.size() &&
        name.compare(name.size() - kInitSuffix.size(), kInitSuffix.size(), kInitSuffix) == 0) {
        name.resize(name.size() - kInitSuffix.size());
    }
    return path + ":" + name;
}

std::optional<std::string> canonicalize_key(const std::string& raw, Granularity granularity) {
    auto colon = raw.find(':');
    std::string path = colon == std::string::npos ? raw : raw.substr(0, colon);
    std::optional<std::string> entity;
    if (colon != std::string::npos && colon + 1 < raw.size()) {
        entity = raw.substr(colon + 1);
    }
    if (path.empty()) return std::nullopt;
    if (granularity == Granularity::Function && !entity) return std::nullopt;
    return canonicalize(path, entity, granularity);
}

double acc_at_k(const std::vector<LocalizationInstance>& instances, int k) {
    if (k < 1) {
        throw EvalError("k must be >= 1");
    }
    if (instances.empty()) {
        throw EvalError("acc_at_k over an empty instance set");
    }
    double sum = 0.0;
    for (const auto& instance : instances) {
        sum += hits_in_prefix(instance, static_cast<size_t>(k)) >= 1 ? 1.0 : 0.0;
    }
    return sum / static_cast<double>(instances.size());
}

double precision(const std::vector<LocalizationInstance>& instances) {
    if (instances.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& instance : instances) {
        if (instance.predictions.empty()) continue;  // empty list contributes 0
        sum += static_cast<double>(hits_in_prefix(instance, instance.predictions.size())) /
               static_cast<double>(instance.predictions.size());
    }
    return sum / static_cast<double>(instances.size());
}

double recall(const std::vector<LocalizationInstance>& instances) {
    if (instances.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& instance : instances) {
        if (instance.gold.empty()) continue;  // |G_i| = 0 contributes 0
        sum += static_cast<double>(hits_in_prefix(instance, instance.predictions.size())) /
               static_cast<double>(instance.gold.size());
    }
    return sum / static_cast<double>(instances.size());
}

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw EvalError("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json doc = json::parse(buffer.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) {
        throw EvalError("expected a JSON array: " + path);
    }
    return doc;
}

}  // namespace

ScoreReport score_run(const std::string& gold_file, const std::string& pred_file,
                      Granularity granularity, std::optional<int> top_n) {
    json gold_doc = load_json_file(gold_file);
    json pred_doc = load_json_file(pred_file);

    ScoreReport report;
    auto keys_of = [&](const json& item, const char* field,
                       std::vector<std::string>& out) {
        if (!item.contains(field) || !item[field].is_array()) return;
        for (const auto& raw : item[field]) {
            if (!raw.is_string()) continue;
            if (auto key = canonicalize_key(raw.get<std::string>(), granularity)) {
                out.push_back(*key);
            } else {
                ++report.dropped_entries;
            }
        }
    };

    std::map<std::string, LocalizationInstance> by_id;
    for (const auto& item : gold_doc) {
        if (!item.is_object() || !item.contains("instance_id")) continue;
        LocalizationInstance instance;
        instance.instance_id = item["instance_id"].get<std::string>();
        keys_of(item, "gold", instance.gold);
        instance.gold = dedup_ordered(instance.gold);
        by_id[instance.instance_id] = std::move(instance);
    }

    std::vector<LocalizationInstance> instances;
    for (const auto& item : pred_doc) {
        if (!item.is_object() || !item.contains("instance_id")) continue;
        std::string id = item["instance_id"].get<std::string>();
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            ++report.mismatched_ids;
            continue;
        }
        LocalizationInstance instance = it->second;
        keys_of(item, "predictions", instance.predictions);
        if (top_n && instance.predictions.size() > static_cast<size_t>(*top_n)) {
            instance.predictions.resize(static_cast<size_t>(*top_n));
        }
        instance.predictions = dedup_ordered(instance.predictions);
        instances.push_back(std::move(instance));
        by_id.erase(it);
    }
    report.mismatched_ids += static_cast<int>(by_id.size());  // gold without predictions

    if (instances.empty()) {
        throw EvalError("no aligned instances between gold and prediction files");
    }
    report.instances = static_cast<int>(instances.size());
    report.acc_at_1 = acc_at_k(instances, 1);
    report.acc_at_5 = acc_at_k(instances, 5);
    report.precision = precision(instances);
    report.recall = recall(instances);
    return report;
}

}  // namespace rpg
