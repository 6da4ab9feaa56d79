#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpg/entity.hpp"
#include "rpg/feature.hpp"

namespace rpg {

// chars/4, rounded up; any monotone estimator works here.
int estimate_tokens(const std::string& text);

struct ProviderBudget {
    int max_payload_tokens = 12000;
};

struct StageCounters {
    long long request_count = 0;
    long long prompt_tokens_est = 0;
    long long completion_tokens_est = 0;

    bool operator==(const StageCounters&) const = default;
};

class TokenAccount {
public:
    void set_stage(const std::string& stage) { stage_ = stage; }
    const std::string& stage() const { return stage_; }
    void record(long long prompt_est, long long completion_est);
    void reset_stage(const std::string& stage) { per_stage_.erase(stage); }

    StageCounters stage_counters(const std::string& stage) const;
    StageCounters total() const;
    const std::map<std::string, StageCounters>& per_stage() const { return per_stage_; }

private:
    std::string stage_ = "default";
    std::map<std::string, StageCounters> per_stage_;
};

struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BatchItem {
    std::string name;
    int tokens = 0;
};

// Greedy first-fit partition in the given order; every batch fits the
// budget. An item that alone exceeds the budget is an error.
std::vector<std::vector<size_t>> make_batches(const std::vector<BatchItem>& items,
                                              const ProviderBudget& budget);

struct ParseItem {
    EntityRef entity;
    std::string source;
};

struct FileSummaryInput {
    std::string path;
    std::vector<FeaturePhrase> phrases;
};

struct GroupSummary {
    std::string id;  // top-level directory ("_root" for repo-root files)
    std::vector<std::string> member_files;
    std::vector<FeaturePhrase> phrases;  // aggregate, most frequent first
};

struct RouteCandidate {
    std::string id;
    std::vector<FeaturePhrase> phrases;
};

struct PayloadRecord {
    std::string stage;
    std::string op;
    std::string payload;
};

struct ProviderOptions {
    ProviderBudget budget;
    int retries = 3;
    double min_similarity = 0.2;
    std::string endpoint;  // remote backend only
    std::string model;
};

// Every semantic judgment of the pipeline goes through this interface:
// feature parsing, file summarization, domain discovery, path assignment,
// routing and drift scoring. The deterministic backend keeps the whole
// pipeline runnable and testable offline.
class SemanticProvider {
public:
    virtual ~SemanticProvider() = default;

    virtual std::map<EntityRef, std::vector<FeaturePhrase>> parse_features(
        const std::vector<ParseItem>& batch) = 0;
    virtual std::vector<FeaturePhrase> summarize_file(
        const std::string& path, const std::vector<FeaturePhrase>& child_phrases) = 0;
    virtual std::vector<std::string> discover_domains(
        const std::vector<FileSummaryInput>& file_summaries) = 0;
    virtual std::map<std::string, std::vector<std::string>> assign_paths(
        const std::vector<GroupSummary>& groups, const std::vector<std::string>& areas) = 0;
    virtual std::optional<std::string> route(const std::vector<RouteCandidate>& candidates,
                                             const std::vector<FeaturePhrase>& target) = 0;
    virtual double judge_drift(const std::vector<FeaturePhrase>& old_phrases,
                               const std::vector<FeaturePhrase>& new_phrases) = 0;

    TokenAccount& account() { return account_; }
    const TokenAccount& account() const { return account_; }
    void set_stage(const std::string& stage) { account_.set_stage(stage); }

    void enable_payload_log(bool on) { record_payloads_ = on; }
    const std::vector<PayloadRecord>& payload_log() const { return payload_log_; }

    const ProviderOptions& options() const { return options_; }

    // Per-group fallback decisions, malformed-response notes and the like.
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

protected:
    explicit SemanticProvider(ProviderOptions options) : options_(std::move(options)) {}

    void bill(const std::string& op, const std::string& payload, const std::string& completion);
    void note(const std::string& path, const std::string& issue);

    ProviderOptions options_;

private:
    TokenAccount account_;
    bool record_payloads_ = false;
    std::vector<PayloadRecord> payload_log_;
    std::vector<Diagnostic> diagnostics_;
};

// Rule-based backend: identifier tokenization plus a verb table; routing
// and drift are token-bag Jaccard scores. Stable across runs.
std::unique_ptr<SemanticProvider> make_deterministic_provider(ProviderOptions options = {});

// Chat-endpoint backend speaking {model, messages:[{role,content}]} and
// reading the <solution> block out of each response.
std::unique_ptr<SemanticProvider> make_remote_provider(ProviderOptions options);

// Deterministic single-entity phrase derivation (exposed for tests).
std::vector<FeaturePhrase> derive_phrases(const EntityRef& entity);

}  // namespace rpg
