#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpg {

enum class Granularity { File, Function };

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical location key: the relative path at file granularity,
// "path:entity" at function granularity with a single trailing ".__init__"
// stripped from the entity.
std::string canonicalize(const std::string& path, const std::optional<std::string>& entity,
                         Granularity granularity);

// Parses a "path[:entity]" location string and canonicalizes it.
// Function-granularity strings without an entity part are rejected.
std::optional<std::string> canonicalize_key(const std::string& raw, Granularity granularity);

struct LocalizationInstance {
    std::string instance_id;
    std::vector<std::string> gold;         // deduplicated, order preserved
    std::vector<std::string> predictions;  // deduplicated, order preserved
};

double acc_at_k(const std::vector<LocalizationInstance>& instances, int k);
double precision(const std::vector<LocalizationInstance>& instances);
double recall(const std::vector<LocalizationInstance>& instances);

struct ScoreReport {
    double acc_at_1 = 0.0;
    double acc_at_5 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    int instances = 0;
    int mismatched_ids = 0;
    int dropped_entries = 0;
};

// Scores a prediction file against a gold file (JSON arrays of
// {instance_id, gold:[...], predictions:[...]}), canonicalizing and
// deduplicating both sides. `top_n` truncates each prediction list first.
ScoreReport score_run(const std::string& gold_file, const std::string& pred_file,
                      Granularity granularity, std::optional<int> top_n = std::nullopt);

}  // namespace rpg
