#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "rpg/evolution.hpp"
#include "rpg/provider.hpp"

namespace rpg {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string provider_kind = "deterministic";  // deterministic | remote
    std::string provider_endpoint;
    std::string provider_model;
    int provider_max_payload_tokens = 12000;
    int provider_retries = 3;
    double evolution_tau_drift = 0.5;
    double routing_min_similarity = 0.2;
    int extractor_min_scope_depth = 1;
    std::string graph_path = "rpg.json";
    std::string diagnostics_path;
};

// Parses a JSON config document. Both nested objects and flat dotted keys
// are accepted ({"provider": {"kind": ...}} or {"provider.kind": ...}).
// Unknown keys are rejected.
Config parse_config(const std::string& text);

// Loads `explicit_path` when given, else $RPG_CONFIG, else defaults.
Config resolve_config(const std::optional<std::string>& explicit_path);

ProviderOptions provider_options(const Config& config);
EvolutionOptions evolution_options(const Config& config);
std::unique_ptr<SemanticProvider> make_provider(const Config& config);

}  // namespace rpg
