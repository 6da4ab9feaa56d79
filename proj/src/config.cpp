#include "rpg/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace rpg {

namespace {

void flatten(const json& value, const std::string& prefix,
             std::map<std::string, json>& out) {
    if (value.is_object()) {
        for (const auto& [key, child] : value.items()) {
            flatten(child, prefix.empty() ? key : prefix + "." + key, out);
        }
    } else {
        out[prefix] = value;
    }
}

}  // namespace

Config parse_config(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    std::map<std::string, json> flat;
    flatten(doc, "", flat);

    Config config;
    for (const auto& [key, value] : flat) {
        try {
            if (key == "provider.kind") {
                config.provider_kind = value.get<std::string>();
                if (config.provider_kind != "deterministic" && config.provider_kind != "remote") {
                    throw ConfigError("provider.kind must be deterministic or remote");
                }
            } else if (key == "provider.endpoint") {
                config.provider_endpoint = value.get<std::string>();
            } else if (key == "provider.model") {
                config.provider_model = value.get<std::string>();
            } else if (key == "provider.max_payload_tokens") {
                config.provider_max_payload_tokens = value.get<int>();
            } else if (key == "provider.retries") {
                config.provider_retries = value.get<int>();
            } else if (key == "evolution.tau_drift") {
                config.evolution_tau_drift = value.get<double>();
            } else if (key == "routing.min_similarity") {
                config.routing_min_similarity = value.get<double>();
            } else if (key == "extractor.min_scope_depth") {
                config.extractor_min_scope_depth = value.get<int>();
            } else if (key == "paths.graph") {
                config.graph_path = value.get<std::string>();
            } else if (key == "paths.diagnostics") {
                config.diagnostics_path = value.get<std::string>();
            } else {
                throw ConfigError("unknown config key: " + key);
            }
        } catch (const json::exception& e) {
            throw ConfigError("bad value for " + key + ": " + e.what());
        }
    }
    return config;
}

Config resolve_config(const std::optional<std::string>& explicit_path) {
    std::string path;
    if (explicit_path) {
        path = *explicit_path;
    } else if (const char* env = std::getenv("RPG_CONFIG")) {
        path = env;
    }
    if (path.empty()) {
        return Config{};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

ProviderOptions provider_options(const Config& config) {
    ProviderOptions options;
    options.budget.max_payload_tokens = config.provider_max_payload_tokens;
    options.retries = config.provider_retries;
    options.min_similarity = config.routing_min_similarity;
    options.endpoint = config.provider_endpoint;
    options.model = config.provider_model;
    return options;
}

EvolutionOptions evolution_options(const Config& config) {
    EvolutionOptions options;
    options.tau_drift = config.evolution_tau_drift;
    options.min_scope_depth = config.extractor_min_scope_depth;
    return options;
}

std::unique_ptr<SemanticProvider> make_provider(const Config& config) {
    if (config.provider_kind == "remote") {
        if (config.provider_endpoint.empty()) {
            throw ConfigError("remote provider requires provider.endpoint");
        }
        return make_remote_provider(provider_options(config));
    }
    return make_deterministic_provider(provider_options(config));
}

}  // namespace rpg
