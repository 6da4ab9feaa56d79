#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rpg {

// A normalized semantic feature phrase: lowercase, no punctuation,
// single-spaced, 1..8 words.
using FeaturePhrase = std::string;

// Multiset of lowercase tokens, token -> count.
using TokenBag = std::map<std::string, int>;

// Lowercase + strip punctuation + collapse whitespace. Phrases longer than
// 12 words are rejected (nullopt); phrases of 9..12 words are truncated to
// the first 8.
std::optional<FeaturePhrase> normalize_feature(const std::string& raw);

bool is_normalized_feature(const std::string& phrase);

// Splits an identifier into lowercase word tokens: snake_case, kebab-case,
// camelCase and digit boundaries all separate words. "parseHTTPResponse"
// -> {"parse", "http", "response"}.
std::vector<std::string> tokenize_identifier(const std::string& name);

// Word tokens of an already normalized phrase.
std::vector<std::string> phrase_tokens(const std::string& phrase);

TokenBag token_bag(const std::vector<FeaturePhrase>& phrases);

// Multiset Jaccard similarity: sum(min)/sum(max); 1.0 when both empty.
double jaccard(const TokenBag& a, const TokenBag& b);

// "linear_model" -> "LinearModel"
std::string to_pascal_case(const std::string& name);

// "DataProcessing" -> "data processing" (tokenized, space-joined).
std::string label_phrase(const std::string& label);

// Order-preserving dedup.
std::vector<FeaturePhrase> dedup_phrases(std::vector<FeaturePhrase> phrases);

}  // namespace rpg
