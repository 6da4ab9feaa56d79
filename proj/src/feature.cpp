#include "rpg/feature.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

namespace rpg {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        words.push_back(word);
    }
    return words;
}

}  // namespace

std::optional<FeaturePhrase> normalize_feature(const std::string& raw) {
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (char c : raw) {
        if (is_word_char(c)) {
            cleaned.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
            cleaned.push_back(' ');
        }
        // other punctuation is stripped entirely
    }
    auto words = split_words(cleaned);
    if (words.empty() || words.size() > 12) {
        return std::nullopt;
    }
    if (words.size() > 8) {
        words.resize(8);
    }
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

bool is_normalized_feature(const std::string& phrase) {
    auto n = normalize_feature(phrase);
    return n.has_value() && *n == phrase;
}

std::vector<std::string> tokenize_identifier(const std::string& name) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (size_t i = 0; i < name.size(); ++i) {
        char c = name[i];
        if (!is_word_char(c)) {
            flush();
            continue;
        }
        bool upper = std::isupper(static_cast<unsigned char>(c)) != 0;
        if (upper && !current.empty()) {
            // camel boundary: lower->Upper, or end of an acronym run (HTTPServer)
            char prev = name[i - 1];
            bool prev_upper = std::isupper(static_cast<unsigned char>(prev)) != 0;
            bool next_lower =
                i + 1 < name.size() && std::islower(static_cast<unsigned char>(name[i + 1])) != 0;
            if (!prev_upper || next_lower) {
                flush();
            }
        }
        current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    flush();
    return tokens;
}

std::vector<std::string> phrase_tokens(const std::string& phrase) {
    return split_words(phrase);
}

TokenBag token_bag(const std::vector<FeaturePhrase>& phrases) {
    TokenBag bag;
    for (const auto& phrase : phrases) {
        for (const auto& tok : split_words(phrase)) {
            ++bag[tok];
        }
    }
    return bag;
}

double jaccard(const TokenBag& a, const TokenBag& b) {
    if (a.empty() && b.empty()) {
        return 1.0;
    }
    long long inter = 0;
    long long uni = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            uni += ia->second;
            ++ia;
        } else if (ia == a.end() || ib->first < ia->first) {
            uni += ib->second;
            ++ib;
        } else {
            inter += std::min(ia->second, ib->second);
            uni += std::max(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string to_pascal_case(const std::string& name) {
    std::string out;
    for (const auto& tok : tokenize_identifier(name)) {
        std::string word = tok;
        word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        out += word;
    }
    return out;
}

std::string label_phrase(const std::string& label) {
    std::string joined;
    for (const auto& tok : tokenize_identifier(label)) {
        if (!joined.empty()) joined.push_back(' ');
        joined += tok;
    }
    auto n = normalize_feature(joined);
    return n.value_or(joined);
}

std::vector<FeaturePhrase> dedup_phrases(std::vector<FeaturePhrase> phrases) {
    std::unordered_set<std::string> seen;
    std::vector<FeaturePhrase> out;
    out.reserve(phrases.size());
    for (auto& p : phrases) {
        if (seen.insert(p).second) {
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace rpg
