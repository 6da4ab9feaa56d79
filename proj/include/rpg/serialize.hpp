#pragma once

#include <stdexcept>
#include <string>

#include "rpg/graph.hpp"

namespace rpg {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical JSON document: object keys and all arrays sorted, so equal
// graphs serialize to identical bytes.
std::string serialize(const RpgGraph& g);

// Inverse of serialize. Throws ParseError naming the offending location.
RpgGraph deserialize(const std::string& text);

RpgGraph load_graph_file(const std::string& path);
void save_graph_file(const RpgGraph& g, const std::string& path);

}  // namespace rpg
