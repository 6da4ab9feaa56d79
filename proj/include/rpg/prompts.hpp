#pragma once

#include <string>

namespace rpg::prompts {

// Chat payload templates for the remote backend. `{repo_name}` and
// `{repo_info}` placeholders are substituted before sending; every template
// demands its answer inside a <solution> block.
const std::string& semantic_parsing();
const std::string& domain_discovery();
const std::string& hierarchical_construction();
const std::string& file_summary();
const std::string& routing();
const std::string& drift_judgment();

std::string instantiate(const std::string& tmpl, const std::string& repo_name,
                        const std::string& repo_info);

// Extracts the payload between <solution> and </solution>, if any.
std::string solution_block(const std::string& response);

}  // namespace rpg::prompts
