#include "rpg/prompts.hpp"

namespace rpg::prompts {

const std::string& semantic_parsing() {
    static const std::string text = R"PROMPT(## Instruction
You are a senior software analyst.
Your goal is to analyze all functions in the current input and return their key semantic features -- what each function does, not how it's implemented.

### Key Goals
- Complete analysis: Provide semantic feature extraction for every function in the given input. Do not skip any function.
- Batch perspective: Analyze all functions in the chunk together, considering their roles within the overall system.
- High-level behavior: Focus on the purpose and role of each function, not on low-level implementation details.
- If multiple definitions share the same method name (e.g., property getter and setter for the same attribute), you may output that method name only once and merge their semantic features; you do not need to distinguish decorator variants.

## Feature Extraction Principles
Follow these principles when analyzing functions:
1. Focus on the purpose and behavior of the function -- what role it serves in the system.
2. Do NOT describe implementation details, variable names, or internal logic such as loops, conditionals, or data structures.
3. If a function performs multiple responsibilities, break them down into separate features.
4. Use your understanding of each function's name, signature, and code to infer its intent.
5. Only analyze functions included in the current input -- do not guess or invent other functions.
6. Do not omit any function, including utility or helper functions.

### Feature Naming Rules:
1. Use verb + object format (e.g., `load config`, `validate token`).
2. Use lowercase English only.
3. Describe purpose not implementation (focus on what, not how).
4. Each feature must express one single responsibility.
5. If a method has multiple responsibilities, split into multiple atomic features.
6. Keep features short and atomic (prefer 3--8 words; no full sentences; no punctuation).
7. Avoid vague verbs (`handle`, `process`, `deal with`); prefer precise verbs (`load`, `validate`, `convert`, `update`, `serialize`, `compute`, `check`, `transform`).
8. Avoid implementation details (no loops, conditionals, data structures, control flow).
9. Avoid libraries/frameworks/formats (say `serialize data`, not `pickle object` / `save to json`).
10. Prefer domain/system semantics over low-level actions (`manage session` > `update dict`).
11. Avoid chaining actions (don't write `initialize config and register globally`; split into separate features).

## Output Format
You must respond with the following structure:
A `<solution>` block -- a JSON object mapping each function name to a list of its semantic features.
If a function does not implement any meaningful features (e.g., it's a stub), still include it with an empty list.

### Output Template:
<solution>
{{
  "func_name_1": ["feature one", "feature two"],
  "func_name_2": [],
  ...
}}
</solution>

## Input Context
### Repository Name
<repo_name>
{repo_name}
</repo_name>

### Repository Overview
<repo_info>
{repo_info}
</repo_info>
)PROMPT";
    return text;
}

const std::string& domain_discovery() {
    static const std::string text = R"PROMPT(## Instructions
You are an expert software architect and repository analyst.
Your goal is to analyze the repository holistically and identify its main functional areas -- coherent, high-level modules or subsystems that reflect the repository's architecture and purpose.

### Guidelines
- Think from a software architecture perspective; group code into major, distinct responsibilities (e.g., data loading/processing, training/inference, evaluation/metrics, visualization/reporting, APIs/interfaces, configuration/utilities/infrastructure).
- Avoid listing individual files or small helpers, third-party/vendor code, and build/test/docs directories.
- Ensure each area is meaningful and represents a clear responsibility in the codebase.

### Naming Principles
- Single Responsibility: Each area should cover one logical concern (e.g., "DataProcessing", "ModelTraining").
- High-Level Abstraction: Group related submodules; separate distinct layers.
- Consistency: Use PascalCase for names (e.g., "FeatureExtraction", "EvaluationMetrics").
- Meaningful Scope:
  - Merge closely related components (e.g., "data_loader", "dataset" -> "DataProcessing")
  - Avoid vague terms like "core", "misc", "other"
  - Use domain-specific names when appropriate (e.g., "TextPreprocessing", "ImageSegmentation")

### Output Format
Return only the result in this exact format:
<solution>
[
"functional_area1", "functional_area2", "functional_area3", ...
]
</solution>

## Input Context
### Repository Name
<repo_name>
{repo_name}
</repo_name>

### Repository Overview
<repo_info>
{repo_info}
</repo_info>
)PROMPT";
    return text;
}

const std::string& hierarchical_construction() {
    static const std::string text = R"PROMPT(## Instruction
You are an expert software architect and large-scale repository refactoring specialist.

## Goal
Reorganize and enrich the repository's parsed feature tree by assigning each top-level feature group
(e.g., "data_loader", "model_trainer", "metrics") to the most semantically appropriate location
within the target architecture.

## Target Path Format (STRICT)
Each target path must have exactly three levels:
`<functional_area>/<category_level_1>/<subcategory_level_2>`
- `functional_area` must be one of the provided <functional_areas>.
- `category_level_1` expresses broader purpose or lifecycle role.
- `subcategory_level_2` adds precise specialization or context.
- Each segment: concise (2--5 words), semantically meaningful, intent-focused.
Examples:
- "data ingestion/pipeline orchestration/task scheduling"
- "model training/optimization strategy/hyperparameter tuning"
Avoid filler labels (e.g., "misc", "others", "core", "general").

## Semantic Naming Rules
When creating or adjusting semantic labels (categories/subcategories), follow:
1. Use "verb + object" phrasing; e.g., `load config`, `validate token`.
2. Use lowercase English only.
3. Describe purpose, not implementation.
4. Ensure each label expresses a single responsibility.
5. When multiple distinct roles exist, use multiple precise labels rather than one overloaded label.
6. Avoid vague verbs such as `handle`, `process`, and `deal with`.
7. Avoid implementation details, including control-flow or data-structure references.
8. Avoid mentioning specific libraries, frameworks, or formats; prefer `serialize data` over `pickle object` or `save to json`.
9. Prefer domain or system semantics over low-level actions; use `manage session` rather than `update dict`.

## Scope Constraints
- Only assign top-level groups (keys of <parsed_folder_tree>).
- Exclude docs/examples/tests/vendor code unless essential to core functionality.
- Do not invent new functional areas; use only those in <functional_areas>.
- You may define new categories/subcategories as needed, but they must remain meaningful and consistent.

## Output Format (STRICT)
Return only the JSON object wrapped exactly as:
<solution>
{
  "<functional_area>/<category>/<subcategory>": ["top_level_group_1", "top_level_group_2", ...],
  "<functional_area>/<category>/<subcategory>": ["top_level_group_3", ...]
}
</solution>

## Input Context
### Repository Name
<repo_name>
{repo_name}
</repo_name>

### Functional Areas and Parsed Feature Tree
<repo_info>
{repo_info}
</repo_info>
)PROMPT";
    return text;
}

const std::string& file_summary() {
    static const std::string text = R"PROMPT(## Instruction
You are a senior software analyst. Summarize the file below into a short list of
semantic feature phrases describing what the file as a whole provides.
Follow the same feature naming rules as semantic parsing: verb + object,
lowercase English, no punctuation, at most 8 words per phrase, at most 8 phrases.

## Output Format
<solution>
["feature one", "feature two", ...]
</solution>

## Input Context
### File
<repo_name>
{repo_name}
</repo_name>
### Member Features
<repo_info>
{repo_info}
</repo_info>
)PROMPT";
    return text;
}

const std::string& routing() {
    static const std::string text = R"PROMPT(## Instruction
You are organizing a repository's functional hierarchy. Given the semantic
features of a new entity and a list of candidate child categories, select the
candidate that is the best functional fit, or null when no child is a better
fit than the current position.

## Output Format
<solution>
{"choice": "<candidate_id>"}
</solution>
or
<solution>
{"choice": null}
</solution>

## Input Context
### Target Features
<repo_name>
{repo_name}
</repo_name>
### Candidates
<repo_info>
{repo_info}
</repo_info>
)PROMPT";
    return text;
}

const std::string& drift_judgment() {
    static const std::string text = R"PROMPT(## Instruction
You are judging semantic drift between two versions of a code entity. Given
the old and new semantic feature lists, return a drift score between 0 (same
functional intent) and 1 (completely different functional intent).

## Output Format
<solution>
{"drift": 0.0}
</solution>

## Input Context
### Old Features
<repo_name>
{repo_name}
</repo_name>
### New Features
<repo_info>
{repo_info}
</repo_info>
)PROMPT";
    return text;
}

std::string instantiate(const std::string& tmpl, const std::string& repo_name,
                        const std::string& repo_info) {
    std::string out = tmpl;
    auto replace_all = [&](const std::string& needle, const std::string& value) {
        size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    };
    replace_all("{repo_name}", repo_name);
    replace_all("{repo_info}", repo_info);
    return out;
}

std::string solution_block(const std::string& response) {
    const std::string open = "<solution>";
    const std::string close = "</solution>";
    size_t start = response.find(open);
    if (start == std::string::npos) return "";
    start += open.size();
    size_t end = response.find(close, start);
    if (end == std::string::npos) return "";
    return response.substr(start, end - start);
}

}  // namespace rpg::prompts
