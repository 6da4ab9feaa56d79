#include "rpg/cli.hpp"

#include <unistd.h>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpg/config.hpp"
#include "rpg/diff.hpp"
#include "rpg/evalkit.hpp"
#include "rpg/evolution.hpp"
#include "rpg/extractor.hpp"
#include "rpg/serialize.hpp"
#include "rpg/toolkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rpg {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kPipeline = 3;

std::string run_shell(const std::string& command) {
    std::string output;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) {
        throw UpdateError("cannot run: " + command);
    }
    char buffer[4096];
    size_t n;
    while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
        output.append(buffer, n);
    }
    int status = pclose(pipe);
    if (status != 0) {
        throw UpdateError("command failed (" + std::to_string(status) + "): " + command);
    }
    return output;
}

void write_diagnostics(const std::string& path, const std::vector<Diagnostic>& diagnostics) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    for (const auto& d : diagnostics) {
        out << json{{"path", d.path}, {"issue", d.issue}}.dump() << "\n";
    }
}

json report_to_json(const UpdateReport& report) {
    return json{{"deletes_applied", report.deletes_applied},
                {"modifies_applied", report.modifies_applied},
                {"inserts_applied", report.inserts_applied},
                {"pruned_nodes", report.pruned_nodes},
                {"rerouted_nodes", report.rerouted_nodes},
                {"dep_edges_added", report.dep_edges_added},
                {"dep_edges_removed", report.dep_edges_removed},
                {"tokens", json{{"requests", report.token_delta.request_count},
                                {"prompt_est", report.token_delta.prompt_tokens_est},
                                {"completion_est", report.token_delta.completion_tokens_est}}}};
}

json account_to_json(const TokenAccount& account) {
    json stages = json::object();
    for (const auto& [stage, counters] : account.per_stage()) {
        stages[stage] = json{{"requests", counters.request_count},
                             {"prompt_est", counters.prompt_tokens_est},
                             {"completion_est", counters.completion_tokens_est}};
    }
    return stages;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& hint) {
        path = fs::temp_directory_path() /
               fs::path("rpg-" + hint + "-" + std::to_string(::getpid()) + "-" +
                        std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int cmd_validate(const std::string& graph_path, bool json_output) {
    RpgGraph graph = load_graph_file(graph_path);
    auto report = validate(graph);
    if (json_output) {
        json findings = json::array();
        for (const auto& finding : report.findings) {
            findings.push_back(json{{"code", finding.code},
                                    {"message", finding.message},
                                    {"nodes", finding.node_ids}});
        }
        std::cout << json{{"ok", report.empty()}, {"findings", findings}}.dump(2) << "\n";
    } else if (report.empty()) {
        std::cout << "graph valid: " << graph.nodes().size() << " nodes, "
                  << graph.dep_edges().size() << " dependency edges\n";
    } else {
        for (const auto& finding : report.findings) {
            std::cout << finding.code << ": " << finding.message;
            if (!finding.node_ids.empty()) {
                std::cout << " [";
                for (size_t i = 0; i < finding.node_ids.size(); ++i) {
                    if (i) std::cout << ", ";
                    std::cout << finding.node_ids[i];
                }
                std::cout << "]";
            }
            std::cout << "\n";
        }
    }
    return report.empty() ? kOk : kValidation;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"Repository Planning Graph toolkit"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    bool json_output = false;

    // build
    auto* build_cmd = app.add_subcommand("build", "Scan a repository and encode its graph");
    std::string build_root;
    std::string build_graph_out;
    std::string build_diagnostics;
    std::optional<int> build_min_scope_depth;
    std::vector<std::string> include_globs;
    std::vector<std::string> exclude_globs;
    build_cmd->add_option("root", build_root, "repository checkout to encode")->required();
    build_cmd->add_option("--graph", build_graph_out, "output graph file");
    build_cmd->add_option("--diagnostics", build_diagnostics, "diagnostics JSONL file");
    build_cmd->add_option("--min-scope-depth", build_min_scope_depth);
    build_cmd->add_option("--include", include_globs, "include globs (default **/*.py)");
    build_cmd->add_option("--exclude", exclude_globs, "exclude globs");

    // update
    auto* update_cmd = app.add_subcommand("update", "Apply a commit to an existing graph");
    std::string update_graph;
    std::string update_out;
    std::string diff_file;
    std::string before_dir;
    std::string after_dir;
    std::string git_range;
    std::string git_repo;
    update_cmd->add_option("--graph", update_graph, "graph file to update")->required();
    update_cmd->add_option("--out", update_out, "output path (defaults to --graph)");
    update_cmd->add_option("--diff", diff_file, "unified diff file");
    update_cmd->add_option("--before", before_dir, "pre-commit checkout");
    update_cmd->add_option("--after", after_dir, "post-commit checkout");
    update_cmd->add_option("--git", git_range, "git range base..head");
    update_cmd->add_option("--repo", git_repo, "git repository (with --git)");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Check graph invariants");
    std::string validate_graph;
    validate_cmd->add_option("graph", validate_graph)->required();

    // query
    auto* query_cmd = app.add_subcommand("query", "Run one tool request against a graph");
    std::string query_graph;
    std::string query_root;
    query_cmd->add_option("--graph", query_graph)->required();
    query_cmd->add_option("--root", query_root, "subject checkout for source previews");
    query_cmd->require_subcommand(1);

    auto* search_cmd = query_cmd->add_subcommand("search", "SearchNode");
    SearchParams search_params;
    std::vector<int> line_nums;
    search_cmd->add_option("--mode", search_params.mode)->required();
    search_cmd->add_option("--feature-terms", search_params.feature_terms);
    search_cmd->add_option("--search-scopes", search_params.search_scopes);
    search_cmd->add_option("--search-terms", search_params.search_terms);
    search_cmd->add_option("--line-nums", line_nums)->expected(2);
    search_cmd->add_option("--file-path-or-pattern", search_params.file_path_or_pattern);

    auto* fetch_cmd = query_cmd->add_subcommand("fetch", "FetchNode");
    FetchParams fetch_params;
    fetch_cmd->add_option("--code-entities", fetch_params.code_entities);
    fetch_cmd->add_option("--feature-entities", fetch_params.feature_entities);

    auto* explore_cmd = query_cmd->add_subcommand("explore", "ExploreRPG");
    ExploreParams explore_params;
    explore_cmd->add_option("--start-code-entities", explore_params.start_code_entities);
    explore_cmd->add_option("--start-feature-entities", explore_params.start_feature_entities);
    explore_cmd->add_option("--direction", explore_params.direction);
    explore_cmd->add_option("--traversal-depth", explore_params.traversal_depth);
    explore_cmd->add_option("--entity-type-filter", explore_params.entity_type_filter);
    explore_cmd->add_option("--dependency-type-filter", explore_params.dependency_type_filter);

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Line-delimited JSON service on stdio");
    std::string serve_graph;
    std::string serve_root;
    serve_cmd->add_option("graph", serve_graph)->required();
    serve_cmd->add_option("--root", serve_root);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Score localization predictions");
    std::string gold_file;
    std::string pred_file;
    std::string granularity_name = "file";
    std::optional<int> top_n;
    eval_cmd->add_option("--gold", gold_file)->required();
    eval_cmd->add_option("--pred", pred_file)->required();
    eval_cmd->add_option("--granularity", granularity_name)
        ->check(CLI::IsMember({"file", "function"}));
    eval_cmd->add_option("--top-n", top_n, "truncate prediction lists");

    for (auto* sub : {build_cmd, update_cmd, validate_cmd, query_cmd, serve_cmd, eval_cmd}) {
        sub->add_flag("--json", json_output, "machine-readable output");
        sub->add_option("--config", config_path, "config file (overrides $RPG_CONFIG)");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        Config config = resolve_config(config_path);

        if (*build_cmd) {
            if (build_min_scope_depth) config.extractor_min_scope_depth = *build_min_scope_depth;
            auto provider = make_provider(config);
            auto output = build(build_root, *provider, config.extractor_min_scope_depth,
                                include_globs, exclude_globs);
            auto report = validate(output.graph);
            if (!report.empty()) {
                std::cerr << "error (build): produced graph failed validation\n";
                return kPipeline;
            }
            std::string graph_path = build_graph_out.empty() ? config.graph_path : build_graph_out;
            save_graph_file(output.graph, graph_path);
            std::string diagnostics_path =
                build_diagnostics.empty() ? config.diagnostics_path : build_diagnostics;
            write_diagnostics(diagnostics_path, output.diagnostics);
            if (json_output) {
                std::cout << json{{"graph", graph_path},
                                  {"nodes", output.graph.nodes().size()},
                                  {"dep_edges", output.graph.dep_edges().size()},
                                  {"diagnostics", output.diagnostics.size()},
                                  {"tokens", account_to_json(provider->account())}}
                                 .dump(2)
                          << "\n";
            } else {
                std::cout << "graph written to " << graph_path << ": "
                          << output.graph.nodes().size() << " nodes, "
                          << output.graph.dep_edges().size() << " dependency edges\n";
            }
            return kOk;
        }

        if (*update_cmd) {
            bool has_git = !git_range.empty();
            bool has_diff = !diff_file.empty() && !before_dir.empty() && !after_dir.empty();
            if (!has_git && !has_diff) {
                std::cerr << "error (update): need --diff/--before/--after or --git/--repo\n";
                return kUsage;
            }
            RpgGraph graph = load_graph_file(update_graph);
            std::string diff_text;
            std::unique_ptr<TempDir> before_tmp;
            std::unique_ptr<TempDir> after_tmp;
            if (has_git) {
                if (git_repo.empty()) {
                    std::cerr << "error (update): --git requires --repo\n";
                    return kUsage;
                }
                auto dots = git_range.find("..");
                if (dots == std::string::npos) {
                    std::cerr << "error (update): --git expects base..head\n";
                    return kUsage;
                }
                std::string base = git_range.substr(0, dots);
                std::string head = git_range.substr(dots + 2);
                diff_text = run_shell("git -C '" + git_repo + "' diff --no-renames " + base + " " +
                                      head + " --");
                before_tmp = std::make_unique<TempDir>("before");
                after_tmp = std::make_unique<TempDir>("after");
                run_shell("git -C '" + git_repo + "' archive " + base + " | tar -x -C '" +
                          before_tmp->path.string() + "'");
                run_shell("git -C '" + git_repo + "' archive " + head + " | tar -x -C '" +
                          after_tmp->path.string() + "'");
                before_dir = before_tmp->path.string();
                after_dir = after_tmp->path.string();
            } else {
                if (diff_file.empty() || before_dir.empty() || after_dir.empty()) {
                    std::cerr << "error (update): need --diff/--before/--after or --git/--repo\n";
                    return kUsage;
                }
                std::ifstream in(diff_file, std::ios::binary);
                if (!in) {
                    std::cerr << "error (update): cannot open diff file " << diff_file << "\n";
                    return kPipeline;
                }
                std::ostringstream buffer;
                buffer << in.rdbuf();
                diff_text = buffer.str();
            }
            EntitySet before = scan_repository(before_dir);
            EntitySet after = scan_repository(after_dir);
            auto provider = make_provider(config);
            auto [updated, report] =
                apply_commit(graph, diff_text, before, after, *provider, evolution_options(config));
            save_graph_file(updated, update_out.empty() ? update_graph : update_out);
            if (json_output) {
                std::cout << report_to_json(report).dump(2) << "\n";
            } else {
                std::cout << "applied: " << report.deletes_applied << " deletes, "
                          << report.modifies_applied << " modifies, " << report.inserts_applied
                          << " inserts; pruned " << report.pruned_nodes.size() << ", re-routed "
                          << report.rerouted_nodes.size() << "\n";
            }
            return kOk;
        }

        if (*validate_cmd) {
            return cmd_validate(validate_graph, json_output);
        }

        if (*query_cmd) {
            RpgGraph graph = load_graph_file(query_graph);
            Toolkit toolkit(&graph, query_root, config.routing_min_similarity);
            ToolResult result;
            if (*search_cmd) {
                if (line_nums.size() == 2) {
                    search_params.line_nums = {line_nums[0], line_nums[1]};
                }
                result = toolkit.search_node(search_params);
            } else if (*fetch_cmd) {
                result = toolkit.fetch_node(fetch_params);
            } else {
                result = toolkit.explore_rpg(explore_params);
            }
            std::cout << result.to_json().dump(2) << "\n";
            if (!result.ok) return kUsage;
            return kOk;
        }

        if (*serve_cmd) {
            RpgGraph graph = load_graph_file(serve_graph);
            Toolkit toolkit(&graph, serve_root, config.routing_min_similarity);
            toolkit.service_loop(std::cin, std::cout);
            return kOk;
        }

        if (*eval_cmd) {
            Granularity granularity =
                granularity_name == "function" ? Granularity::Function : Granularity::File;
            auto report = score_run(gold_file, pred_file, granularity, top_n);
            json doc{{"acc_at_1", report.acc_at_1},
                     {"acc_at_5", report.acc_at_5},
                     {"precision", report.precision},
                     {"recall", report.recall},
                     {"n", report.instances},
                     {"mismatched_ids", report.mismatched_ids},
                     {"dropped_entries", report.dropped_entries}};
            if (json_output) {
                std::cout << doc.dump(2) << "\n";
            } else {
                std::cout << doc.dump(2) << "\n";
                std::printf("%-12s %8s\n", "metric", "value");
                std::printf("%-12s %8.4f\n", "Acc@1", report.acc_at_1);
                std::printf("%-12s %8.4f\n", "Acc@5", report.acc_at_5);
                std::printf("%-12s %8.4f\n", "precision", report.precision);
                std::printf("%-12s %8.4f\n", "recall", report.recall);
                std::printf("%-12s %8d\n", "instances", report.instances);
            }
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error (config): " << e.what() << "\n";
        return kUsage;
    } catch (const ScanError& e) {
        std::cerr << "error (scan): " << e.what() << "\n";
        return kPipeline;
    } catch (const StageError& e) {
        std::cerr << "error (" << e.stage_name << "): " << e.what() << "\n";
        return kPipeline;
    } catch (const ProviderError& e) {
        std::cerr << "error (provider): " << e.what() << "\n";
        return kPipeline;
    } catch (const UpdateError& e) {
        std::cerr << "error (update): " << e.what() << "\n";
        return kPipeline;
    } catch (const DiffError& e) {
        std::cerr << "error (diff): " << e.what() << "\n";
        return kPipeline;
    } catch (const ParseError& e) {
        std::cerr << "error (graph-io): " << e.what() << "\n";
        return kPipeline;
    } catch (const EvalError& e) {
        std::cerr << "error (eval): " << e.what() << "\n";
        return kPipeline;
    } catch (const GraphError& e) {
        std::cerr << "error (graph): " << e.what() << "\n";
        return kPipeline;
    }
    return kUsage;
}

}  // namespace rpg
