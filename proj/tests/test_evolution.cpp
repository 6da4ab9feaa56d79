#include <unistd.h>
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpg/evolution.hpp"
#include "rpg/extractor.hpp"
#include "rpg/serialize.hpp"
#include "support/fixtures.hpp"
#include "support/scripted_provider.hpp"

using namespace rpg;
namespace fs = std::filesystem;
using testing_support::fixture;
using testing_support::ScriptedProvider;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

RpgGraph synthetic_two_subcats() {
    RpgGraph g;
    auto high = [](const std::string& id, NodeLevel level, const std::string& label) {
        return RpgNode{.id = id, .kind = NodeKind::High, .level = level, .feature = {label}};
    };
    g.add_node(high("A", NodeLevel::Area, "area one"), std::nullopt);
    g.add_node(high("C", NodeLevel::Category, "cat one"), "A");
    g.add_node(high("S1", NodeLevel::Subcategory, "scale rows"), "C");
    g.add_node(high("S2", NodeLevel::Subcategory, "encode labels"), "C");
    auto file = [](const std::string& id, const std::string& path) {
        return RpgNode{.id = id,
                       .kind = NodeKind::Low,
                       .level = NodeLevel::File,
                       .feature = {"scale rows"},
                       .path = path,
                       .span = Span{1, 5},
                       .entity_kind = EntityKind::File};
    };
    g.add_node(file("F1", "pkg/a.py"), "S1");
    g.add_node(file("F2", "pkg/b.py"), "S2");
    refresh_grounding(g);
    return g;
}

}  // namespace

TEST_CASE("parse_diff maps a body hunk to one modify event") {
    auto before = scan_repository(fixture("stream/rev0"));
    auto after = scan_repository(fixture("stream/rev1"));
    auto events =
        parse_diff(read_file(fixture("stream/diffs/commit1.diff")), before, after);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == ChangeKind::Modify);
    CHECK(events[0].entity.key() == "utils/math_ops.py:safe_divide");
    REQUIRE(events[0].new_source.has_value());
    CHECK(events[0].new_source->find("ratio") != std::string::npos);
}

TEST_CASE("parse_diff expands a new file into file plus member inserts") {
    auto before = scan_repository(fixture("stream/rev2"));
    auto after = scan_repository(fixture("stream/rev3"));
    auto events =
        parse_diff(read_file(fixture("stream/diffs/commit3.diff")), before, after);
    REQUIRE(events.size() == 3);
    CHECK(events[0].kind == ChangeKind::Insert);
    CHECK(events[0].entity.key() == "metrics/classification.py");
    CHECK(events[1].entity.key() == "metrics/classification.py:accuracy_score");
    CHECK(events[2].entity.key() == "metrics/classification.py:precision_score");
}

TEST_CASE("parse_diff orders deletes before modifies before inserts") {
    auto before = scan_repository(fixture("stream/rev3"));
    auto after = scan_repository(fixture("stream/rev4"));
    auto events =
        parse_diff(read_file(fixture("stream/diffs/commit4.diff")), before, after);
    REQUIRE(events.size() == 5);
    // encoder.py and its three entities disappear, innermost first
    CHECK(events[0].kind == ChangeKind::Delete);
    CHECK(events[0].entity.key() == "preprocessing/encoder.py:LabelEncoder.transform");
    CHECK(events[1].entity.key() == "preprocessing/encoder.py:LabelEncoder.fit");
    CHECK(events[2].entity.key() == "preprocessing/encoder.py:LabelEncoder");
    CHECK(events[3].entity.key() == "preprocessing/encoder.py");
    CHECK(events[4].kind == ChangeKind::Modify);
    CHECK(events[4].entity.key() == "preprocessing/__init__.py");
}

TEST_CASE("unknown-id delete is the identity") {
    RpgGraph g = synthetic_two_subcats();
    RpgGraph copy = g;
    delete_node(g, "Lnotanode0000000");
    CHECK(g == copy);
}

TEST_CASE("deleting the sole file prunes its subcategory but not the category") {
    RpgGraph g = synthetic_two_subcats();
    UpdateReport report;
    delete_node(g, "F1", &report);
    CHECK(g.node("F1") == nullptr);
    CHECK(g.node("S1") == nullptr);
    CHECK(g.node("C") != nullptr);  // S2 keeps it alive
    CHECK(report.pruned_nodes == std::vector<std::string>{"S1"});
    CHECK(validate(g).empty());
}

TEST_CASE("deleting a whole branch prunes up to the area root") {
    RpgGraph g = synthetic_two_subcats();
    UpdateReport report;
    delete_node(g, "F1", &report);
    delete_node(g, "F2", &report);
    CHECK(g.node("S2") == nullptr);
    CHECK(g.node("C") == nullptr);
    // areas are forest roots and are never pruned implicitly
    CHECK(g.node("A") != nullptr);
    CHECK(report.pruned_nodes == std::vector<std::string>{"S1", "S2", "C"});
}

TEST_CASE("deleting a file cascades through its members") {
    auto provider = make_deterministic_provider();
    auto out = build(fixture("mini_sklearn"), *provider);
    RpgGraph g = out.graph;
    std::string file_id = low_node_id("preprocessing/encoder.py", std::nullopt, EntityKind::File);
    REQUIRE(g.node(file_id) != nullptr);
    delete_node(g, file_id);
    CHECK(g.node(file_id) == nullptr);
    CHECK(g.node(low_node_id("preprocessing/encoder.py", "LabelEncoder", EntityKind::Class)) ==
          nullptr);
    for (const auto& edge : g.dep_edges()) {
        CHECK(g.node(edge.src) != nullptr);
        CHECK(g.node(edge.dst) != nullptr);
    }
    CHECK(validate(g).empty());
}

TEST_CASE("modification below the drift gate stays in place") {
    RpgGraph g = synthetic_two_subcats();
    ScriptedProvider provider;
    provider.feature_overrides["pkg/a.py:helper"] = {"scale rows"};

    // grow a member under F1 so a modify event has a target
    EntityRef helper{"pkg/a.py", "helper", EntityKind::Function, {2, 3}};
    insert_node(g, {ChangeKind::Insert, helper, "def helper(): pass"}, provider, {});
    auto parent_before = g.parent_of(node_id_for(helper));

    UpdateReport report;
    process_modification(g, "pkg/a.py", {{ChangeKind::Modify, helper, "def helper(): ..."}},
                         provider, {}, &report);
    CHECK(g.parent_of(node_id_for(helper)) == parent_before);
    CHECK(report.rerouted_nodes.empty());
}

TEST_CASE("drift above tau re-routes as delete plus insert") {
    RpgGraph g = synthetic_two_subcats();
    ScriptedProvider provider;
    provider.feature_overrides["pkg/a.py:helper"] = {"scale rows"};
    EntityRef helper{"pkg/a.py", "helper", EntityKind::Function, {2, 3}};
    insert_node(g, {ChangeKind::Insert, helper, "def helper(): pass"}, provider, {});

    provider.feature_overrides["pkg/a.py:helper"] = {"emit telemetry"};
    UpdateReport report;
    process_modification(g, "pkg/a.py", {{ChangeKind::Modify, helper, "def helper(): ..."}},
                         provider, {}, &report);
    REQUIRE(report.rerouted_nodes.size() == 1);
    CHECK(report.rerouted_nodes[0] == node_id_for(helper));
    const RpgNode* node = g.node(node_id_for(helper));
    REQUIRE(node != nullptr);
    CHECK(node->feature == std::vector<FeaturePhrase>{"emit telemetry"});
    // functions re-attach under their file; routing ran, placement is stable
    CHECK(g.parent_of(node_id_for(helper)) == std::optional<std::string>("F1"));
}

TEST_CASE("drift exactly at tau keeps the node in place") {
    RpgGraph g = synthetic_two_subcats();
    ScriptedProvider provider;
    provider.feature_overrides["pkg/a.py:helper"] = {"load config"};
    EntityRef helper{"pkg/a.py", "helper", EntityKind::Function, {2, 3}};
    insert_node(g, {ChangeKind::Insert, helper, ""}, provider, {});

    // {load, config} vs {load, config, validate, token} -> drift exactly 0.5
    provider.feature_overrides["pkg/a.py:helper"] = {"load config", "validate token"};
    UpdateReport report;
    EvolutionOptions options;  // tau 0.5
    process_modification(g, "pkg/a.py", {{ChangeKind::Modify, helper, ""}}, provider, options,
                         &report);
    CHECK(report.rerouted_nodes.empty());
}

TEST_CASE("function insert attaches under its file without routing") {
    RpgGraph g = synthetic_two_subcats();
    ScriptedProvider provider;
    EntityRef fresh{"pkg/b.py", "emit_tick", EntityKind::Function, {2, 3}};
    insert_node(g, {ChangeKind::Insert, fresh, "def emit_tick(): pass"}, provider, {});
    CHECK(provider.route_calls == 0);
    CHECK(g.parent_of(node_id_for(fresh)) == std::optional<std::string>("F2"));
    CHECK(validate(g).empty());
}

TEST_CASE("file insert routes to the most similar subcategory") {
    RpgGraph g = synthetic_two_subcats();
    ScriptedProvider provider;
    provider.feature_overrides["pkg/c.py:encode_labels"] = {"encode labels"};
    EntityRef fresh{"pkg/c.py", std::nullopt, EntityKind::File, {1, 2}};
    insert_node(g, {ChangeKind::Insert, fresh, "def encode_labels(): pass\n"}, provider, {});
    CHECK(g.parent_of(node_id_for(fresh)) == std::optional<std::string>("S2"));
    CHECK(provider.route_calls > 0);
    CHECK(validate(g).empty());
}

TEST_CASE("dissimilar file insert lands in the fallback area and is flagged") {
    RpgGraph g = synthetic_two_subcats();
    ScriptedProvider provider;
    provider.feature_overrides["pkg/d.py:launch_rocket"] = {"launch rocket"};
    EntityRef fresh{"pkg/d.py", std::nullopt, EntityKind::File, {1, 2}};
    UpdateReport report;
    insert_node(g, {ChangeKind::Insert, fresh, "def launch_rocket(): pass\n"}, provider, {},
                &report);
    auto parent = g.parent_of(node_id_for(fresh));
    REQUIRE(parent.has_value());
    // fallback chain Unclassified/general/general
    const RpgNode* sub = g.node(*parent);
    CHECK(sub->feature == std::vector<FeaturePhrase>{"general"});
    const RpgNode* area = g.node(*g.parent_of(*g.parent_of(*parent)));
    CHECK(area->feature == std::vector<FeaturePhrase>{"unclassified"});
    CHECK_FALSE(report.diagnostics.empty());
    CHECK(validate(g).empty());
}

TEST_CASE("apply_commit with an empty diff is the identity with zero tokens") {
    auto provider = make_deterministic_provider();
    auto out = build(fixture("mini_sklearn"), *provider);
    auto before = scan_repository(fixture("mini_sklearn"));
    auto [updated, report] = apply_commit(out.graph, "", before, before, *provider);
    CHECK(updated == out.graph);
    CHECK(report.token_delta.request_count == 0);
    CHECK(report.token_delta.prompt_tokens_est == 0);
}

TEST_CASE("apply_commit rolls back when the result fails validation") {
    RpgGraph g = synthetic_two_subcats();
    ScriptedProvider provider;
    // unnormalizable phrases poison the inserted node
    provider.feature_overrides["pkg/e.py:bad_actor"] = {"NOT NORMALIZED AT ALL!"};

    struct Checkout {
        fs::path root;
        explicit Checkout(const std::string& name) {
            root = fs::temp_directory_path() / ("rpg-roll-" + name + std::to_string(::getpid()));
            fs::create_directories(root / "pkg");
        }
        ~Checkout() {
            std::error_code ec;
            fs::remove_all(root, ec);
        }
    };
    Checkout before_dir("b");
    Checkout after_dir("a");
    {
        std::ofstream a(before_dir.root / "pkg/a.py");
        a << "def scale_rows(): pass\n";
        std::ofstream a2(after_dir.root / "pkg/a.py");
        a2 << "def scale_rows(): pass\n";
        std::ofstream e(after_dir.root / "pkg/e.py");
        e << "def bad_actor(): pass\n";
    }
    std::string diff =
        "--- /dev/null\n"
        "+++ b/pkg/e.py\n"
        "@@ -0,0 +1 @@\n"
        "+def bad_actor(): pass\n";
    auto before = scan_repository(before_dir.root.string());
    auto after = scan_repository(after_dir.root.string());
    RpgGraph snapshot = g;
    CHECK_THROWS_AS(apply_commit(g, diff, before, after, provider), UpdateError);
    CHECK(g == snapshot);  // caller's graph untouched
}

TEST_CASE("rename commit prunes the old node and leaves no empty abstractions") {
    auto provider = make_deterministic_provider();
    auto g0 = build(fixture("stream/rev0"), *provider).graph;
    RpgGraph g = g0;
    for (int i = 1; i <= 5; ++i) {
        auto before = scan_repository(fixture("stream/rev" + std::to_string(i - 1)));
        auto after = scan_repository(fixture("stream/rev" + std::to_string(i)));
        auto diff = read_file(fixture("stream/diffs/commit" + std::to_string(i) + ".diff"));
        auto [updated, report] = apply_commit(g, diff, before, after, *provider);
        g = std::move(updated);
    }
    // commit 5 renamed utils/math_ops.py to utils/numeric.py
    CHECK(g.node(low_node_id("utils/math_ops.py", std::nullopt, EntityKind::File)) == nullptr);
    CHECK(g.node(low_node_id("utils/numeric.py", std::nullopt, EntityKind::File)) != nullptr);
    CHECK(validate(g).empty());
}

TEST_CASE("delta isolation: payload depends on the change set only") {
    // inflate rev0 tenfold by cloning every top-level package
    struct Inflated {
        fs::path root;
        Inflated() {
            root = fs::temp_directory_path() / ("rpg-inflate-" + std::to_string(::getpid()));
            fs::remove_all(root);
            fs::copy(fixture("stream/rev0"), root, fs::copy_options::recursive);
            for (int i = 1; i <= 9; ++i) {
                for (const char* pkg :
                     {"core", "utils", "preprocessing", "linear_model", "metrics"}) {
                    fs::copy(fixture("stream/rev0") / fs::path(pkg),
                             root / (std::string(pkg) + "_copy" + std::to_string(i)),
                             fs::copy_options::recursive);
                }
            }
        }
        ~Inflated() {
            std::error_code ec;
            fs::remove_all(root, ec);
        }
    };
    Inflated big;

    auto apply_first_commit = [&](const std::string& root) {
        auto provider = make_deterministic_provider();
        auto graph = build(root, *provider).graph;

        // stage the same one-file edit inside this checkout
        fs::path work = fs::temp_directory_path() /
                        ("rpg-delta-" + std::to_string(::getpid()) + "-" +
                         std::to_string(reinterpret_cast<uintptr_t>(&root)));
        fs::remove_all(work);
        fs::copy(root, work, fs::copy_options::recursive);
        fs::copy_file(fixture("stream/rev1") / fs::path("utils/math_ops.py"),
                      work / "utils/math_ops.py", fs::copy_options::overwrite_existing);

        auto before = scan_repository(root);
        auto after = scan_repository(work.string());
        auto diff = read_file(fixture("stream/diffs/commit1.diff"));
        auto [updated, report] = apply_commit(graph, diff, before, after, *provider);
        fs::remove_all(work);
        return report.token_delta;
    };

    auto small_delta = apply_first_commit(fixture("stream/rev0"));
    auto big_delta = apply_first_commit(big.root.string());
    CHECK(small_delta.prompt_tokens_est == big_delta.prompt_tokens_est);
    CHECK(small_delta.request_count == big_delta.request_count);
    CHECK(small_delta.prompt_tokens_est > 0);
}
