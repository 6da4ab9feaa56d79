#include <unistd.h>
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rpg/cli.hpp"
#include "support/fixtures.hpp"

using rpg::run_command;
namespace fs = std::filesystem;
using testing_support::fixture;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name) {
        path = fs::temp_directory_path() / (name + std::to_string(::getpid()));
    }
    ~TempFile() {
        std::error_code ec;
        fs::remove(path, ec);
    }
};

}  // namespace

TEST_CASE("build then validate round-trips with exit 0") {
    TempFile graph("rpg-cli-graph");
    CHECK(run_command({"build", fixture("mini_sklearn"), "--graph", graph.path.string()}) == 0);
    CHECK(run_command({"validate", graph.path.string()}) == 0);
    CHECK(run_command({"validate", graph.path.string(), "--json"}) == 0);
}

TEST_CASE("corrupted graphs exit 2 from validate") {
    TempFile graph("rpg-cli-bad");
    {
        std::ofstream out(graph.path);
        // an area with a childless category
        out << R"({
          "version": 2,
          "nodes": [
            {"id": "A", "kind": "high", "level": "area", "feature": ["area one"], "metadata": {}},
            {"id": "C", "kind": "high", "level": "category", "feature": ["cat one"], "metadata": {}}
          ],
          "feature_edges": [["A", "C"]],
          "dep_edges": []
        })";
    }
    CHECK(run_command({"validate", graph.path.string()}) == 2);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_command({"frobnicate"}) == 1);
    CHECK(run_command({}) == 1);
    CHECK(run_command({"update", "--graph", "x.json"}) == 1);  // no diff source
    CHECK(run_command({"build"}) == 1);                        // missing root
}

TEST_CASE("pipeline failures exit 3") {
    TempFile graph("rpg-cli-missing");
    CHECK(run_command({"build", "/definitely/not/here", "--graph", graph.path.string()}) == 3);
    CHECK(run_command({"validate", "/missing-graph.json"}) == 3);
}

TEST_CASE("update applies a diff and rewrites the graph") {
    TempFile graph("rpg-cli-update");
    REQUIRE(run_command({"build", fixture("stream/rev0"), "--graph", graph.path.string()}) == 0);
    CHECK(run_command({"update", "--graph", graph.path.string(), "--diff",
                       fixture("stream/diffs/commit1.diff"), "--before", fixture("stream/rev0"),
                       "--after", fixture("stream/rev1"), "--json"}) == 0);
    CHECK(run_command({"validate", graph.path.string()}) == 0);
}

TEST_CASE("query subcommands mirror the tool parameters") {
    TempFile graph("rpg-cli-query");
    REQUIRE(run_command({"build", fixture("mini_sklearn"), "--graph", graph.path.string()}) == 0);
    CHECK(run_command({"query", "--graph", graph.path.string(), "--root",
                       fixture("mini_sklearn"), "search", "--mode", "features",
                       "--feature-terms", "check array"}) == 0);
    CHECK(run_command({"query", "--graph", graph.path.string(), "fetch", "--code-entities",
                       "core/base.py"}) == 0);
    CHECK(run_command({"query", "--graph", graph.path.string(), "explore",
                       "--start-code-entities", "core/base.py", "--direction", "both"}) == 0);
    // tool-level parameter errors surface as usage failures
    CHECK(run_command({"query", "--graph", graph.path.string(), "explore",
                       "--start-code-entities", "core/base.py", "--direction", "zigzag"}) == 1);
}

TEST_CASE("eval prints the fixture report") {
    CHECK(run_command({"eval", "--gold", fixture("eval/gold.json"), "--pred",
                       fixture("eval/pred.json"), "--granularity", "function", "--json"}) == 0);
    CHECK(run_command({"eval", "--gold", "/nope.json", "--pred", "/nope.json"}) == 3);
}
