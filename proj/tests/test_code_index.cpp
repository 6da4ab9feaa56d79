#include <unistd.h>
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "rpg/code_index.hpp"
#include "support/fixtures.hpp"
#include "support/mini_sklearn_oracle.hpp"

using namespace rpg;
namespace fs = std::filesystem;
using testing_support::fixture;

namespace {

std::string edge_string(const DepEdge& edge) {
    return to_string(edge.kind) + " " + edge.src.key() + " -> " + edge.dst.key();
}

std::vector<std::string> sorted_edges(const std::vector<DepEdge>& edges) {
    std::vector<std::string> out;
    for (const auto& e : edges) out.push_back(edge_string(e));
    std::sort(out.begin(), out.end());
    return out;
}

struct TempRepo {
    fs::path root;
    TempRepo() {
        root = fs::temp_directory_path() / ("rpg-test-" + std::to_string(::getpid()) + "-" +
                                            std::to_string(counter()++));
        fs::create_directories(root);
    }
    ~TempRepo() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
    void write(const std::string& rel, const std::string& content) {
        fs::path p = root / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << content;
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

}  // namespace

TEST_CASE("scan of a single-function file") {
    TempRepo repo;
    repo.write("a.py", "def f(): pass\n");
    auto es = scan_repository(repo.root.string());
    REQUIRE(es.entities.size() == 2);
    CHECK(es.entities[0].key() == "a.py");
    CHECK(es.entities[1].key() == "a.py:f");
    CHECK(es.entities[1].kind == EntityKind::Function);
    REQUIRE(es.dep_edges.size() == 1);
    CHECK(edge_string(es.dep_edges[0]) == "contains a.py -> a.py:f");
}

TEST_CASE("scan of a class with a method") {
    TempRepo repo;
    repo.write("pkg/m.py",
               "class C:\n"
               "    def g(self):\n"
               "        pass\n");
    auto es = scan_repository(repo.root.string());
    REQUIRE(es.entities.size() == 3);
    CHECK(es.entities[1].key() == "pkg/m.py:C");
    CHECK(es.entities[2].key() == "pkg/m.py:C.g");
    CHECK(es.entities[2].kind == EntityKind::Method);
    auto edges = sorted_edges(es.dep_edges);
    CHECK(edges == std::vector<std::string>{"contains pkg/m.py -> pkg/m.py:C",
                                            "contains pkg/m.py:C -> pkg/m.py:C.g"});
}

TEST_CASE("missing root is fatal") {
    CHECK_THROWS_AS(scan_repository("/nonexistent/definitely/missing"), ScanError);
}

TEST_CASE("parse errors degrade per file") {
    auto es = scan_repository(fixture("broken"));
    REQUIRE(es.files.count("unterminated.py") == 1);
    CHECK(es.files.at("unterminated.py").parse_error);
    CHECK(es.find("unterminated.py", std::nullopt, EntityKind::File) != nullptr);
    // no children from the broken file
    for (const auto& e : es.entities) {
        if (e.path == "unterminated.py") CHECK(e.kind == EntityKind::File);
    }
    // the healthy sibling still parses
    CHECK(es.find("fine.py", "helper", EntityKind::Function) != nullptr);
    REQUIRE(!es.diagnostics.empty());
    CHECK(es.diagnostics[0].path == "unterminated.py");
}

TEST_CASE("fixture scan matches the hand-enumerated entity listing") {
    auto es = scan_repository(fixture("mini_sklearn"));
    const auto& expected = testing_support::mini_sklearn_entities();
    REQUIRE(es.entities.size() == expected.size());

    std::vector<std::string> got;
    for (const auto& e : es.entities) {
        got.push_back(e.key() + "|" + to_string(e.kind) + "|" + std::to_string(e.span.start) +
                      "-" + std::to_string(e.span.end));
    }
    std::sort(got.begin(), got.end());
    std::vector<std::string> want;
    for (const auto& e : expected) {
        want.push_back(e.key + "|" + e.kind + "|" + std::to_string(e.start) + "-" +
                       std::to_string(e.end));
    }
    std::sort(want.begin(), want.end());
    CHECK(got == want);

    auto contains = sorted_edges(es.dep_edges);
    auto expected_contains = testing_support::mini_sklearn_contains();
    std::sort(expected_contains.begin(), expected_contains.end());
    CHECK(contains == expected_contains);
}

TEST_CASE("fixture dependency extraction equals the hand oracle exactly") {
    auto es = scan_repository(fixture("mini_sklearn"));
    auto analysis = extract_dependencies(es);
    auto got = sorted_edges(analysis.edges);
    auto want = testing_support::mini_sklearn_dependencies();
    std::sort(want.begin(), want.end());
    CHECK(got == want);
    CHECK(analysis.unresolved > 0);  // builtins et al. are tallied, not emitted
}

TEST_CASE("single-hop examples resolve") {
    TempRepo repo;
    repo.write("a.py", "def f():\n    return 1\n");
    repo.write("b.py",
               "from a import f\n"
               "def g():\n"
               "    return f()\n");
    auto es = scan_repository(repo.root.string());
    auto edges = sorted_edges(extract_dependencies(es).edges);
    CHECK(edges == std::vector<std::string>{"imports b.py -> a.py", "invokes b.py:g -> a.py:f"});
}

TEST_CASE("same-file inheritance resolves") {
    TempRepo repo;
    repo.write("m.py",
               "class C:\n"
               "    pass\n"
               "class D(C):\n"
               "    pass\n");
    auto es = scan_repository(repo.root.string());
    auto edges = sorted_edges(extract_dependencies(es).edges);
    CHECK(edges == std::vector<std::string>{"inherits m.py:D -> m.py:C"});
}

TEST_CASE("nesting property: contains edges mirror span nesting") {
    auto es = scan_repository(fixture("mini_sklearn"));
    // recompute the parent of each entity from spans alone
    for (const auto& e : es.entities) {
        if (e.kind == EntityKind::File) continue;
        const EntityRef* tightest = nullptr;
        for (const auto& candidate : es.entities) {
            if (candidate.path != e.path || candidate == e) continue;
            if (candidate.span.start <= e.span.start && e.span.end <= candidate.span.end) {
                if (!tightest ||
                    (candidate.span.end - candidate.span.start) <
                        (tightest->span.end - tightest->span.start)) {
                    tightest = &candidate;
                }
            }
        }
        REQUIRE(tightest != nullptr);
        bool found = false;
        for (const auto& edge : es.dep_edges) {
            if (edge.kind == DepKind::Contains && edge.dst == e && edge.src == *tightest) {
                found = true;
            }
        }
        CHECK_MESSAGE(found, "span parent mismatch for ", e.key());
    }
}

TEST_CASE("scan determinism") {
    auto first = scan_repository(fixture("mini_sklearn"));
    auto second = scan_repository(fixture("mini_sklearn"));
    CHECK(first.entities == second.entities);
    CHECK(first.dep_edges == second.dep_edges);
}

TEST_CASE("entity_at maps lines to the innermost entity") {
    auto es = scan_repository(fixture("mini_sklearn"));

    auto inside_method = entity_at(es, "preprocessing/scaler.py", 11);
    REQUIRE(inside_method.entity.has_value());
    CHECK(inside_method.entity->key() == "preprocessing/scaler.py:StandardScaler.fit");

    // module level between definitions -> the file entity
    auto between = entity_at(es, "utils/validation.py", 12);
    REQUIRE(between.entity.has_value());
    CHECK(between.entity->key() == "utils/validation.py");
    CHECK(between.entity->kind == EntityKind::File);

    auto unknown = entity_at(es, "no/such/file.py", 1);
    CHECK_FALSE(unknown.known_path);
    CHECK_FALSE(unknown.entity.has_value());
}

TEST_CASE("entity_at reaches nested functions") {
    TempRepo repo;
    repo.write("n.py",
               "class C:\n"
               "    def m(self):\n"
               "        def inner():\n"
               "            return 1\n"
               "        return inner\n");
    auto es = scan_repository(repo.root.string());
    auto hit = entity_at(es, "n.py", 4);
    REQUIRE(hit.entity.has_value());
    CHECK(hit.entity->key() == "n.py:C.m.inner");
}

TEST_CASE("include and exclude globs") {
    TempRepo repo;
    repo.write("keep/a.py", "def f(): pass\n");
    repo.write("skip/b.py", "def g(): pass\n");
    repo.write("keep/notes.txt", "not python\n");
    auto es = scan_repository(repo.root.string(), {"**/*.py"}, {"skip/**"});
    CHECK(es.files.count("keep/a.py") == 1);
    CHECK(es.files.count("skip/b.py") == 0);
    CHECK(es.files.count("keep/notes.txt") == 0);
}

TEST_CASE("glob matching handles ** at the root") {
    CHECK(glob_match("**/*.py", "a.py"));
    CHECK(glob_match("**/*.py", "pkg/sub/m.py"));
    CHECK_FALSE(glob_match("**/*.py", "a.txt"));
    CHECK(glob_match("pkg/*.py", "pkg/m.py"));
    CHECK_FALSE(glob_match("pkg/*.py", "pkg/sub/m.py"));
}
