#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rpg/provider.hpp"

using namespace rpg;
using nlohmann::json;

namespace {

// Loopback chat endpoint returning scripted bodies in arrival order.
class FakeEndpoint {
public:
    explicit FakeEndpoint(std::vector<std::string> bodies) : bodies_(std::move(bodies)) {
        server_.Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
            requests.push_back(req.body);
            size_t index = std::min(hits_.fetch_add(1), bodies_.size() - 1);
            res.set_content(bodies_[index], "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeEndpoint() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat";
    }

    std::vector<std::string> requests;

private:
    httplib::Server server_;
    std::vector<std::string> bodies_;
    std::atomic<size_t> hits_{0};
    int port_ = 0;
    std::thread thread_;
};

std::string chat_reply(const std::string& content) {
    return json{{"choices", json::array({json{{"message", json{{"content", content}}}}})}}.dump();
}

ProviderOptions options_for(const FakeEndpoint& endpoint) {
    ProviderOptions options;
    options.endpoint = endpoint.endpoint();
    options.model = "test-model";
    options.retries = 3;
    return options;
}

EntityRef fn(const std::string& name) {
    return EntityRef{"a.py", name, EntityKind::Function, {1, 3}};
}

}  // namespace

TEST_CASE("remote parse_features reads the solution block") {
    FakeEndpoint endpoint({chat_reply(
        "text before\n<solution>\n"
        "{\"a.py:load_config\": [\"Load Config!\", \"cache settings\"], \"a.py:noop\": []}\n"
        "</solution>\ntrailing")});
    auto provider = make_remote_provider(options_for(endpoint));
    auto result = provider->parse_features(
        {{fn("load_config"), "def load_config(): ..."}, {fn("noop"), "def noop(): pass"}});
    REQUIRE(result.size() == 2);
    CHECK(result[fn("load_config")] ==
          std::vector<FeaturePhrase>{"load config", "cache settings"});
    CHECK(result[fn("noop")].empty());

    // wire format: chat-style JSON with the embedded template
    REQUIRE(endpoint.requests.size() == 1);
    json request = json::parse(endpoint.requests[0]);
    CHECK(request["model"] == "test-model");
    REQUIRE(request["messages"].is_array());
    std::string content = request["messages"][0]["content"].get<std::string>();
    CHECK(content.find("verb + object format") != std::string::npos);
    CHECK(content.find("a.py:load_config") != std::string::npos);
    CHECK(provider->account().total().request_count == 1);
}

TEST_CASE("remote parse_features retries malformed replies then degrades to empty lists") {
    FakeEndpoint endpoint({chat_reply("no solution block here"),
                           chat_reply("still nothing"),
                           chat_reply("third strike")});
    auto provider = make_remote_provider(options_for(endpoint));
    auto result = provider->parse_features({{fn("f"), "def f(): pass"}});
    REQUIRE(result.size() == 1);
    CHECK(result[fn("f")].empty());
    CHECK(endpoint.requests.size() == 3);
    REQUIRE_FALSE(provider->diagnostics().empty());
}

TEST_CASE("remote parse_features tolerates missing entities with a diagnostic") {
    FakeEndpoint endpoint({chat_reply("<solution>{\"a.py:f\": [\"do work\"]}</solution>")});
    auto provider = make_remote_provider(options_for(endpoint));
    auto result = provider->parse_features(
        {{fn("f"), "def f(): ..."}, {fn("ghost"), "def ghost(): ..."}});
    CHECK(result[fn("f")] == std::vector<FeaturePhrase>{"do work"});
    CHECK(result[fn("ghost")].empty());
    bool noted = false;
    for (const auto& d : provider->diagnostics()) {
        if (d.path == "a.py:ghost") noted = true;
    }
    CHECK(noted);
}

TEST_CASE("remote transport failure raises after retries") {
    ProviderOptions options;
    options.endpoint = "http://127.0.0.1:1/v1/chat";  // nothing listens here
    options.retries = 2;
    auto provider = make_remote_provider(options);
    CHECK_THROWS_AS(provider->parse_features({{fn("f"), ""}}), ProviderError);
}

TEST_CASE("remote route validates the choice against candidates") {
    FakeEndpoint endpoint({chat_reply("<solution>{\"choice\": \"n2\"}</solution>"),
                           chat_reply("<solution>{\"choice\": \"bogus\"}</solution>"),
                           chat_reply("<solution>{\"choice\": null}</solution>")});
    auto provider = make_remote_provider(options_for(endpoint));
    std::vector<RouteCandidate> candidates = {{"n1", {"load config"}}, {"n2", {"render chart"}}};
    CHECK(provider->route(candidates, {"render chart"}) == "n2");
    CHECK_FALSE(provider->route(candidates, {"render chart"}).has_value());  // bogus id
    CHECK_FALSE(provider->route(candidates, {"render chart"}).has_value());  // explicit null
}

TEST_CASE("remote drift clamps to the unit interval") {
    FakeEndpoint endpoint({chat_reply("<solution>{\"drift\": 3.5}</solution>"),
                           chat_reply("<solution>{\"drift\": 0.25}</solution>")});
    auto provider = make_remote_provider(options_for(endpoint));
    CHECK(provider->judge_drift({"a"}, {"b"}) == doctest::Approx(1.0));
    CHECK(provider->judge_drift({"a"}, {"b"}) == doctest::Approx(0.25));
}

TEST_CASE("remote assign_paths retries unknown areas and falls back") {
    FakeEndpoint endpoint({
        chat_reply("<solution>{\"Nonexistent/cat one/sub one\": [\"grp\"]}</solution>"),
        chat_reply("<solution>{\"Nonexistent/cat one/sub one\": [\"grp\"]}</solution>"),
        chat_reply("<solution>{\"Nonexistent/cat one/sub one\": [\"grp\"]}</solution>"),
    });
    auto provider = make_remote_provider(options_for(endpoint));
    GroupSummary group{"grp", {"grp/a.py"}, {"load data", "cache rows"}};
    auto assignment = provider->assign_paths({group}, {"DataProcessing"});
    REQUIRE(assignment.size() == 1);
    CHECK(assignment.begin()->first == "DataProcessing/load data/cache rows");
    bool noted = false;
    for (const auto& d : provider->diagnostics()) {
        if (d.path == "grp") noted = true;
    }
    CHECK(noted);
}

TEST_CASE("remote discover_domains normalizes to PascalCase") {
    FakeEndpoint endpoint(
        {chat_reply("<solution>[\"data processing\", \"ModelTraining\", \"data processing\"]"
                    "</solution>")});
    auto provider = make_remote_provider(options_for(endpoint));
    auto areas =
        provider->discover_domains({{"a/x.py", {"load data"}}, {"b/y.py", {"train model"}}});
    CHECK(areas == std::vector<std::string>{"DataProcessing", "ModelTraining"});
}
