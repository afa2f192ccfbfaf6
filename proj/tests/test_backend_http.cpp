#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "driveframe/backend.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

using namespace driveframe;

namespace {

struct TestServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    nlohmann::json last_request;
    std::string last_auth;

    TestServer() {
        server.Post("/v1/generate", [this](const httplib::Request& req,
                                           httplib::Response& res) {
            last_request = nlohmann::json::parse(req.body, nullptr, false);
            last_auth = req.get_header_value("Authorization");
            nlohmann::json out{{"text", "generated: " +
                                            last_request.value("model", "?")}};
            res.set_content(out.dump(), "application/json");
        });
        server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"nope\":true}", "application/json");
        });
        server.Post("/teapot", [](const httplib::Request&, httplib::Response& res) {
            res.status = 418;
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        thread.join();
    }
    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

} // namespace

TEST_CASE("http backend speaks the documented wire protocol") {
    TestServer srv;
    HttpBackend::Options o;
    o.endpoint = srv.url("/v1/generate");
    o.api_key = "secret-key";
    o.max_tokens = 321;
    HttpBackend backend(std::move(o));

    const std::string reply = backend.generate("draft-strong", "hello prompt");
    CHECK(reply == "generated: draft-strong");
    REQUIRE(srv.last_request.is_object());
    CHECK(srv.last_request.at("model") == "draft-strong");
    CHECK(srv.last_request.at("prompt") == "hello prompt");
    CHECK(srv.last_request.at("max_tokens") == 321);
    CHECK(srv.last_auth == "Bearer secret-key");
}

TEST_CASE("missing text field and http errors surface as backend errors") {
    TestServer srv;
    {
        HttpBackend::Options o;
        o.endpoint = srv.url("/broken");
        HttpBackend backend(std::move(o));
        CHECK_THROWS_AS(backend.generate("m", "p"), BackendError);
    }
    {
        HttpBackend::Options o;
        o.endpoint = srv.url("/teapot");
        HttpBackend backend(std::move(o));
        CHECK_THROWS_AS(backend.generate("m", "p"), BackendError);
    }
    {
        HttpBackend::Options o;
        o.endpoint = "http://127.0.0.1:1/unreachable";
        o.timeout_s = 0.5;
        HttpBackend backend(std::move(o));
        CHECK_THROWS_AS(backend.generate("m", "p"), BackendError);
    }
}

TEST_CASE("endpoint comes from the environment when not given") {
    TestServer srv;
    ::setenv("DF_LLM_ENDPOINT", srv.url("/v1/generate").c_str(), 1);
    ::setenv("DF_LLM_KEY", "env-key", 1);
    auto backend = HttpBackend::from_env();
    CHECK(backend.generate("m", "p") == "generated: m");
    CHECK(srv.last_auth == "Bearer env-key");
    ::unsetenv("DF_LLM_ENDPOINT");
    ::unsetenv("DF_LLM_KEY");
}
