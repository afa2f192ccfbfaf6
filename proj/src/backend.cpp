#include "driveframe/backend.hpp"

#include "driveframe/prompts.hpp"
#include "driveframe/textscan.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <semaphore>

namespace driveframe {

namespace {

std::string extract_block(std::string_view text, std::string_view begin,
                          std::string_view end) {
    auto b = text.find(begin);
    if (b == std::string_view::npos) return {};
    b += begin.size();
    auto e = text.find(end, b);
    if (e == std::string_view::npos) return {};
    std::string_view body = text.substr(b, e - b);
    while (!body.empty() && (body.front() == '\n' || body.front() == '\r')) body.remove_prefix(1);
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.remove_suffix(1);
    return std::string(body);
}

std::string find_marker(std::string_view prompt) {
    auto line = prompt.find(kMarkerLinePrefix);
    if (line == std::string_view::npos) return {};
    auto start = line + kMarkerLinePrefix.size();
    auto stop = prompt.find('\n', start);
    if (stop == std::string_view::npos) stop = prompt.size();
    std::string_view m = prompt.substr(start, stop - start);
    while (!m.empty() && (m.back() == '\r' || m.back() == ' ')) m.remove_suffix(1);
    return std::string(m);
}

} // namespace

std::string StubBackend::generate(const std::string&, const std::string& prompt) {
    if (auto draft = extract_block(prompt, kDraftBegin, kDraftEnd); !draft.empty())
        return draft;
    if (auto plan = extract_block(prompt, kPlanBegin, kPlanEnd); !plan.empty())
        return plan;
    if (auto marker = find_marker(prompt); !marker.empty())
        return "Ease off early, keep a generous gap to the vehicle ahead, and let "
               "road conditions set your pace so the rule below stays easy to keep. " +
               marker;
    return "OK";
}

AdversarialBackend::AdversarialBackend(Corruption corruption,
                                       std::unique_ptr<GenerationBackend> inner)
    : corruption_(corruption),
      inner_(inner ? std::move(inner) : std::make_unique<StubBackend>()),
      rng_(corruption.seed) {}

std::string AdversarialBackend::generate(const std::string& model_id,
                                         const std::string& prompt) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng_) < corruption_.fail_prob)
        throw BackendError("backend: simulated failure");

    std::string text = inner_->generate(model_id, prompt);

    if (corruption_.numeral_prob > 0.0 && unit(rng_) < corruption_.numeral_call_prob) {
        for (const std::string& tok : extract_number_tokens(text)) {
            if (unit(rng_) >= corruption_.numeral_prob) continue;
            const long long bogus =
                static_cast<long long>(std::strtod(tok.c_str(), nullptr)) * 2 + 11;
            auto pos = text.find(tok);
            if (pos != std::string::npos)
                text.replace(pos, tok.size(), std::to_string(bogus));
        }
    }
    if (unit(rng_) < corruption_.drop_marker_prob) {
        auto open = text.rfind("(Highway Code");
        if (open != std::string::npos) {
            auto close = text.find(')', open);
            text.erase(open, close == std::string::npos ? std::string::npos
                                                        : close - open + 1);
        }
    }
    if (unit(rng_) < corruption_.overlong_prob) {
        for (int i = 0; i < 70; ++i) text += " padding";
    }
    return text;
}

class HttpBackend::Gate {
public:
    explicit Gate(int n) : sem_(n > 0 ? n : 1) {}
    void acquire() { sem_.acquire(); }
    void release() { sem_.release(); }

private:
    std::counting_semaphore<256> sem_;
};

HttpBackend::HttpBackend(Options opts) : opts_(std::move(opts)) {
    if (opts_.endpoint.empty())
        throw BackendError("backend: http backend needs an endpoint");
    auto scheme = opts_.endpoint.find("://");
    auto path = opts_.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path == std::string::npos) {
        host_ = opts_.endpoint;
        path_ = "/";
    } else {
        host_ = opts_.endpoint.substr(0, path);
        path_ = opts_.endpoint.substr(path);
    }
    gate_ = std::make_shared<Gate>(opts_.max_concurrency);
}

HttpBackend HttpBackend::from_env(int max_tokens, double timeout_s) {
    Options o;
    if (const char* ep = std::getenv("DF_LLM_ENDPOINT")) o.endpoint = ep;
    if (const char* key = std::getenv("DF_LLM_KEY")) o.api_key = key;
    o.max_tokens = max_tokens;
    o.timeout_s = timeout_s;
    if (o.endpoint.empty())
        throw BackendError("backend: DF_LLM_ENDPOINT is not set");
    return HttpBackend(std::move(o));
}

std::string HttpBackend::generate(const std::string& model_id, const std::string& prompt) {
    if (prompt.size() > capabilities().max_prompt_chars)
        throw BackendError("backend: prompt exceeds capability limit");

    gate_->acquire();
    struct Release {
        Gate* g;
        ~Release() { g->release(); }
    } release{gate_.get()};

    httplib::Client client(host_);
    const auto secs = static_cast<time_t>(opts_.timeout_s);
    const auto usecs = static_cast<time_t>((opts_.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!opts_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + opts_.api_key);

    nlohmann::json body{{"model", model_id}, {"prompt", prompt},
                        {"max_tokens", opts_.max_tokens}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
        throw BackendError("backend: http request failed: " +
                           httplib::to_string(res.error()));
    if (res->status != 200)
        throw BackendError("backend: http status " + std::to_string(res->status));
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("text") || !j["text"].is_string())
        throw BackendError("backend: response is missing a 'text' field");
    return j["text"].get<std::string>();
}

} // namespace driveframe
