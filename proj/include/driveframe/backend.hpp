#pragma once

#include "driveframe/errors.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>

namespace driveframe {

class BackendError : public Error {
public:
    explicit BackendError(const std::string& msg) : Error(msg) {}
};

struct BackendCapabilities {
    std::size_t max_prompt_chars = 200000;
};

// Text-generation backend. Model ids are opaque strings so a strong
// drafting model and a cheaper refinement model can be addressed without
// binding to any vendor. Implementations are stateless between calls from
// the caller's perspective.
class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual std::string generate(const std::string& model_id, const std::string& prompt) = 0;
    virtual BackendCapabilities capabilities() const { return {}; }
};

// Deterministic built-in backend. It understands the prompt templates this
// project emits: a refine prompt echoes the embedded draft, a draft prompt
// renders the embedded plan block, a tip prompt answers with a compliant
// tip ending in the requested citation marker.
class StubBackend : public GenerationBackend {
public:
    std::string generate(const std::string& model_id, const std::string& prompt) override;
};

// Test double that corrupts an inner backend's output. Corruption draws
// are seeded and deterministic across a run.
class AdversarialBackend : public GenerationBackend {
public:
    struct Corruption {
        double numeral_call_prob = 1.0; // per call: gate for numeral corruption
        double numeral_prob = 0.0;      // per numeral: replace with an alien value
        double drop_marker_prob = 0.0;  // per call: strip the citation marker
        double overlong_prob = 0.0;     // per call: pad past the word limit
        double fail_prob = 0.0;         // per call: throw BackendError
        std::uint64_t seed = 0;
    };

    explicit AdversarialBackend(Corruption corruption,
                                std::unique_ptr<GenerationBackend> inner = nullptr);

    std::string generate(const std::string& model_id, const std::string& prompt) override;

private:
    Corruption corruption_;
    std::unique_ptr<GenerationBackend> inner_;
    std::mt19937_64 rng_;
};

// Backend used when nothing is configured; always fails so the pipelines
// exercise their offline fallbacks.
class NullBackend : public GenerationBackend {
public:
    std::string generate(const std::string&, const std::string&) override {
        throw BackendError("backend: no generation backend configured");
    }
};

// Minimal HTTP client for a generic completion endpoint.
// Request:  POST <endpoint>  {"model": ..., "prompt": ..., "max_tokens": ...}
// Response: {"text": ...}
// Endpoint and credential come from DF_LLM_ENDPOINT / DF_LLM_KEY unless
// given explicitly. Concurrent requests are capped.
class HttpBackend : public GenerationBackend {
public:
    struct Options {
        std::string endpoint;  // e.g. http://host:8080/v1/generate
        std::string api_key;
        int max_tokens = 800;
        double timeout_s = 30.0;
        int max_concurrency = 4;
    };

    explicit HttpBackend(Options opts);
    static HttpBackend from_env(int max_tokens = 800, double timeout_s = 30.0);

    std::string generate(const std::string& model_id, const std::string& prompt) override;

private:
    Options opts_;
    std::string host_;
    std::string path_;
    class Gate;
    std::shared_ptr<Gate> gate_;
};

} // namespace driveframe
