#pragma once

#include <string>
#include <vector>

#include "reap/embedding.hpp"
#include "reap/knowledge.hpp"

namespace reap {

/// Shared HTTP provider settings. The API key is read from the
/// environment variable named by `api_key_env`, never from flags.
struct RemoteProviderConfig {
    std::string base_url;  // e.g. "http://localhost:8080"
    std::string path;      // defaults per provider when empty
    std::string model;
    std::string api_key_env = "REAP_API_KEY";
    int timeout_s = 30;
    int max_attempts = 3;
    int backoff_initial_ms = 100;
    int batch_size = 16;  // embedding requests per POST
    int parallelism = 4;  // concurrent in-flight batch requests
};

/// POST {path} with {"model", "input": [texts]}, expecting
/// {"data": [{"embedding": [...]}, ...]} in input order. Retries
/// retriable failures (transport errors, HTTP 429/5xx) with
/// exponential backoff.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(RemoteProviderConfig config);

    const std::string& name() const override { return name_; }

    /// 0 until the first successful call pins the dimension.
    std::size_t dim() const override { return dim_; }

    EmbeddingVector embed(const std::string& text) override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::vector<EmbeddingVector> request_batch(const std::vector<std::string>& texts);

    RemoteProviderConfig config_;
    std::string name_;
    std::size_t dim_ = 0;
};

/// POST {path} with {"model", "prompt", "temperature", "top_p"},
/// expecting {"text", "prompt_tokens", "total_tokens"}. The LLMConfig
/// is forwarded on every request.
class RemoteGenerationProvider : public GenerationProvider {
public:
    RemoteGenerationProvider(RemoteProviderConfig config, LLMConfig llm_config = {});

    const std::string& name() const override { return name_; }
    const LLMConfig& config() const override { return llm_config_; }
    GenerationResult generate(const std::string& prompt) override;

private:
    RemoteProviderConfig config_;
    LLMConfig llm_config_;
    std::string name_;
};

}  // namespace reap
