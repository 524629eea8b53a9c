#include "reap/remote.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace reap {

using nlohmann::json;

namespace {

std::string bearer_token(const std::string& env_name) {
    if (env_name.empty()) return "";
    const char* value = std::getenv(env_name.c_str());
    return value == nullptr ? "" : value;
}

bool retriable_status(int status) { return status == 429 || status >= 500; }

// POSTs one JSON body, retrying transport errors and 429/5xx with
// exponential backoff. Returns the response body on 2xx.
std::string post_json(const RemoteProviderConfig& config, const std::string& path,
                      const std::string& body) {
    if (config.base_url.empty()) {
        throw Error(ErrorCode::InvalidArgument, "remote provider needs a base_url");
    }
    int attempts = std::max(1, config.max_attempts);
    long backoff_ms = std::max(0, config.backoff_initial_ms);
    std::string token = bearer_token(config.api_key_env);

    std::string last_failure;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1 && backoff_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(config.base_url);
        client.set_connection_timeout(config.timeout_s, 0);
        client.set_read_timeout(config.timeout_s, 0);
        client.set_write_timeout(config.timeout_s, 0);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        if (retriable_status(res->status)) {
            last_failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        throw Error(ErrorCode::ProviderFailure,
                    "remote call to " + path + " failed with HTTP " +
                        std::to_string(res->status),
                    /*retriable=*/false);
    }
    throw Error(ErrorCode::ProviderFailure,
                "remote call to " + path + " failed after " + std::to_string(attempts) +
                    " attempts (" + last_failure + ")",
                /*retriable=*/true);
}

json parse_response(const std::string& body, const std::string& path) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::ProviderFailure,
                    "remote call to " + path + " returned a malformed body",
                    /*retriable=*/false);
    }
    return j;
}

void require_non_empty(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::EmptyText, "cannot embed empty text");
    }
}

}  // namespace

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteProviderConfig config)
    : config_(std::move(config)) {
    if (config_.path.empty()) config_.path = "/v1/embeddings";
    if (config_.batch_size < 1) config_.batch_size = 1;
    name_ = config_.model.empty() ? "remote" : "remote:" + config_.model;
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::request_batch(
    const std::vector<std::string>& texts) {
    json body{{"model", config_.model}, {"input", texts}};
    json response = parse_response(post_json(config_, config_.path, body.dump()), config_.path);

    if (!response.contains("data") || !response.at("data").is_array() ||
        response.at("data").size() != texts.size()) {
        throw Error(ErrorCode::ProviderFailure,
                    "embedding response 'data' does not match the input count",
                    /*retriable=*/false);
    }
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(texts.size());
    for (const auto& entry : response.at("data")) {
        if (!entry.is_object() || !entry.contains("embedding") ||
            !entry.at("embedding").is_array() || entry.at("embedding").empty()) {
            throw Error(ErrorCode::ProviderFailure, "embedding response entry is malformed",
                        /*retriable=*/false);
        }
        EmbeddingVector v;
        v.values = entry.at("embedding").get<std::vector<double>>();
        for (double x : v.values) {
            if (!std::isfinite(x)) {
                throw Error(ErrorCode::ProviderFailure,
                            "embedding response carries a non-finite value",
                            /*retriable=*/false);
            }
        }
        vectors.push_back(std::move(v));
    }
    return vectors;
}

EmbeddingVector RemoteEmbeddingProvider::embed(const std::string& text) {
    return embed_batch({text}).front();
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    for (const auto& text : texts) require_non_empty(text);

    std::vector<std::vector<std::string>> chunks;
    for (std::size_t i = 0; i < texts.size(); i += config_.batch_size) {
        std::size_t end = std::min(texts.size(), i + config_.batch_size);
        chunks.emplace_back(texts.begin() + static_cast<long>(i),
                            texts.begin() + static_cast<long>(end));
    }

    std::vector<std::vector<EmbeddingVector>> chunk_results(chunks.size());
    std::vector<std::exception_ptr> chunk_errors(chunks.size());
    int workers = std::max(1, config_.parallelism);
    if (workers == 1 || chunks.size() <= 1) {
        for (std::size_t i = 0; i < chunks.size(); ++i) chunk_results[i] = request_batch(chunks[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto run = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= chunks.size()) return;
                try {
                    chunk_results[i] = request_batch(chunks[i]);
                } catch (...) {
                    chunk_errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> threads;
        for (int t = 0; t < workers; ++t) threads.emplace_back(run);
        for (auto& thread : threads) thread.join();
        for (const auto& error : chunk_errors) {
            if (error) std::rethrow_exception(error);
        }
    }

    // Dimension pinning happens after the workers join so dim_ is
    // never written concurrently.
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto& chunk : chunk_results) {
        for (auto& v : chunk) {
            if (dim_ == 0) dim_ = v.dim();
            if (v.dim() != dim_) {
                throw Error(ErrorCode::DimensionMismatch,
                            "remote embedding dim " + std::to_string(v.dim()) +
                                " differs from pinned dim " + std::to_string(dim_));
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

RemoteGenerationProvider::RemoteGenerationProvider(RemoteProviderConfig config,
                                                   LLMConfig llm_config)
    : config_(std::move(config)), llm_config_(llm_config) {
    validate_llm_config(llm_config_);
    if (config_.path.empty()) config_.path = "/v1/completions";
    name_ = config_.model.empty() ? "remote" : "remote:" + config_.model;
}

GenerationResult RemoteGenerationProvider::generate(const std::string& prompt) {
    require_non_empty(prompt);
    json body{{"model", config_.model},
              {"prompt", prompt},
              {"temperature", llm_config_.temperature},
              {"top_p", llm_config_.top_p}};
    json response = parse_response(post_json(config_, config_.path, body.dump()), config_.path);

    if (!response.contains("text") || !response.at("text").is_string() ||
        !response.contains("prompt_tokens") || !response.contains("total_tokens")) {
        throw Error(ErrorCode::ProviderFailure, "completion response is missing fields",
                    /*retriable=*/false);
    }
    GenerationResult result;
    result.text = response.at("text").get<std::string>();
    result.prompt_tokens = response.at("prompt_tokens").get<long>();
    result.total_tokens = response.at("total_tokens").get<long>();
    if (result.prompt_tokens < 0 || result.total_tokens < result.prompt_tokens) {
        throw Error(ErrorCode::ProviderFailure, "completion response token counts are invalid",
                    /*retriable=*/false);
    }
    if (result.text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::EmptyCompletion, "provider returned a blank completion");
    }
    return result;
}

}  // namespace reap
