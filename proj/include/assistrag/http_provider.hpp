#pragma once

#include "assistrag/provider.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace assistrag {

struct HttpProviderConfig {
    std::string base_url;  // e.g. "https://api.openai.com/v1"
    std::string model;
    std::string api_key;   // usually taken from ASSISTRAG_API_KEY
    ProviderTag tag = ProviderTag::api;
    int timeout_seconds = 60;
    int retries = 1; // extra attempts after the first failure
    std::chrono::milliseconds retry_delay{1000};
};

// Chat-completion client speaking the OpenAI-compatible JSON wire format:
// POST {base_url}/chat/completions with {model, messages, temperature,
// max_tokens}; reads choices[0].message.content, and usage token counts when
// the server reports them (tokenizer counts otherwise).
class HttpProvider final : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config,
                          std::shared_ptr<const Tokenizer> tokenizer = nullptr);

    Completion complete(const PromptRequest& request) override;
    ProviderTag tag() const override { return config_.tag; }

private:
    Completion attempt(const PromptRequest& request) const;

    HttpProviderConfig config_;
    std::shared_ptr<const Tokenizer> tokenizer_;
    std::string host_;      // scheme://authority
    std::string path_;      // endpoint path, prefix folded in
};

// Reads ASSISTRAG_API_KEY; empty string when unset.
std::string api_key_from_env();

} // namespace assistrag
