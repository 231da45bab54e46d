#include "assistrag/http_provider.hpp"

#include "assistrag/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

namespace assistrag {

namespace {

using nlohmann::json;

std::string excerpt(const std::string& body, std::size_t limit = 200) {
    if (body.size() <= limit) return body;
    return body.substr(0, limit) + "...";
}

} // namespace

std::string api_key_from_env() {
    const char* key = std::getenv("ASSISTRAG_API_KEY");
    return key ? std::string(key) : std::string();
}

HttpProvider::HttpProvider(HttpProviderConfig config,
                           std::shared_ptr<const Tokenizer> tokenizer)
    : config_(std::move(config)), tokenizer_(std::move(tokenizer)) {
    if (config_.base_url.empty()) {
        throw ConfigError("http provider requires a base_url");
    }
    // Split "scheme://host[:port][/prefix]" into client target and path prefix.
    std::string url = config_.base_url;
    std::size_t scheme_end = url.find("://");
    std::size_t authority_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    std::size_t path_start = url.find('/', authority_start);
    std::string prefix;
    if (path_start != std::string::npos) {
        prefix = url.substr(path_start);
        url = url.substr(0, path_start);
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    host_ = url;
    path_ = prefix + "/chat/completions";
}

Completion HttpProvider::attempt(const PromptRequest& request) const {
    json body = {
        {"model", config_.model},
        {"messages", json::array()},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
    for (const auto& message : request.messages) {
        body["messages"].push_back({{"role", role_name(message.role)}, {"content", message.text}});
    }

    httplib::Client client(host_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};

    auto result = client.Post(path_, headers, body.dump(), "application/json");
    if (!result) {
        throw TransportError("chat completion request failed: " + httplib::to_string(result.error()),
                             0, "");
    }
    if (result->status < 200 || result->status >= 300) {
        throw TransportError("chat completion returned HTTP " + std::to_string(result->status),
                             result->status, excerpt(result->body));
    }

    json parsed;
    try {
        parsed = json::parse(result->body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("chat completion response is not valid JSON: ") + e.what(),
                             result->status, excerpt(result->body));
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty() ||
        !parsed["choices"][0].contains("message") ||
        !parsed["choices"][0]["message"].contains("content")) {
        throw TransportError("chat completion response is missing choices[0].message.content",
                             result->status, excerpt(result->body));
    }

    const Tokenizer& tok = tokenizer_ ? *tokenizer_ : default_tokenizer();
    Completion completion;
    completion.text = parsed["choices"][0]["message"]["content"].is_null()
                          ? std::string()
                          : parsed["choices"][0]["message"]["content"].get<std::string>();
    completion.provider_tag = config_.tag;
    if (parsed.contains("usage") && parsed["usage"].contains("prompt_tokens") &&
        parsed["usage"].contains("completion_tokens")) {
        completion.prompt_token_count = parsed["usage"]["prompt_tokens"].get<std::size_t>();
        completion.completion_token_count = parsed["usage"]["completion_tokens"].get<std::size_t>();
    } else {
        completion.prompt_token_count = tok.count(render_prompt(request));
        completion.completion_token_count = tok.count(completion.text);
    }
    return completion;
}

Completion HttpProvider::complete(const PromptRequest& request) {
    if (request.messages.empty()) {
        throw DomainError("prompt request has no messages");
    }
    if (config_.api_key.empty()) {
        throw ConfigError("live backend is missing an API key (set ASSISTRAG_API_KEY)");
    }
    int attempts_left = config_.retries;
    for (;;) {
        try {
            return attempt(request);
        } catch (const TransportError&) {
            if (attempts_left <= 0) throw;
            --attempts_left;
            std::this_thread::sleep_for(config_.retry_delay);
        }
    }
}

} // namespace assistrag
