#include "assistrag/provider.hpp"

#include "assistrag/errors.hpp"

namespace assistrag {

const char* role_name(Role role) {
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

const char* provider_tag_name(ProviderTag tag) {
    return tag == ProviderTag::api ? "api" : "local";
}

ProviderTag provider_tag_from_name(const std::string& name) {
    if (name == "api") return ProviderTag::api;
    if (name == "local") return ProviderTag::local;
    throw ConfigError("unknown provider tag: " + name);
}

std::string render_prompt(const PromptRequest& request) {
    std::string rendered;
    for (std::size_t i = 0; i < request.messages.size(); ++i) {
        if (i > 0) rendered += '\n';
        rendered += request.messages[i].text;
    }
    return rendered;
}

MockProvider::MockProvider(MockScript script, ProviderTag tag,
                           std::shared_ptr<const Tokenizer> tokenizer)
    : script_(std::move(script)), tag_(tag), tokenizer_(std::move(tokenizer)) {}

Completion MockProvider::complete(const PromptRequest& request) {
    if (request.messages.empty()) {
        throw DomainError("prompt request has no messages");
    }
    std::string prompt = render_prompt(request);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++calls_;
        prompts_.push_back(prompt);
    }

    const std::string* response = nullptr;
    for (const auto& entry : script_.entries) {
        if (prompt.find(entry.matcher) != std::string::npos) {
            response = &entry.response;
            break;
        }
    }
    if (response == nullptr) {
        if (!script_.default_response) {
            throw ScriptError("mock script has no entry matching the prompt and no default response");
        }
        response = &*script_.default_response;
    }

    const Tokenizer& tok = tokenizer_ ? *tokenizer_ : default_tokenizer();
    Completion completion;
    completion.text = *response;
    completion.prompt_token_count = tok.count(prompt);
    completion.completion_token_count = tok.count(*response);
    completion.provider_tag = tag_;
    return completion;
}

std::size_t MockProvider::call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
}

std::vector<std::string> MockProvider::prompts_seen() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return prompts_;
}

} // namespace assistrag
