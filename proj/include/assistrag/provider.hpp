#pragma once

#include "assistrag/tokenizer.hpp"

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace assistrag {

enum class Role { system, user, assistant };

const char* role_name(Role role);

// Which token tally a backend bills to: `api` for the remote main LLM,
// `local` for the assistant model.
enum class ProviderTag { api, local };

const char* provider_tag_name(ProviderTag tag);
ProviderTag provider_tag_from_name(const std::string& name);

struct Message {
    Role role = Role::user;
    std::string text;
};

struct PromptRequest {
    std::vector<Message> messages;
    double temperature = 0.0;
    int max_output_tokens = 512;
    ProviderTag provider_tag = ProviderTag::api;
};

struct Completion {
    std::string text;
    std::size_t prompt_token_count = 0;
    std::size_t completion_token_count = 0;
    ProviderTag provider_tag = ProviderTag::api;
};

// Message texts joined with newlines; the surface the mock matches against
// and the text token counts fall back to.
std::string render_prompt(const PromptRequest& request);

// Completion backend. Implementations must be safe for concurrent complete()
// calls on one handle.
class Provider {
public:
    virtual ~Provider() = default;

    virtual Completion complete(const PromptRequest& request) = 0;
    virtual ProviderTag tag() const = 0;
};

using ProviderHandle = std::shared_ptr<Provider>;

struct MockScriptEntry {
    std::string matcher; // substring pattern over the rendered prompt
    std::string response;
};

struct MockScript {
    std::vector<MockScriptEntry> entries; // first matching entry wins
    std::optional<std::string> default_response;
};

// Deterministic scripted backend. The script is immutable after construction;
// call bookkeeping is internally synchronized.
class MockProvider final : public Provider {
public:
    explicit MockProvider(MockScript script, ProviderTag tag = ProviderTag::local,
                          std::shared_ptr<const Tokenizer> tokenizer = nullptr);

    Completion complete(const PromptRequest& request) override;
    ProviderTag tag() const override { return tag_; }

    std::size_t call_count() const;
    std::vector<std::string> prompts_seen() const;

private:
    MockScript script_;
    ProviderTag tag_;
    std::shared_ptr<const Tokenizer> tokenizer_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
    std::vector<std::string> prompts_;
};

} // namespace assistrag
