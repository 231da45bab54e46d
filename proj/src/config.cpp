#include "assistrag/config.hpp"

#include "assistrag/errors.hpp"
#include "assistrag/http_provider.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace assistrag {

using nlohmann::json;

namespace {

ProviderConfig provider_from_json(const json& parsed, ProviderTag default_tag) {
    ProviderConfig provider;
    provider.tag = default_tag;
    provider.kind = parsed.value("kind", std::string("mock"));
    if (parsed.contains("tag")) {
        provider.tag = provider_tag_from_name(parsed["tag"].get<std::string>());
    }
    provider.base_url = parsed.value("base_url", std::string());
    provider.model = parsed.value("model", std::string());
    provider.timeout_seconds = parsed.value("timeout_seconds", 60);
    if (parsed.contains("script")) {
        for (const auto& entry : parsed["script"]) {
            provider.script.entries.push_back({entry.at("match").get<std::string>(),
                                               entry.at("response").get<std::string>()});
        }
    }
    if (parsed.contains("default_response")) {
        provider.script.default_response = parsed["default_response"].get<std::string>();
    }
    return provider;
}

void validate_provider(const ProviderConfig& provider, const char* name) {
    if (provider.kind != "mock" && provider.kind != "http") {
        throw ConfigError(std::string("provider ") + name + ": unknown kind \"" + provider.kind +
                          "\"");
    }
    if (provider.kind == "http") {
        if (provider.base_url.empty()) {
            throw ConfigError(std::string("provider ") + name + ": http backend requires base_url");
        }
        if (provider.model.empty()) {
            throw ConfigError(std::string("provider ") + name + ": http backend requires a model");
        }
    }
}

} // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    json parsed;
    try {
        in >> parsed;
    } catch (const json::exception& e) {
        throw ConfigError("invalid config JSON in " + path + ": " + e.what());
    }
    return from_json(parsed);
}

RunConfig RunConfig::from_json(const json& parsed) {
    RunConfig config;
    if (parsed.contains("providers")) {
        const json& providers = parsed["providers"];
        if (providers.contains("assistant")) {
            config.assistant = provider_from_json(providers["assistant"], ProviderTag::local);
        }
        if (providers.contains("main")) {
            config.main = provider_from_json(providers["main"], ProviderTag::api);
        }
    }
    if (parsed.contains("retrieval")) {
        const json& retrieval = parsed["retrieval"];
        config.k_memory = retrieval.value("k_memory", config.k_memory);
        config.k_knowledge = retrieval.value("k_knowledge", config.k_knowledge);
        config.naive_k = retrieval.value("naive_k", config.naive_k);
        config.extraction_passage_cap =
            retrieval.value("extraction_passage_cap", config.extraction_passage_cap);
    }
    if (parsed.contains("generation")) {
        const json& generation = parsed["generation"];
        config.max_output_tokens = generation.value("max_output_tokens", config.max_output_tokens);
        config.temperature = generation.value("temperature", config.temperature);
    }
    config.templates_dir = parsed.value("templates_dir", std::string());
    if (parsed.contains("paths")) {
        const json& paths = parsed["paths"];
        config.knowledge_base_path = paths.value("knowledge_base", std::string());
        config.memory_path = paths.value("memory", std::string());
    }
    config.seed = parsed.value("seed", std::uint64_t{0});
    return config;
}

void RunConfig::validate(bool need_knowledge, bool need_memory) const {
    validate_provider(assistant, "assistant");
    validate_provider(main, "main");
    if (k_memory < 1 || k_knowledge < 1 || naive_k < 1) {
        throw ConfigError("retrieval k values must be at least 1");
    }
    if (max_output_tokens < 1) {
        throw ConfigError("max_output_tokens must be at least 1");
    }
    if (temperature < 0.0) {
        throw ConfigError("temperature must be non-negative");
    }
    if (!templates_dir.empty() && !std::filesystem::is_directory(templates_dir)) {
        throw ConfigError("templates_dir does not exist: " + templates_dir);
    }
    if (need_knowledge) {
        if (knowledge_base_path.empty()) {
            throw ConfigError("config needs paths.knowledge_base for this command");
        }
        if (!std::filesystem::exists(knowledge_base_path)) {
            throw ConfigError("knowledge base file does not exist: " + knowledge_base_path);
        }
    }
    if (need_memory && memory_path.empty()) {
        throw ConfigError("config needs paths.memory for this command");
    }
}

ProviderHandle make_provider(const ProviderConfig& provider) {
    if (provider.kind == "mock") {
        return std::make_shared<MockProvider>(provider.script, provider.tag);
    }
    HttpProviderConfig http;
    http.base_url = provider.base_url;
    http.model = provider.model;
    http.api_key = api_key_from_env();
    http.tag = provider.tag;
    http.timeout_seconds = provider.timeout_seconds;
    return std::make_shared<HttpProvider>(http);
}

Services Runtime::services() {
    Services services;
    services.assistant = assistant;
    services.main = main;
    services.knowledge = knowledge.get();
    services.memory = memory.get();
    services.templates = templates;
    services.config.k_memory = config.k_memory;
    services.config.k_knowledge_per_query = config.k_knowledge;
    services.config.naive_k = config.naive_k;
    services.config.action_options.max_output_tokens = config.max_output_tokens;
    services.config.action_options.temperature = config.temperature;
    services.config.action_options.extraction_passage_cap = config.extraction_passage_cap;
    return services;
}

Runtime build_runtime(const RunConfig& config, bool need_knowledge, bool need_memory) {
    config.validate(need_knowledge, need_memory);
    Runtime runtime;
    runtime.config = config;
    runtime.assistant = make_provider(config.assistant);
    runtime.main = make_provider(config.main);
    if (!config.templates_dir.empty()) {
        runtime.templates = TemplateSet::load(config.templates_dir);
    }
    if (need_knowledge) {
        runtime.knowledge =
            std::make_unique<KnowledgeBase>(KnowledgeBase::load(config.knowledge_base_path));
    }
    if (need_memory) {
        runtime.memory = std::make_unique<MemoryStore>(config.memory_path);
    }
    return runtime;
}

} // namespace assistrag
