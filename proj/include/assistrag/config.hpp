#pragma once

#include "assistrag/pipeline.hpp"
#include "assistrag/provider.hpp"
#include "assistrag/retrieval.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace assistrag {

struct ProviderConfig {
    std::string kind = "mock"; // "mock" | "http"
    ProviderTag tag = ProviderTag::api;
    std::string base_url;
    std::string model;
    int timeout_seconds = 60;
    MockScript script; // mock backend only
};

// Run configuration loaded from a single JSON file; flags may override
// individual values. Validation happens before any provider call.
struct RunConfig {
    ProviderConfig assistant;
    ProviderConfig main;

    std::size_t k_memory = 5;
    std::size_t k_knowledge = 5;
    std::size_t naive_k = 5;
    std::size_t extraction_passage_cap = 20;
    int max_output_tokens = 512;
    double temperature = 0.0;

    std::string templates_dir;       // empty: built-in templates
    std::string knowledge_base_path; // serialized by `ingest`
    std::string memory_path;         // created on first append if absent
    std::uint64_t seed = 0;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json(const nlohmann::json& parsed);

    // Checks ranges and that every referenced path resolves. Requirements
    // depend on what the command is about to do.
    void validate(bool need_knowledge, bool need_memory) const;
};

ProviderHandle make_provider(const ProviderConfig& provider);

// Owns every service object a run needs and hands out a wired Services view.
struct Runtime {
    RunConfig config;
    ProviderHandle assistant;
    ProviderHandle main;
    std::unique_ptr<KnowledgeBase> knowledge;
    std::unique_ptr<MemoryStore> memory;
    TemplateSet templates = TemplateSet::builtin();

    Services services();
};

Runtime build_runtime(const RunConfig& config, bool need_knowledge, bool need_memory);

} // namespace assistrag
