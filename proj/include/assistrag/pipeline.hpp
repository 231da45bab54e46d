#pragma once

#include "assistrag/actions.hpp"
#include "assistrag/errors.hpp"
#include "assistrag/memory_store.hpp"
#include "assistrag/provider.hpp"
#include "assistrag/question.hpp"
#include "assistrag/retrieval.hpp"
#include "assistrag/templates.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace assistrag {

enum class StageKind {
    decomposition,
    memory_retrieval,
    knowledge_retrieval,
    extraction,
    gates,
    final_answer,
    note_taking,
};

const char* stage_kind_name(StageKind kind);

struct StageRecord {
    StageKind kind;
    nlohmann::json detail;
};

// Per-stage record of one inference run. Every provider call lands in
// `completions` and contributes its prompt tokens to exactly one tally,
// keyed by the completion's provider_tag.
struct PipelineTrace {
    std::string question_id;
    std::vector<StageRecord> stages;
    std::vector<Completion> completions;
    std::string final_prompt;
    std::string answer_text;
    long long api_prompt_tokens = 0;
    long long local_prompt_tokens = 0;

    nlohmann::json to_json() const;
};

enum class Method { closebook, naive_rag, assistrag };

const char* method_name(Method method);
Method method_from_name(const std::string& name);

struct AnswerRecord {
    std::string question_id;
    std::string answer_text; // the main LLM's raw final answer text
    Method method = Method::assistrag;
    PipelineTrace trace;

    nlohmann::json to_json() const;
};

struct PipelineConfig {
    std::size_t k_memory = 5;
    std::size_t k_knowledge_per_query = 5;
    std::size_t naive_k = 5;
    ActionOptions action_options;
};

// Everything a run needs. knowledge may be null for closebook; memory is
// required only by the assistant pipeline.
struct Services {
    ProviderHandle assistant;
    ProviderHandle main;
    const KnowledgeBase* knowledge = nullptr;
    MemoryStore* memory = nullptr;
    TemplateSet templates = TemplateSet::builtin();
    PipelineConfig config;
};

// Thrown when a provider or storage error aborts a run; carries the trace
// covering the stages completed before the failure.
class PipelineError : public Error {
public:
    PipelineError(const std::string& message, PipelineTrace trace)
        : Error(message), trace_(std::move(trace)) {}

    const PipelineTrace& trace() const { return trace_; }

private:
    PipelineTrace trace_;
};

// Deterministic main-LLM prompt: optional "Related past solutions" and
// "Reference knowledge" sections (in that order), then the question and the
// instruction to end with "So the answer is ...". Omitted sections leave no
// residue; with neither section this is the closebook prompt.
PromptRequest assemble_main_prompt(const Question& q,
                                   const std::optional<std::vector<MemorySlot>>& memories,
                                   const std::optional<KnowledgeExtract>& extract,
                                   const TemplateSet& templates, const ActionOptions& options = {});

// The assistant-managed pipeline: decompose, retrieve memory and knowledge,
// extract, gate, answer, then take a note and append it to memory.
AnswerRecord answer_question(const Question& q, Services& services);

AnswerRecord closebook_answer(const Question& q, Services& services);

AnswerRecord naive_rag_answer(const Question& q, Services& services);

AnswerRecord run_method(const Question& q, Method method, Services& services);

// Final-answer span: the text after the last "the answer is" (case
// insensitive), trailing punctuation stripped; the whole trimmed text when
// the phrase is absent.
std::string extract_final_answer(const std::string& answer_text);

} // namespace assistrag
