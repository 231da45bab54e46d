#include "assistrag/pipeline.hpp"

#include <algorithm>
#include <cctype>

namespace assistrag {

using nlohmann::json;

namespace {

constexpr const char* kMemorySectionHeader = "Related past solutions:";
constexpr const char* kKnowledgeSectionHeader = "Reference knowledge:";

// Forwards completions into the trace and keeps the per-tag token tallies.
class RecordingProvider final : public Provider {
public:
    RecordingProvider(Provider& inner, PipelineTrace& trace) : inner_(inner), trace_(trace) {}

    Completion complete(const PromptRequest& request) override {
        Completion completion = inner_.complete(request);
        if (completion.provider_tag == ProviderTag::api) {
            trace_.api_prompt_tokens += static_cast<long long>(completion.prompt_token_count);
        } else {
            trace_.local_prompt_tokens += static_cast<long long>(completion.prompt_token_count);
        }
        trace_.completions.push_back(completion);
        return completion;
    }

    ProviderTag tag() const override { return inner_.tag(); }

private:
    Provider& inner_;
    PipelineTrace& trace_;
};

std::string trim_copy(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

json completion_summary(const Completion& completion) {
    return {{"tag", provider_tag_name(completion.provider_tag)},
            {"prompt_tokens", completion.prompt_token_count},
            {"completion_tokens", completion.completion_token_count}};
}

} // namespace

const char* stage_kind_name(StageKind kind) {
    switch (kind) {
    case StageKind::decomposition: return "decomposition";
    case StageKind::memory_retrieval: return "memory_retrieval";
    case StageKind::knowledge_retrieval: return "knowledge_retrieval";
    case StageKind::extraction: return "extraction";
    case StageKind::gates: return "gates";
    case StageKind::final_answer: return "final_answer";
    case StageKind::note_taking: return "note_taking";
    }
    return "unknown";
}

const char* method_name(Method method) {
    switch (method) {
    case Method::closebook: return "closebook";
    case Method::naive_rag: return "naive_rag";
    case Method::assistrag: return "assistrag";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "closebook") return Method::closebook;
    if (name == "naive_rag" || name == "naive") return Method::naive_rag;
    if (name == "assistrag") return Method::assistrag;
    throw ConfigError("unknown method: " + name);
}

json PipelineTrace::to_json() const {
    json stages_json = json::array();
    for (const auto& stage : stages) {
        json entry = stage.detail;
        entry["stage"] = stage_kind_name(stage.kind);
        stages_json.push_back(std::move(entry));
    }
    json completions_json = json::array();
    for (const auto& completion : completions) {
        completions_json.push_back(completion_summary(completion));
    }
    return {{"question_id", question_id},
            {"stages", stages_json},
            {"completions", completions_json},
            {"final_prompt", final_prompt},
            {"answer", answer_text},
            {"api_prompt_tokens", api_prompt_tokens},
            {"local_prompt_tokens", local_prompt_tokens}};
}

json AnswerRecord::to_json() const {
    return {{"question_id", question_id},
            {"answer_text", answer_text},
            {"method", method_name(method)},
            {"trace", trace.to_json()}};
}

PromptRequest assemble_main_prompt(const Question& q,
                                   const std::optional<std::vector<MemorySlot>>& memories,
                                   const std::optional<KnowledgeExtract>& extract,
                                   const TemplateSet& templates, const ActionOptions& options) {
    std::string sections;
    if (memories && !memories->empty()) {
        sections += std::string(kMemorySectionHeader) + "\n" + render_memory_list(*memories) + "\n\n";
    }
    if (extract && !extract->snippets.empty()) {
        sections += std::string(kKnowledgeSectionHeader) + "\n" +
                    render_snippet_list(extract->snippets) + "\n\n";
    }
    PromptRequest request;
    request.messages.push_back(
        {Role::user, templates.main_answer.render({{"sections", sections}, {"question", q.text}})});
    request.temperature = options.temperature;
    request.max_output_tokens = options.max_output_tokens;
    request.provider_tag = ProviderTag::api;
    return request;
}

AnswerRecord answer_question(const Question& q, Services& services) {
    if (!services.assistant || !services.main) {
        throw ConfigError("pipeline requires assistant and main providers");
    }
    if (services.knowledge == nullptr) {
        throw ConfigError("pipeline requires a knowledge base");
    }
    if (services.memory == nullptr) {
        throw ConfigError("pipeline requires a memory store");
    }

    PipelineTrace trace;
    trace.question_id = q.question_id;
    RecordingProvider assistant(*services.assistant, trace);
    RecordingProvider main(*services.main, trace);
    const ActionOptions& opts = services.config.action_options;

    try {
        // Step 1: information retrieval and integration.
        std::vector<SubQuery> sub_queries = decompose_question(q, assistant, services.templates, opts);
        {
            json texts = json::array();
            for (const auto& sq : sub_queries) texts.push_back(sq.text);
            trace.stages.push_back({StageKind::decomposition, {{"sub_queries", std::move(texts)}}});
        }

        std::vector<MemorySlot> memories = services.memory->retrieve(q.text, services.config.k_memory);
        {
            json ids = json::array();
            for (const auto& slot : memories) ids.push_back(slot.slot_id);
            trace.stages.push_back({StageKind::memory_retrieval, {{"slot_ids", std::move(ids)}}});
        }

        std::vector<std::string> query_texts;
        query_texts.reserve(sub_queries.size());
        for (const auto& sq : sub_queries) query_texts.push_back(sq.text);
        std::vector<RetrievedPassage> retrieved =
            retrieve_knowledge(*services.knowledge, query_texts, services.config.k_knowledge_per_query);
        {
            json ids = json::array();
            json scores = json::array();
            json texts = json::array();
            for (const auto& rp : retrieved) {
                ids.push_back(rp.passage.passage_id);
                scores.push_back(rp.score);
                texts.push_back(rp.passage.title.empty()
                                    ? rp.passage.text
                                    : rp.passage.title + " -- " + rp.passage.text);
            }
            trace.stages.push_back({StageKind::knowledge_retrieval,
                                    {{"passage_ids", std::move(ids)},
                                     {"scores", std::move(scores)},
                                     {"passage_texts", std::move(texts)}}});
        }

        std::vector<Passage> passages;
        passages.reserve(retrieved.size());
        for (const auto& rp : retrieved) passages.push_back(rp.passage);
        KnowledgeExtract extract = extract_knowledge(q, passages, assistant, services.templates, opts);
        trace.stages.push_back({StageKind::extraction, {{"snippets", extract.snippets}}});

        // Step 2: decision making.
        PlanDecision memory_gate =
            assess_memory_usefulness(q, memories, assistant, services.templates, opts);
        PlanDecision knowledge_gate =
            assess_knowledge_relevance(q, extract, assistant, services.templates, opts);
        trace.stages.push_back(
            {StageKind::gates,
             {{"memory", {{"use_it", memory_gate.use_it}, {"raw", memory_gate.raw_response}}},
              {"knowledge",
               {{"use_it", knowledge_gate.use_it}, {"raw", knowledge_gate.raw_response}}}}});

        // Step 3: answer generation and memory updating.
        PromptRequest request = assemble_main_prompt(
            q, memory_gate.use_it ? std::optional(memories) : std::nullopt,
            knowledge_gate.use_it ? std::optional(extract) : std::nullopt, services.templates, opts);
        trace.final_prompt = request.messages.front().text;
        Completion answer = main.complete(request);
        trace.answer_text = answer.text;
        trace.stages.push_back({StageKind::final_answer, {{"answer", answer.text}}});

        std::string references;
        for (std::size_t i = 0; i < extract.snippets.size(); ++i) {
            if (i > 0) references += '\n';
            references += extract.snippets[i];
        }
        NoteRecord note = take_note(q, references, answer.text, assistant, services.templates, opts);
        MemorySlot slot = services.memory->append(note);
        trace.stages.push_back({StageKind::note_taking, {{"slot_id", slot.slot_id}}});

        AnswerRecord record;
        record.question_id = q.question_id;
        record.answer_text = answer.text;
        record.method = Method::assistrag;
        record.trace = std::move(trace);
        return record;
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(std::string("pipeline aborted: ") + e.what(), std::move(trace));
    }
}

AnswerRecord closebook_answer(const Question& q, Services& services) {
    if (!services.main) {
        throw ConfigError("closebook requires a main provider");
    }
    PipelineTrace trace;
    trace.question_id = q.question_id;
    RecordingProvider main(*services.main, trace);
    try {
        PromptRequest request = assemble_main_prompt(q, std::nullopt, std::nullopt,
                                                     services.templates,
                                                     services.config.action_options);
        trace.final_prompt = request.messages.front().text;
        Completion answer = main.complete(request);
        trace.answer_text = answer.text;
        trace.stages.push_back({StageKind::final_answer, {{"answer", answer.text}}});

        AnswerRecord record;
        record.question_id = q.question_id;
        record.answer_text = answer.text;
        record.method = Method::closebook;
        record.trace = std::move(trace);
        return record;
    } catch (const Error& e) {
        throw PipelineError(std::string("closebook aborted: ") + e.what(), std::move(trace));
    }
}

AnswerRecord naive_rag_answer(const Question& q, Services& services) {
    if (!services.main) {
        throw ConfigError("naive RAG requires a main provider");
    }
    if (services.knowledge == nullptr) {
        throw ConfigError("naive RAG requires a knowledge base");
    }
    PipelineTrace trace;
    trace.question_id = q.question_id;
    RecordingProvider main(*services.main, trace);
    try {
        std::vector<ScoredHit> hits = services.knowledge->index.search(q.text, services.config.naive_k);
        KnowledgeExtract references;
        references.source_question_id = q.question_id;
        json ids = json::array();
        json scores = json::array();
        json texts = json::array();
        for (const auto& hit : hits) {
            const Passage* passage = services.knowledge->find(hit.item_id);
            if (passage == nullptr) continue;
            references.snippets.push_back(passage->title.empty()
                                              ? passage->text
                                              : passage->title + " -- " + passage->text);
            ids.push_back(passage->passage_id);
            scores.push_back(hit.score);
            texts.push_back(references.snippets.back());
        }
        trace.stages.push_back({StageKind::knowledge_retrieval,
                                {{"passage_ids", std::move(ids)},
                                 {"scores", std::move(scores)},
                                 {"passage_texts", std::move(texts)}}});

        PromptRequest request = assemble_main_prompt(
            q, std::nullopt,
            references.snippets.empty() ? std::nullopt : std::optional(references),
            services.templates, services.config.action_options);
        trace.final_prompt = request.messages.front().text;
        Completion answer = main.complete(request);
        trace.answer_text = answer.text;
        trace.stages.push_back({StageKind::final_answer, {{"answer", answer.text}}});

        AnswerRecord record;
        record.question_id = q.question_id;
        record.answer_text = answer.text;
        record.method = Method::naive_rag;
        record.trace = std::move(trace);
        return record;
    } catch (const Error& e) {
        throw PipelineError(std::string("naive RAG aborted: ") + e.what(), std::move(trace));
    }
}

AnswerRecord run_method(const Question& q, Method method, Services& services) {
    switch (method) {
    case Method::closebook: return closebook_answer(q, services);
    case Method::naive_rag: return naive_rag_answer(q, services);
    case Method::assistrag: return answer_question(q, services);
    }
    throw ConfigError("unknown method");
}

std::string extract_final_answer(const std::string& answer_text) {
    static const std::string kPhrase = "the answer is";
    std::string lowered = answer_text;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::size_t pos = lowered.rfind(kPhrase);
    if (pos == std::string::npos) {
        return trim_copy(answer_text);
    }
    std::string segment = answer_text.substr(pos + kPhrase.size());
    std::size_t begin = 0;
    while (begin < segment.size() &&
           (std::isspace(static_cast<unsigned char>(segment[begin])) || segment[begin] == ':')) {
        ++begin;
    }
    std::size_t end = segment.size();
    auto is_terminal = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == '.' || c == '!' || c == '?' ||
               c == ',' || c == ';' || c == ':';
    };
    while (end > begin && is_terminal(segment[end - 1])) --end;
    return segment.substr(begin, end - begin);
}

} // namespace assistrag
