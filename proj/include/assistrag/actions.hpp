#pragma once

#include "assistrag/corpus.hpp"
#include "assistrag/memory_store.hpp"
#include "assistrag/provider.hpp"
#include "assistrag/question.hpp"
#include "assistrag/templates.hpp"

#include <string>
#include <vector>

namespace assistrag {

// One retrieval query derived from a question: single line, trimmed, no list
// markers.
struct SubQuery {
    std::string text;
};

struct KnowledgeExtract {
    std::vector<std::string> snippets; // may be empty: nothing relevant found
    std::string source_question_id;
};

struct NoteRecord {
    std::string question_text;
    std::string reasoning_note; // non-empty
};

struct PlanDecision {
    bool use_it = false;
    std::string raw_response;
};

// --- output parsers (total: any input string yields a result) -------------

// One sub-query per non-empty line, leading list markers ("-", "*", "1.",
// "1)") stripped. Empty parse falls back to nothing; callers supply the
// original question.
std::vector<SubQuery> parse_sub_queries(const std::string& raw);

// Snippets split on blank lines or lines starting with "- "; continuation
// lines of one snippet are joined with single spaces.
std::vector<std::string> parse_snippets(const std::string& raw);

// True iff the first alphabetic word, lowercased, is "yes". Anything else —
// including ambiguous output — withholds.
bool parse_plan_decision(const std::string& raw);

// --- prompt renderers ------------------------------------------------------

// "- [i] title -- text" lines, 1-based.
std::string render_passage_list(const std::vector<Passage>& passages);

// "i. question: ... answer: ..." lines, 1-based.
std::string render_memory_list(const std::vector<MemorySlot>& memories);

// "- snippet" lines.
std::string render_snippet_list(const std::vector<std::string>& snippets);

// --- assistant actions ------------------------------------------------------

struct ActionOptions {
    int max_output_tokens = 512;
    double temperature = 0.0;
    std::size_t extraction_passage_cap = 20; // passages rendered into the extraction prompt
};

// Action: question decomposition. Falls back to the original question when
// parsing yields no sub-queries.
std::vector<SubQuery> decompose_question(const Question& q, Provider& assistant,
                                         const TemplateSet& templates,
                                         const ActionOptions& options = {});

// Action: knowledge extraction. Empty passage list short-circuits to an
// empty extract without calling the provider.
KnowledgeExtract extract_knowledge(const Question& q, const std::vector<Passage>& passages,
                                   Provider& assistant, const TemplateSet& templates,
                                   const ActionOptions& options = {});

// Action: note taking over (question, references, answer). Throws NoteError
// when the assistant returns an empty note.
NoteRecord take_note(const Question& q, const std::string& references, const std::string& answer,
                     Provider& assistant, const TemplateSet& templates,
                     const ActionOptions& options = {});

// Plan gate over retrieved memory. Empty memories decide "withhold" without
// a provider call.
PlanDecision assess_memory_usefulness(const Question& q, const std::vector<MemorySlot>& memories,
                                      Provider& assistant, const TemplateSet& templates,
                                      const ActionOptions& options = {});

// Plan gate over extracted knowledge. Empty snippets decide "withhold"
// without a provider call.
PlanDecision assess_knowledge_relevance(const Question& q, const KnowledgeExtract& extract,
                                        Provider& assistant, const TemplateSet& templates,
                                        const ActionOptions& options = {});

} // namespace assistrag
