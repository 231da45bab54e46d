#include "assistrag/templates.hpp"

#include "assistrag/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace assistrag {

namespace {

constexpr const char* kDecomposeTemplate =
    "Please generate a series of search queries that can be used to find information relevant to "
    "the given question.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Search queries:";

constexpr const char* kExtractTemplate =
    "Please extract relevant snippets from search results that would be helpful in answering this "
    "question.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Search results:\n"
    "\n"
    "{search_results}\n"
    "\n"
    "Snippets:";

constexpr const char* kNoteTemplate =
    "You are given 1) the question, 2) the answer, 3) the supporting facts where the answer can "
    "be derived. You are supposed to figure out the reasoning process towards the answer "
    "step-by-step without other content. Be concise and direct.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Answer: {answer}\n"
    "\n"
    "Supporting Facts: {supporting_facts}\n"
    "\n"
    "Reasoning:";

constexpr const char* kPlanMemoryTemplate =
    "You are given a question and notes from previously answered questions. Decide whether the "
    "notes are helpful for answering the current question. Answer \"Yes\" or \"No\" first, then "
    "explain briefly.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Memory notes:\n"
    "{memories}\n"
    "\n"
    "Are the memory notes helpful? Answer:";

constexpr const char* kPlanKnowledgeTemplate =
    "You are given a question and knowledge snippets extracted from search results. Decide "
    "whether the snippets are relevant to answering the question. Answer \"Yes\" or \"No\" "
    "first, then explain briefly.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Snippets:\n"
    "{snippets}\n"
    "\n"
    "Is the extracted knowledge relevant? Answer:";

constexpr const char* kMainAnswerTemplate =
    "{sections}Question: {question}\n"
    "\n"
    "Answer the question concisely. End your response with \"So the answer is ...\".\n"
    "\n"
    "Answer:";

std::string read_template_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open template file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    // Editors append a final newline; templates are defined without one.
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
        text.pop_back();
    }
    return text;
}

} // namespace

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out = text;
    for (const auto& [key, value] : values) {
        const std::string placeholder = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

TemplateSet TemplateSet::builtin() {
    TemplateSet set;
    set.decompose.text = kDecomposeTemplate;
    set.extract.text = kExtractTemplate;
    set.note.text = kNoteTemplate;
    set.plan_memory.text = kPlanMemoryTemplate;
    set.plan_knowledge.text = kPlanKnowledgeTemplate;
    set.main_answer.text = kMainAnswerTemplate;
    return set;
}

TemplateSet TemplateSet::load(const std::string& dir) {
    const std::filesystem::path base(dir);
    if (!std::filesystem::is_directory(base)) {
        throw ConfigError("template directory does not exist: " + dir);
    }
    TemplateSet set;
    set.decompose.text = read_template_file(base / "decompose.txt");
    set.extract.text = read_template_file(base / "extract.txt");
    set.note.text = read_template_file(base / "note.txt");
    set.plan_memory.text = read_template_file(base / "plan_memory.txt");
    set.plan_knowledge.text = read_template_file(base / "plan_knowledge.txt");
    set.main_answer.text = read_template_file(base / "main_answer.txt");
    return set;
}

} // namespace assistrag
