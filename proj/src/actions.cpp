#include "assistrag/actions.hpp"

#include "assistrag/errors.hpp"

#include <cctype>
#include <sstream>

namespace assistrag {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// Strips one leading list marker: "-", "*", or digits followed by '.' / ')'.
std::string strip_list_marker(const std::string& line) {
    std::size_t i = 0;
    if (i < line.size() && (line[i] == '-' || line[i] == '*')) {
        ++i;
    } else {
        std::size_t digits = i;
        while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) {
            ++digits;
        }
        if (digits > i && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
            i = digits + 1;
        }
    }
    return line.substr(i);
}

std::vector<std::string> split_lines(const std::string& raw) {
    std::vector<std::string> lines;
    std::istringstream stream(raw);
    std::string line;
    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

Completion call(Provider& provider, const std::string& prompt, const ActionOptions& options) {
    PromptRequest request;
    request.messages.push_back({Role::user, prompt});
    request.temperature = options.temperature;
    request.max_output_tokens = options.max_output_tokens;
    request.provider_tag = provider.tag();
    return provider.complete(request);
}

} // namespace

std::vector<SubQuery> parse_sub_queries(const std::string& raw) {
    std::vector<SubQuery> queries;
    for (const auto& line : split_lines(raw)) {
        std::string cleaned = trim(strip_list_marker(trim(line)));
        if (!cleaned.empty()) {
            queries.push_back({std::move(cleaned)});
        }
    }
    return queries;
}

std::vector<std::string> parse_snippets(const std::string& raw) {
    std::vector<std::string> snippets;
    std::string current;
    auto flush = [&]() {
        std::string cleaned = trim(current);
        if (!cleaned.empty()) snippets.push_back(std::move(cleaned));
        current.clear();
    };
    for (const auto& line : split_lines(raw)) {
        std::string trimmed = trim(line);
        if (trimmed.empty()) {
            flush();
        } else if (trimmed.rfind("- ", 0) == 0) {
            flush();
            current = trim(trimmed.substr(2));
        } else {
            if (!current.empty()) current += ' ';
            current += trimmed;
        }
    }
    flush();
    return snippets;
}

bool parse_plan_decision(const std::string& raw) {
    std::size_t i = 0;
    while (i < raw.size() && !std::isalpha(static_cast<unsigned char>(raw[i]))) ++i;
    std::string word;
    while (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i]))) {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
        ++i;
    }
    return word == "yes";
}

std::string render_passage_list(const std::vector<Passage>& passages) {
    std::string out;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += "- [" + std::to_string(i + 1) + "] " + passages[i].title + " -- " + passages[i].text;
    }
    return out;
}

std::string render_memory_list(const std::vector<MemorySlot>& memories) {
    std::string out;
    for (std::size_t i = 0; i < memories.size(); ++i) {
        if (i > 0) out += '\n';
        out += std::to_string(i + 1) + ". question: " + memories[i].question_text +
               " answer: " + memories[i].reasoning_note;
    }
    return out;
}

std::string render_snippet_list(const std::vector<std::string>& snippets) {
    std::string out;
    for (std::size_t i = 0; i < snippets.size(); ++i) {
        if (i > 0) out += '\n';
        out += "- " + snippets[i];
    }
    return out;
}

std::vector<SubQuery> decompose_question(const Question& q, Provider& assistant,
                                         const TemplateSet& templates,
                                         const ActionOptions& options) {
    if (q.text.empty()) {
        throw DomainError("cannot decompose an empty question");
    }
    const std::string prompt = templates.decompose.render({{"question", q.text}});
    Completion completion = call(assistant, prompt, options);
    std::vector<SubQuery> queries = parse_sub_queries(completion.text);
    if (queries.empty()) {
        queries.push_back({q.text});
    }
    return queries;
}

KnowledgeExtract extract_knowledge(const Question& q, const std::vector<Passage>& passages,
                                   Provider& assistant, const TemplateSet& templates,
                                   const ActionOptions& options) {
    KnowledgeExtract extract;
    extract.source_question_id = q.question_id;
    if (passages.empty()) {
        return extract;
    }
    std::vector<Passage> rendered(passages.begin(),
                                  passages.begin() +
                                      static_cast<std::ptrdiff_t>(std::min(
                                          passages.size(), options.extraction_passage_cap)));
    const std::string prompt = templates.extract.render(
        {{"question", q.text}, {"search_results", render_passage_list(rendered)}});
    Completion completion = call(assistant, prompt, options);
    extract.snippets = parse_snippets(completion.text);
    return extract;
}

NoteRecord take_note(const Question& q, const std::string& references, const std::string& answer,
                     Provider& assistant, const TemplateSet& templates,
                     const ActionOptions& options) {
    if (answer.empty()) {
        throw DomainError("note taking requires a non-empty answer");
    }
    const std::string prompt = templates.note.render(
        {{"question", q.text}, {"answer", answer}, {"supporting_facts", references}});
    Completion completion = call(assistant, prompt, options);
    if (trim(completion.text).empty()) {
        throw NoteError("assistant produced an empty note for question " + q.question_id);
    }
    return {q.text, completion.text};
}

PlanDecision assess_memory_usefulness(const Question& q, const std::vector<MemorySlot>& memories,
                                      Provider& assistant, const TemplateSet& templates,
                                      const ActionOptions& options) {
    if (memories.empty()) {
        return {false, ""};
    }
    const std::string prompt = templates.plan_memory.render(
        {{"question", q.text}, {"memories", render_memory_list(memories)}});
    Completion completion = call(assistant, prompt, options);
    return {parse_plan_decision(completion.text), completion.text};
}

PlanDecision assess_knowledge_relevance(const Question& q, const KnowledgeExtract& extract,
                                        Provider& assistant, const TemplateSet& templates,
                                        const ActionOptions& options) {
    if (extract.snippets.empty()) {
        return {false, ""};
    }
    const std::string prompt = templates.plan_knowledge.render(
        {{"question", q.text}, {"snippets", render_snippet_list(extract.snippets)}});
    Completion completion = call(assistant, prompt, options);
    return {parse_plan_decision(completion.text), completion.text};
}

} // namespace assistrag
