#pragma once

#include <map>
#include <string>

namespace assistrag {

// Plain-text prompt template with {name} placeholders.
struct PromptTemplate {
    std::string text;

    // Replaces every {key} occurrence for the provided keys; unknown
    // placeholders are left untouched.
    std::string render(const std::map<std::string, std::string>& values) const;
};

// The six prompt templates the engine renders. Files in a template directory
// override the built-in texts (decompose.txt, extract.txt, note.txt,
// plan_memory.txt, plan_knowledge.txt, main_answer.txt).
struct TemplateSet {
    PromptTemplate decompose;
    PromptTemplate extract;
    PromptTemplate note;
    PromptTemplate plan_memory;
    PromptTemplate plan_knowledge;
    PromptTemplate main_answer;

    static TemplateSet builtin();
    static TemplateSet load(const std::string& dir);
};

} // namespace assistrag
