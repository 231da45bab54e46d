#pragma once

#include <string>
#include <vector>

namespace assistrag {

// A QA item. gold_answers may be empty at inference time.
struct Question {
    std::string question_id;
    std::string text;
    std::vector<std::string> gold_answers;
};

// Reads a JSONL dataset of {question_id, text, gold_answers} objects.
std::vector<Question> load_questions(const std::string& path);

} // namespace assistrag
