#include "assistrag/question.hpp"

#include "assistrag/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace assistrag {

using nlohmann::json;

std::vector<Question> load_questions(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open dataset file: " + path);
    }
    std::vector<Question> questions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json parsed = json::parse(line);
            Question q;
            q.question_id = parsed.at("question_id").get<std::string>();
            q.text = parsed.at("text").get<std::string>();
            if (parsed.contains("gold_answers")) {
                q.gold_answers = parsed["gold_answers"].get<std::vector<std::string>>();
            }
            if (q.text.empty()) {
                throw ParseError("dataset line " + std::to_string(line_no) + ": empty question text",
                                 line_no);
            }
            questions.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    return questions;
}

} // namespace assistrag
