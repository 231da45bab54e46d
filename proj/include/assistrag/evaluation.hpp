#pragma once

#include "assistrag/pipeline.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace assistrag {

struct MetricScores {
    int em = 0; // 0 or 1
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// Lowercases, removes punctuation, drops whole-token articles (a, an, the),
// and collapses whitespace.
std::string normalize_answer(const std::string& s);

// Token-level multiset-overlap metrics over normalized text. EM is 1 iff the
// normalized prediction equals any normalized gold; F1/precision/recall each
// take the maximum over gold answers. Throws DomainError on an empty gold
// list.
MetricScores score_answer(const std::string& prediction,
                          const std::vector<std::string>& gold_answers);

enum class ErrorCategory { insufficient_retrieval, extraction_error, reasoning_mistake, other };

const char* error_category_name(ErrorCategory category);

// Classifies a failed (em = 0) record by where the gold answer got lost:
// never retrieved, retrieved but not extracted, extracted but not answered,
// or answered in a non-exact-match phrasing.
ErrorCategory classify_error(const AnswerRecord& record,
                             const std::vector<std::string>& gold_answers);

struct QuestionRow {
    std::string question_id;
    std::string answer_text;
    std::string prediction; // extract_final_answer(answer_text)
    MetricScores scores;
    long long api_prompt_tokens = 0;
    long long local_prompt_tokens = 0;
    std::string error_note; // non-empty when the run aborted
    std::optional<ErrorCategory> category;
};

struct EvalReport {
    std::string dataset_name;
    Method method = Method::assistrag;
    std::size_t n_questions = 0;
    double em_percent = 0.0;
    double f1_percent = 0.0;
    double precision_percent = 0.0;
    double api_tok_avg = 0.0;
    double sft_tok_avg = 0.0;
    std::array<std::size_t, 4> category_counts{}; // indexed by ErrorCategory
    std::vector<QuestionRow> rows;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& parsed);
    std::string render_text() const; // percentages to one decimal place
};

// Runs the chosen method over min(limit, dataset size) questions in file
// order. Per-question failures score 0 with an error note; the run continues.
EvalReport run_benchmark(const std::string& dataset_path, Method method, Services& services,
                         std::size_t limit = 500, std::size_t jobs = 1);

} // namespace assistrag
