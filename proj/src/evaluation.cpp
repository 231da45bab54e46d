#include "assistrag/evaluation.hpp"

#include "assistrag/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace assistrag {

using nlohmann::json;

namespace {

bool is_ascii_punct(unsigned char c) { return std::ispunct(c) != 0; }

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream stream(s);
    std::string token;
    while (stream >> token) tokens.push_back(token);
    return tokens;
}

struct GoldScores {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

GoldScores overlap_scores(const std::vector<std::string>& pred_tokens,
                          const std::vector<std::string>& gold_tokens) {
    if (pred_tokens.empty() && gold_tokens.empty()) {
        return {1.0, 1.0, 1.0};
    }
    if (pred_tokens.empty() || gold_tokens.empty()) {
        return {0.0, 0.0, 0.0};
    }
    std::unordered_map<std::string, std::size_t> gold_counts;
    for (const auto& token : gold_tokens) ++gold_counts[token];
    std::size_t common = 0;
    for (const auto& token : pred_tokens) {
        auto it = gold_counts.find(token);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    GoldScores scores;
    scores.precision = static_cast<double>(common) / static_cast<double>(pred_tokens.size());
    scores.recall = static_cast<double>(common) / static_cast<double>(gold_tokens.size());
    scores.f1 = (scores.precision + scores.recall) == 0.0
                    ? 0.0
                    : 2.0 * scores.precision * scores.recall / (scores.precision + scores.recall);
    return scores;
}

const StageRecord* find_stage(const PipelineTrace& trace, StageKind kind) {
    for (const auto& stage : trace.stages) {
        if (stage.kind == kind) return &stage;
    }
    return nullptr;
}

std::string concat_strings(const json& array) {
    std::string out;
    if (!array.is_array()) return out;
    for (const auto& item : array) {
        if (!item.is_string()) continue;
        if (!out.empty()) out += ' ';
        out += item.get<std::string>();
    }
    return out;
}

bool any_gold_in(const std::vector<std::string>& normalized_golds, const std::string& normalized_text) {
    for (const auto& gold : normalized_golds) {
        if (!gold.empty() && normalized_text.find(gold) != std::string::npos) {
            return true;
        }
    }
    return false;
}

std::string percent_str(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.1f", value);
    return buffer;
}

} // namespace

std::string normalize_answer(const std::string& s) {
    std::string lowered;
    lowered.reserve(s.size());
    for (unsigned char c : s) {
        if (is_ascii_punct(c)) continue;
        lowered += static_cast<char>(std::tolower(c));
    }
    std::string out;
    for (const auto& token : split_ws(lowered)) {
        if (token == "a" || token == "an" || token == "the") continue;
        if (!out.empty()) out += ' ';
        out += token;
    }
    return out;
}

MetricScores score_answer(const std::string& prediction,
                          const std::vector<std::string>& gold_answers) {
    if (gold_answers.empty()) {
        throw DomainError("score_answer requires at least one gold answer");
    }
    const std::string norm_pred = normalize_answer(prediction);
    const std::vector<std::string> pred_tokens = split_ws(norm_pred);

    MetricScores best;
    for (const auto& gold : gold_answers) {
        const std::string norm_gold = normalize_answer(gold);
        if (norm_pred == norm_gold) best.em = 1;
        GoldScores scores = overlap_scores(pred_tokens, split_ws(norm_gold));
        best.f1 = std::max(best.f1, scores.f1);
        best.precision = std::max(best.precision, scores.precision);
        best.recall = std::max(best.recall, scores.recall);
    }
    return best;
}

const char* error_category_name(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::insufficient_retrieval: return "insufficient_retrieval";
    case ErrorCategory::extraction_error: return "extraction_error";
    case ErrorCategory::reasoning_mistake: return "reasoning_mistake";
    case ErrorCategory::other: return "other";
    }
    return "other";
}

ErrorCategory classify_error(const AnswerRecord& record,
                             const std::vector<std::string>& gold_answers) {
    std::vector<std::string> normalized_golds;
    normalized_golds.reserve(gold_answers.size());
    for (const auto& gold : gold_answers) normalized_golds.push_back(normalize_answer(gold));

    std::string passages;
    if (const StageRecord* stage = find_stage(record.trace, StageKind::knowledge_retrieval)) {
        passages = concat_strings(stage->detail.value("passage_texts", json::array()));
    }
    if (!any_gold_in(normalized_golds, normalize_answer(passages))) {
        return ErrorCategory::insufficient_retrieval;
    }

    std::string snippets;
    if (const StageRecord* stage = find_stage(record.trace, StageKind::extraction)) {
        snippets = concat_strings(stage->detail.value("snippets", json::array()));
    }
    if (!any_gold_in(normalized_golds, normalize_answer(snippets))) {
        return ErrorCategory::extraction_error;
    }

    const std::string prediction = extract_final_answer(record.answer_text);
    if (!any_gold_in(normalized_golds, normalize_answer(prediction))) {
        return ErrorCategory::reasoning_mistake;
    }
    return ErrorCategory::other;
}

json EvalReport::to_json() const {
    json rows_json = json::array();
    for (const auto& row : rows) {
        json entry = {{"question_id", row.question_id},
                      {"answer_text", row.answer_text},
                      {"prediction", row.prediction},
                      {"em", row.scores.em},
                      {"f1", row.scores.f1},
                      {"precision", row.scores.precision},
                      {"recall", row.scores.recall},
                      {"api_prompt_tokens", row.api_prompt_tokens},
                      {"local_prompt_tokens", row.local_prompt_tokens}};
        if (!row.error_note.empty()) entry["error_note"] = row.error_note;
        if (row.category) entry["error_category"] = error_category_name(*row.category);
        rows_json.push_back(std::move(entry));
    }
    json categories;
    categories[error_category_name(ErrorCategory::insufficient_retrieval)] = category_counts[0];
    categories[error_category_name(ErrorCategory::extraction_error)] = category_counts[1];
    categories[error_category_name(ErrorCategory::reasoning_mistake)] = category_counts[2];
    categories[error_category_name(ErrorCategory::other)] = category_counts[3];
    return {{"dataset", dataset_name},
            {"method", method_name(method)},
            {"n_questions", n_questions},
            {"em", em_percent},
            {"f1", f1_percent},
            {"precision", precision_percent},
            {"api_tok_avg", api_tok_avg},
            {"sft_tok_avg", sft_tok_avg},
            {"error_categories", categories},
            {"rows", rows_json}};
}

EvalReport EvalReport::from_json(const json& parsed) {
    EvalReport report;
    report.dataset_name = parsed.at("dataset").get<std::string>();
    report.method = method_from_name(parsed.at("method").get<std::string>());
    report.n_questions = parsed.at("n_questions").get<std::size_t>();
    report.em_percent = parsed.at("em").get<double>();
    report.f1_percent = parsed.at("f1").get<double>();
    report.precision_percent = parsed.at("precision").get<double>();
    report.api_tok_avg = parsed.at("api_tok_avg").get<double>();
    report.sft_tok_avg = parsed.at("sft_tok_avg").get<double>();
    if (parsed.contains("error_categories")) {
        const json& categories = parsed["error_categories"];
        report.category_counts[0] = categories.value("insufficient_retrieval", 0u);
        report.category_counts[1] = categories.value("extraction_error", 0u);
        report.category_counts[2] = categories.value("reasoning_mistake", 0u);
        report.category_counts[3] = categories.value("other", 0u);
    }
    for (const auto& entry : parsed.value("rows", json::array())) {
        QuestionRow row;
        row.question_id = entry.at("question_id").get<std::string>();
        row.answer_text = entry.value("answer_text", std::string());
        row.prediction = entry.value("prediction", std::string());
        row.scores.em = entry.value("em", 0);
        row.scores.f1 = entry.value("f1", 0.0);
        row.scores.precision = entry.value("precision", 0.0);
        row.scores.recall = entry.value("recall", 0.0);
        row.api_prompt_tokens = entry.value("api_prompt_tokens", 0LL);
        row.local_prompt_tokens = entry.value("local_prompt_tokens", 0LL);
        row.error_note = entry.value("error_note", std::string());
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string EvalReport::render_text() const {
    std::ostringstream out;
    out << "dataset: " << dataset_name << "  method: " << method_name(method)
        << "  n: " << n_questions << '\n';
    out << "EM " << percent_str(em_percent) << "  F1 " << percent_str(f1_percent) << "  Prec. "
        << percent_str(precision_percent) << '\n';
    out << "API tok. " << percent_str(api_tok_avg) << "  SFT tok. " << percent_str(sft_tok_avg)
        << '\n';
    const std::size_t total_categorized =
        category_counts[0] + category_counts[1] + category_counts[2] + category_counts[3];
    if (total_categorized > 0) {
        out << "error categories: insufficient_retrieval " << category_counts[0]
            << ", extraction_error " << category_counts[1] << ", reasoning_mistake "
            << category_counts[2] << ", other " << category_counts[3] << '\n';
    }
    return out.str();
}

EvalReport run_benchmark(const std::string& dataset_path, Method method, Services& services,
                         std::size_t limit, std::size_t jobs) {
    std::vector<Question> questions = load_questions(dataset_path);
    if (questions.size() > limit) {
        questions.resize(limit);
    }

    std::vector<QuestionRow> rows(questions.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= questions.size()) return;
            const Question& q = questions[i];
            QuestionRow row;
            row.question_id = q.question_id;
            try {
                AnswerRecord record = run_method(q, method, services);
                row.answer_text = record.answer_text;
                row.prediction = extract_final_answer(record.answer_text);
                row.api_prompt_tokens = record.trace.api_prompt_tokens;
                row.local_prompt_tokens = record.trace.local_prompt_tokens;
                if (q.gold_answers.empty()) {
                    row.error_note = "no gold answers";
                } else {
                    row.scores = score_answer(row.prediction, q.gold_answers);
                    if (row.scores.em == 0) {
                        row.category = classify_error(record, q.gold_answers);
                    }
                }
            } catch (const PipelineError& e) {
                row.error_note = e.what();
                row.api_prompt_tokens = e.trace().api_prompt_tokens;
                row.local_prompt_tokens = e.trace().local_prompt_tokens;
            } catch (const Error& e) {
                row.error_note = e.what();
            }
            rows[i] = std::move(row);
        }
    };

    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& thread : threads) thread.join();
    }

    EvalReport report;
    report.dataset_name = std::filesystem::path(dataset_path).filename().string();
    report.method = method;
    report.n_questions = rows.size();
    double em_sum = 0.0;
    double f1_sum = 0.0;
    double precision_sum = 0.0;
    double api_sum = 0.0;
    double local_sum = 0.0;
    for (const auto& row : rows) {
        em_sum += row.scores.em;
        f1_sum += row.scores.f1;
        precision_sum += row.scores.precision;
        api_sum += static_cast<double>(row.api_prompt_tokens);
        local_sum += static_cast<double>(row.local_prompt_tokens);
        if (row.category) {
            ++report.category_counts[static_cast<std::size_t>(*row.category)];
        }
    }
    const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
    report.em_percent = 100.0 * em_sum / n;
    report.f1_percent = 100.0 * f1_sum / n;
    report.precision_percent = 100.0 * precision_sum / n;
    report.api_tok_avg = api_sum / n;
    report.sft_tok_avg = local_sum / n;
    report.rows = std::move(rows);
    return report;
}

} // namespace assistrag
