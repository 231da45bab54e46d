#include "assistrag/case_study.hpp"
#include "assistrag/errors.hpp"
#include "assistrag/evaluation.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <memory>
#include <random>

using namespace assistrag;

TEST_CASE("normalize_answer removes articles, punctuation, and extra spaces") {
    CHECK(normalize_answer("The Nevada.") == "nevada");
    CHECK(normalize_answer("James  Worthy") == "james worthy");
    CHECK(normalize_answer("A an the") == "");
    CHECK(normalize_answer("  The   Catcher, in the Rye!  ") == "catcher in rye");
    CHECK(normalize_answer("") == "");
}

TEST_CASE("score_answer exact match") {
    MetricScores scores = score_answer("James Worthy", {"James Worthy"});
    CHECK(scores.em == 1);
    CHECK(scores.f1 == doctest::Approx(1.0));
    CHECK(scores.precision == doctest::Approx(1.0));
    CHECK(scores.recall == doctest::Approx(1.0));
}

TEST_CASE("score_answer disjoint tokens") {
    MetricScores scores = score_answer("xyz", {"abc"});
    CHECK(scores.em == 0);
    CHECK(scores.f1 == doctest::Approx(0.0));
}

TEST_CASE("score_answer partial overlap gives the derived 0.4 F1") {
    MetricScores scores = score_answer("attorney general of nevada", {"Nevada"});
    CHECK(scores.em == 0);
    CHECK(scores.precision == doctest::Approx(0.25));
    CHECK(scores.recall == doctest::Approx(1.0));
    CHECK(scores.f1 == doctest::Approx(0.4));
}

TEST_CASE("score_answer rejects an empty gold list") {
    CHECK_THROWS_AS(score_answer("anything", {}), DomainError);
}

TEST_CASE("metrics agree with the independent oracle on random cases") {
    std::mt19937_64 rng(53);
    const std::vector<std::string> vocabulary = {"red",  "green", "blue", "fox",
                                                 "worthy", "nevada", "log",  "a",
                                                 "the",  "answer"};
    auto random_phrase = [&]() {
        std::string out;
        const std::size_t n = rng() % 6;
        for (std::size_t i = 0; i < n; ++i) {
            if (!out.empty()) out += ' ';
            out += vocabulary[rng() % vocabulary.size()];
        }
        return out;
    };
    for (int round = 0; round < 300; ++round) {
        const std::string pred = random_phrase();
        std::vector<std::string> golds;
        const std::size_t n_golds = 1 + rng() % 3;
        for (std::size_t i = 0; i < n_golds; ++i) golds.push_back(random_phrase());

        MetricScores got = score_answer(pred, golds);
        test_support::OracleScores expected = test_support::oracle_score(pred, golds);
        CHECK(got.em == expected.em);
        CHECK(got.f1 == doctest::Approx(expected.f1).epsilon(1e-12));
        CHECK(got.precision == doctest::Approx(expected.precision).epsilon(1e-12));
        CHECK(got.recall == doctest::Approx(expected.recall).epsilon(1e-12));
    }
}

TEST_CASE("metric bounds and EM-implies-perfect-F1") {
    std::mt19937_64 rng(59);
    for (int round = 0; round < 100; ++round) {
        const std::string pred = test_support::synthetic_words(rng, rng() % 5, 10);
        const std::string gold = test_support::synthetic_words(rng, 1 + rng() % 4, 10);
        MetricScores scores = score_answer(pred, {gold});
        CHECK(scores.f1 >= 0.0);
        CHECK(scores.f1 <= 1.0);
        CHECK(scores.precision >= 0.0);
        CHECK(scores.precision <= 1.0);
        CHECK(scores.recall >= 0.0);
        CHECK(scores.recall <= 1.0);
        if (scores.em == 1) CHECK(scores.f1 == doctest::Approx(1.0));
    }
}

TEST_CASE("self-match is perfect for non-empty normalizations") {
    for (const std::string p : {"Nevada", "James Worthy", "the answer", "42 points"}) {
        if (normalize_answer(p).empty()) continue;
        MetricScores scores = score_answer(p, {p});
        CHECK(scores.em == 1);
        CHECK(scores.f1 == doctest::Approx(1.0));
        CHECK(scores.precision == doctest::Approx(1.0));
        CHECK(scores.recall == doctest::Approx(1.0));
    }
}

TEST_CASE("adding a gold answer never decreases any metric") {
    std::mt19937_64 rng(61);
    for (int round = 0; round < 100; ++round) {
        const std::string pred = test_support::synthetic_words(rng, 1 + rng() % 4, 8);
        std::vector<std::string> golds = {test_support::synthetic_words(rng, 1 + rng() % 4, 8)};
        MetricScores before = score_answer(pred, golds);
        golds.push_back(test_support::synthetic_words(rng, 1 + rng() % 4, 8));
        MetricScores after = score_answer(pred, golds);
        CHECK(after.em >= before.em);
        CHECK(after.f1 >= before.f1);
        CHECK(after.precision >= before.precision);
        CHECK(after.recall >= before.recall);
    }
}

namespace {

AnswerRecord record_with(const std::vector<std::string>& passage_texts,
                         const std::vector<std::string>& snippets, const std::string& answer) {
    AnswerRecord record;
    record.question_id = "q";
    record.answer_text = answer;
    record.method = Method::assistrag;
    record.trace.question_id = "q";
    record.trace.stages.push_back(
        {StageKind::knowledge_retrieval, {{"passage_texts", passage_texts}}});
    record.trace.stages.push_back({StageKind::extraction, {{"snippets", snippets}}});
    record.trace.answer_text = answer;
    return record;
}

} // namespace

TEST_CASE("classifier: gold absent from retrieval") {
    AnswerRecord record = record_with({"totally unrelated text"}, {}, "So the answer is Ohio.");
    CHECK(classify_error(record, {"Nevada"}) == ErrorCategory::insufficient_retrieval);
}

TEST_CASE("classifier: gold retrieved but not extracted") {
    AnswerRecord record = record_with({"She served as Attorney General of Nevada."},
                                      {"Joe Heck is a politician."}, "So the answer is Ohio.");
    CHECK(classify_error(record, {"Nevada"}) == ErrorCategory::extraction_error);
}

TEST_CASE("classifier: gold extracted but the answer is wrong") {
    AnswerRecord record = record_with({"She served as Attorney General of Nevada."},
                                      {"Catherine Cortez Masto served as Attorney General of "
                                       "Nevada."},
                                      "So the answer is Catherine Masto.");
    CHECK(classify_error(record, {"Nevada"}) == ErrorCategory::reasoning_mistake);
}

TEST_CASE("classifier: non-exact-match phrasing lands in other") {
    AnswerRecord record = record_with({"She served as Attorney General of Nevada."},
                                      {"the 32nd Attorney General of Nevada"},
                                      "So the answer is the state of Nevada.");
    CHECK(classify_error(record, {"Nevada"}) == ErrorCategory::other);
}

TEST_CASE("classifier is total over a constructed 40-case fixture") {
    std::vector<std::pair<AnswerRecord, ErrorCategory>> fixtures;
    for (int i = 0; i < 14; ++i) {
        fixtures.push_back({record_with({"nothing relevant " + std::to_string(i)}, {},
                                        "So the answer is wrong."),
                            ErrorCategory::insufficient_retrieval});
    }
    for (int i = 0; i < 10; ++i) {
        fixtures.push_back({record_with({"the gold target appears here"}, {"but not here"},
                                        "So the answer is wrong."),
                            ErrorCategory::extraction_error});
    }
    for (int i = 0; i < 9; ++i) {
        fixtures.push_back({record_with({"the gold target appears here"},
                                        {"the gold target appears here too"},
                                        "So the answer is wrong."),
                            ErrorCategory::reasoning_mistake});
    }
    for (int i = 0; i < 7; ++i) {
        fixtures.push_back({record_with({"the gold target appears here"},
                                        {"the gold target appears here too"},
                                        "So the answer is exactly the gold target, verbose."),
                            ErrorCategory::other});
    }

    std::array<std::size_t, 4> counts{};
    for (const auto& [record, expected] : fixtures) {
        ErrorCategory got = classify_error(record, {"gold target"});
        CHECK(got == expected);
        ++counts[static_cast<std::size_t>(got)];
    }
    CHECK(counts == std::array<std::size_t, 4>{14, 10, 9, 7});
}

namespace {

Services closebook_services(std::shared_ptr<MockProvider>& main_out) {
    MockScript script;
    script.entries = {{"alpha question", "So the answer is alpha."},
                      {"beta question", "So the answer is beta."},
                      {"gamma question", "So the answer is gamma."}};
    script.default_response = "So the answer is unknown.";
    main_out = std::make_shared<MockProvider>(script, ProviderTag::api);
    Services services;
    services.main = main_out;
    return services;
}

std::string three_question_dataset() {
    return R"({"question_id":"a","text":"alpha question","gold_answers":["alpha"]})"
           "\n"
           R"({"question_id":"b","text":"beta question","gold_answers":["beta"]})"
           "\n"
           R"({"question_id":"c","text":"gamma question","gold_answers":["gamma"]})"
           "\n";
}

} // namespace

TEST_CASE("run_benchmark scores a perfect scripted run at 100") {
    test_support::TempDir dir;
    const std::string path = dir.file("dataset.jsonl");
    test_support::write_file(path, three_question_dataset());

    std::shared_ptr<MockProvider> main;
    Services services = closebook_services(main);
    EvalReport report = run_benchmark(path, Method::closebook, services);

    CHECK(report.n_questions == 3);
    CHECK(report.em_percent == doctest::Approx(100.0));
    CHECK(report.f1_percent == doctest::Approx(100.0));
    CHECK(report.precision_percent == doctest::Approx(100.0));
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].question_id == "a");
    CHECK(report.rows[0].prediction == "alpha");
}

TEST_CASE("run_benchmark caps the question count") {
    test_support::TempDir dir;
    const std::string path = dir.file("big.jsonl");
    std::string content;
    for (int i = 0; i < 800; ++i) {
        content += R"({"question_id":"q)" + std::to_string(i) + R"(","text":"alpha question )" +
                   std::to_string(i) + R"(","gold_answers":["alpha"]})" + "\n";
    }
    test_support::write_file(path, content);

    std::shared_ptr<MockProvider> main;
    Services services = closebook_services(main);
    EvalReport report = run_benchmark(path, Method::closebook, services, 500);
    CHECK(report.n_questions == 500);
    CHECK(report.rows.size() == 500);
    CHECK(main->call_count() == 500);
}

TEST_CASE("run_benchmark token averages equal the mean of trace tallies") {
    test_support::TempDir dir;
    const std::string path = dir.file("dataset.jsonl");
    test_support::write_file(path, three_question_dataset());

    std::shared_ptr<MockProvider> main;
    Services services = closebook_services(main);
    EvalReport report = run_benchmark(path, Method::closebook, services);

    double expected = 0.0;
    for (const auto& row : report.rows) expected += static_cast<double>(row.api_prompt_tokens);
    expected /= static_cast<double>(report.rows.size());
    CHECK(report.api_tok_avg == doctest::Approx(expected));
    CHECK(report.sft_tok_avg == doctest::Approx(0.0));

    // Recompute from the prompts the mock saw.
    long long total = 0;
    for (const auto& prompt : main->prompts_seen()) {
        total += static_cast<long long>(count_tokens(prompt));
    }
    CHECK(report.api_tok_avg ==
          doctest::Approx(static_cast<double>(total) / static_cast<double>(report.rows.size())));
}

TEST_CASE("run_benchmark records per-question failures and continues") {
    test_support::TempDir dir;
    const std::string path = dir.file("dataset.jsonl");
    test_support::write_file(path, three_question_dataset());

    MockScript script;
    script.entries = {{"alpha question", "So the answer is alpha."},
                      {"gamma question", "So the answer is gamma."}};
    // beta question: no match, no default -> per-question failure.
    Services services;
    services.main = std::make_shared<MockProvider>(script, ProviderTag::api);

    EvalReport report = run_benchmark(path, Method::closebook, services);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].error_note.empty());
    CHECK(!report.rows[1].error_note.empty());
    CHECK(report.rows[1].scores.em == 0);
    CHECK(report.rows[2].error_note.empty());
    CHECK(report.em_percent == doctest::Approx(100.0 * 2.0 / 3.0));
}

TEST_CASE("run_benchmark with parallel jobs keeps rows in file order") {
    test_support::TempDir dir;
    const std::string path = dir.file("big.jsonl");
    std::string content;
    for (int i = 0; i < 60; ++i) {
        content += R"({"question_id":"q)" + std::to_string(i) + R"(","text":"alpha question )" +
                   std::to_string(i) + R"(","gold_answers":["alpha"]})" + "\n";
    }
    test_support::write_file(path, content);

    std::shared_ptr<MockProvider> main;
    Services services = closebook_services(main);
    EvalReport report = run_benchmark(path, Method::closebook, services, 500, 4);
    REQUIRE(report.rows.size() == 60);
    for (int i = 0; i < 60; ++i) {
        CHECK(report.rows[static_cast<std::size_t>(i)].question_id == "q" + std::to_string(i));
    }
    CHECK(report.em_percent == doctest::Approx(100.0));
}

TEST_CASE("parallel assistrag runs serialize memory appends") {
    test_support::TempDir dir;
    CaseStudy cs = builtin_case_study();

    std::vector<Passage> passages;
    for (const auto& doc : cs.documents) {
        std::vector<Passage> chunks = chunk_document(doc);
        passages.insert(passages.end(), chunks.begin(), chunks.end());
    }
    KnowledgeBase kb = KnowledgeBase::build(std::move(passages));
    MemoryStore memory(dir.file("memory.jsonl"));
    for (const auto& note : cs.memory_notes) memory.append(note);

    Services services;
    services.assistant = std::make_shared<MockProvider>(cs.assistant_script, ProviderTag::local);
    services.main = std::make_shared<MockProvider>(cs.main_script, ProviderTag::api);
    services.knowledge = &kb;
    services.memory = &memory;

    std::string dataset;
    for (int i = 0; i < 20; ++i) {
        dataset += nlohmann::json{{"question_id", "q" + std::to_string(i)},
                                  {"text", cs.question.text},
                                  {"gold_answers", cs.question.gold_answers}}
                       .dump() +
                   "\n";
    }
    const std::string path = dir.file("dataset.jsonl");
    test_support::write_file(path, dataset);

    EvalReport report = run_benchmark(path, Method::assistrag, services, 500, 4);
    CHECK(report.n_questions == 20);
    CHECK(report.em_percent == doctest::Approx(100.0));
    CHECK(memory.size() == 3 + 20); // seed notes plus one per answered question

    // Reload: every append must have reached the file intact.
    MemoryStore reloaded(dir.file("memory.jsonl"));
    CHECK(reloaded.size() == 23);
}

TEST_CASE("report JSON round-trips and renders one-decimal percentages") {
    test_support::TempDir dir;
    const std::string path = dir.file("dataset.jsonl");
    test_support::write_file(path, three_question_dataset());

    std::shared_ptr<MockProvider> main;
    Services services = closebook_services(main);
    EvalReport report = run_benchmark(path, Method::closebook, services);

    EvalReport reloaded = EvalReport::from_json(report.to_json());
    CHECK(reloaded.n_questions == report.n_questions);
    CHECK(reloaded.em_percent == doctest::Approx(report.em_percent));
    CHECK(reloaded.rows.size() == report.rows.size());

    const std::string text = report.render_text();
    CHECK(text.find("EM 100.0") != std::string::npos);
    CHECK(text.find("method: closebook") != std::string::npos);
}
