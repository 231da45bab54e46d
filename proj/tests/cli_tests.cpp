// Integration tests driving the compiled CLI binary (path supplied via the
// ASSISTRAG_CLI_BIN environment variable by CTest).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include <json.hpp>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

using nlohmann::json;

namespace {

std::string cli_bin() {
    const char* bin = std::getenv("ASSISTRAG_CLI_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "ASSISTRAG_CLI_BIN must point at the assistrag binary");
    return bin;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args, const test_support::TempDir& dir) {
    const std::string out_path = dir.file("cli_stdout.txt");
    const std::string err_path = dir.file("cli_stderr.txt");
    const std::string command =
        "\"" + cli_bin() + "\" " + args + " > \"" + out_path + "\" 2> \"" + err_path + "\"";
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = test_support::read_file(out_path);
    result.err = test_support::read_file(err_path);
    return result;
}

std::string write_corpus(const test_support::TempDir& dir) {
    std::mt19937_64 rng(77);
    json doc1 = {{"doc_id", "big"}, {"title", "Big Doc"},
                 {"body", test_support::synthetic_words(rng, 250)}};
    json doc2 = {{"doc_id", "small"}, {"title", "Small Doc"}, {"body", "just a few words here"}};
    const std::string path = dir.file("corpus.jsonl");
    test_support::write_file(path, doc1.dump() + "\n" + doc2.dump() + "\n");
    return path;
}

std::string mock_config(const test_support::TempDir& dir, const std::string& kb_path,
                        json assistant_script, json main_script) {
    json config = {
        {"providers",
         {{"assistant", {{"kind", "mock"}, {"tag", "local"}, {"script", assistant_script}}},
          {"main", {{"kind", "mock"}, {"tag", "api"}, {"script", main_script}}}}},
        {"paths", {{"knowledge_base", kb_path}, {"memory", dir.file("memory.jsonl")}}},
    };
    const std::string path = dir.file("config.json");
    test_support::write_file(path, config.dump(2));
    return path;
}

} // namespace

TEST_CASE("ingest reports the chunker's passage count") {
    test_support::TempDir dir;
    const std::string corpus = write_corpus(dir);
    CliResult result =
        run_cli("ingest --corpus \"" + corpus + "\" --out \"" + dir.file("kb.json") + "\"", dir);
    CHECK(result.exit_code == 0);
    // 250-token doc -> 3 passages, small doc -> 1.
    CHECK(result.out.find("ingested 2 documents into 4 passages") != std::string::npos);
}

TEST_CASE("ingest on a missing corpus fails with a parse error code") {
    test_support::TempDir dir;
    CliResult result =
        run_cli("ingest --corpus /nonexistent.jsonl --out \"" + dir.file("kb.json") + "\"", dir);
    CHECK(result.exit_code != 0);
    CHECK(result.err.find("[E_PARSE]") != std::string::npos);
}

TEST_CASE("ingest rejects duplicate doc ids with an integrity error code") {
    test_support::TempDir dir;
    const std::string path = dir.file("dup.jsonl");
    test_support::write_file(path,
                             R"({"doc_id":"x","body":"one"})"
                             "\n"
                             R"({"doc_id":"x","body":"two"})"
                             "\n");
    CliResult result =
        run_cli("ingest --corpus \"" + path + "\" --out \"" + dir.file("kb.json") + "\"", dir);
    CHECK(result.exit_code != 0);
    CHECK(result.err.find("[E_INTEGRITY]") != std::string::npos);
}

TEST_CASE("run answers a single closebook question and writes the record") {
    test_support::TempDir dir;
    const std::string corpus = write_corpus(dir);
    run_cli("ingest --corpus \"" + corpus + "\" --out \"" + dir.file("kb.json") + "\"", dir);
    const std::string config = mock_config(
        dir, dir.file("kb.json"), json::array(),
        json::array({{{"match", "Question:"}, {"response", "So the answer is log."}}}));

    CliResult result = run_cli("run --config \"" + config +
                                   "\" --question \"What rolls down stairs?\" --method closebook "
                                   "--out \"" +
                                   dir.file("runs") + "\"",
                               dir);
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("q1: log") != std::string::npos);

    json record = json::parse(test_support::read_file(dir.file("runs") + "/q1.json"));
    CHECK(record["method"] == "closebook");
    CHECK(record["trace"]["stages"].size() == 1);
}

TEST_CASE("run honors the dataset limit") {
    test_support::TempDir dir;
    const std::string corpus = write_corpus(dir);
    run_cli("ingest --corpus \"" + corpus + "\" --out \"" + dir.file("kb.json") + "\"", dir);
    const std::string config = mock_config(
        dir, dir.file("kb.json"), json::array(),
        json::array({{{"match", "Question:"}, {"response", "So the answer is fine."}}}));

    std::string dataset;
    for (int i = 0; i < 10; ++i) {
        dataset += json{{"question_id", "q" + std::to_string(i)},
                        {"text", "question number " + std::to_string(i)},
                        {"gold_answers", json::array({"fine"})}}
                       .dump() +
                   "\n";
    }
    test_support::write_file(dir.file("dataset.jsonl"), dataset);

    CliResult result = run_cli("run --config \"" + config + "\" --dataset \"" +
                                   dir.file("dataset.jsonl") +
                                   "\" --method closebook --limit 5 --out \"" + dir.file("runs") +
                                   "\"",
                               dir);
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("5/5 answered") != std::string::npos);
    int records = 0;
    for (int i = 0; i < 10; ++i) {
        if (std::filesystem::exists(dir.file("runs") + "/q" + std::to_string(i) + ".json")) {
            ++records;
        }
    }
    CHECK(records == 5);
}

TEST_CASE("bad config fails before any provider call") {
    test_support::TempDir dir;
    json config = {{"retrieval", {{"k_memory", 0}}}};
    test_support::write_file(dir.file("config.json"), config.dump());
    CliResult result = run_cli("run --config \"" + dir.file("config.json") +
                                   "\" --question \"hi\" --method closebook",
                               dir);
    CHECK(result.exit_code != 0);
    CHECK(result.err.find("[E_CONFIG]") != std::string::npos);
}

TEST_CASE("eval writes a report that report re-renders") {
    test_support::TempDir dir;
    const std::string corpus = write_corpus(dir);
    run_cli("ingest --corpus \"" + corpus + "\" --out \"" + dir.file("kb.json") + "\"", dir);
    const std::string config = mock_config(
        dir, dir.file("kb.json"), json::array(),
        json::array({{{"match", "alpha"}, {"response", "So the answer is alpha."}},
                     {{"match", "Question:"}, {"response", "So the answer is beta."}}}));

    test_support::write_file(
        dir.file("dataset.jsonl"),
        json{{"question_id", "a"}, {"text", "alpha?"}, {"gold_answers", json::array({"alpha"})}}
                .dump() +
            "\n" +
            json{{"question_id", "b"}, {"text", "beta?"}, {"gold_answers", json::array({"beta"})}}
                .dump() +
            "\n");

    CliResult eval = run_cli("eval --config \"" + config + "\" --dataset \"" +
                                 dir.file("dataset.jsonl") + "\" --method closebook --out \"" +
                                 dir.file("report.json") + "\"",
                             dir);
    CHECK(eval.exit_code == 0);
    CHECK(eval.out.find("EM 100.0") != std::string::npos);

    CliResult report = run_cli("report --in \"" + dir.file("report.json") + "\"", dir);
    CHECK(report.exit_code == 0);
    CHECK(report.out.find("EM 100.0") != std::string::npos);
    CHECK(report.out.find("method: closebook") != std::string::npos);
}

TEST_CASE("gen-train prints the phase mix and is seed-deterministic") {
    test_support::TempDir dir;
    auto catalog = [&](const std::string& name, int n) {
        std::string content;
        for (int i = 0; i < n; ++i) {
            content += json{{"input", name + "-in-" + std::to_string(i)},
                            {"target", name + "-out-" + std::to_string(i)}}
                           .dump() +
                       "\n";
        }
        test_support::write_file(dir.file(name + ".jsonl"), content);
        return dir.file(name + ".jsonl");
    };
    const std::string qd = catalog("qd", 6);
    const std::string ke = catalog("ke", 2);
    const std::string nt = catalog("nt", 2);

    CliResult first = run_cli("gen-train --qd \"" + qd + "\" --ke \"" + ke + "\" --nt \"" + nt +
                                  "\" --seed 7 --out \"" + dir.file("train_a.jsonl") + "\"",
                              dir);
    CHECK(first.exit_code == 0);
    CHECK(first.out.find("phase 1 (QD focus): 6/2/2") != std::string::npos);
    CHECK(first.out.find("curriculum stream: 10 samples") != std::string::npos);

    CliResult second = run_cli("gen-train --qd \"" + qd + "\" --ke \"" + ke + "\" --nt \"" + nt +
                                   "\" --seed 7 --out \"" + dir.file("train_b.jsonl") + "\"",
                               dir);
    CHECK(second.exit_code == 0);
    CHECK(test_support::read_file(dir.file("train_a.jsonl")) ==
          test_support::read_file(dir.file("train_b.jsonl")));
}

TEST_CASE("gen-train fails on an empty catalog") {
    test_support::TempDir dir;
    test_support::write_file(dir.file("qd.jsonl"),
                             json{{"input", "x"}, {"target", "y"}}.dump() + "\n");
    test_support::write_file(dir.file("empty.jsonl"), "");
    CliResult result =
        run_cli("gen-train --qd \"" + dir.file("qd.jsonl") + "\" --ke \"" + dir.file("empty.jsonl") +
                    "\" --nt \"" + dir.file("qd.jsonl") + "\" --out \"" + dir.file("out.jsonl") +
                    "\"",
                dir);
    CHECK(result.exit_code != 0);
    CHECK(result.err.find("[E_CONFIG]") != std::string::npos);
}

TEST_CASE("gen-dpo reports emitted pairs and dropped ties") {
    test_support::TempDir dir;

    // Corpus arranged so the main mock's answer depends on which reference
    // text lands in the prompt (see the preference-pair unit fixture).
    std::string corpus;
    for (int i = 1; i <= 4; ++i) {
        corpus += json{{"doc_id", "p" + std::to_string(i)},
                       {"title", "Topic " + std::to_string(i)},
                       {"body", "rawmark" + std::to_string(i) + " question" + std::to_string(i) +
                                    " background detail"}}
                      .dump() +
                  "\n";
    }
    test_support::write_file(dir.file("corpus.jsonl"), corpus);
    run_cli("ingest --corpus \"" + dir.file("corpus.jsonl") + "\" --out \"" + dir.file("kb.json") +
                "\"",
            dir);

    json assistant_script = json::array();
    for (int i = 1; i <= 4; ++i) {
        assistant_script.push_back({{"match", "question" + std::to_string(i)},
                                    {"response", "extractmark" + std::to_string(i) + " fact"}});
    }
    json main_script = json::array({
        {{"match", "extractmark1"}, {"response", "So the answer is gold one."}},
        {{"match", "rawmark1"}, {"response", "So the answer is garbage."}},
        {{"match", "extractmark2"}, {"response", "So the answer is wrong."}},
        {{"match", "rawmark2"}, {"response", "So the answer is gold two."}},
        {{"match", "question3"}, {"response", "So the answer is gold three."}},
        {{"match", "extractmark4"}, {"response", "So the answer is apples."}},
        {{"match", "rawmark4"}, {"response", "So the answer is oranges."}},
    });
    const std::string config =
        mock_config(dir, dir.file("kb.json"), assistant_script, main_script);

    std::string dataset;
    for (int i = 1; i <= 4; ++i) {
        dataset += json{{"question_id", "q" + std::to_string(i)},
                        {"text", "question" + std::to_string(i) + " topic?"},
                        {"gold_answers",
                         json::array({std::string("gold ") +
                                      (i == 1   ? "one"
                                       : i == 2 ? "two"
                                       : i == 3 ? "three"
                                                : "four")})}}
                       .dump() +
                   "\n";
    }
    test_support::write_file(dir.file("dataset.jsonl"), dataset);

    CliResult result = run_cli("gen-dpo --config \"" + config + "\" --dataset \"" +
                                   dir.file("dataset.jsonl") + "\" --out \"" +
                                   dir.file("pairs.jsonl") + "\"",
                               dir);
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("preference pairs: 2") != std::string::npos);
    CHECK(result.out.find("dropped ties: 2") != std::string::npos);

    const std::string pairs = test_support::read_file(dir.file("pairs.jsonl"));
    CHECK(std::count(pairs.begin(), pairs.end(), '\n') == 2);
    CHECK(pairs.find("extractmark1") != std::string::npos);
}

TEST_CASE("run --method assistrag drives the full pipeline from a config") {
    test_support::TempDir dir;
    std::string corpus =
        json{{"doc_id", "james_worthy"},
             {"title", "James Worthy"},
             {"body", "James Ager Worthy (born February 27, 1961) is an American former "
                      "professional basketball player."}}
            .dump() +
        "\n" +
        json{{"doc_id", "danny_green"},
             {"title", "Danny Green (basketball)"},
             {"body", "Danny Green (born June 22, 1987) is an American professional basketball "
                      "player."}}
            .dump() +
        "\n";
    test_support::write_file(dir.file("corpus.jsonl"), corpus);
    run_cli("ingest --corpus \"" + dir.file("corpus.jsonl") + "\" --out \"" + dir.file("kb.json") +
                "\"",
            dir);

    json assistant_script = json::array({
        {{"match", "Please generate a series of search queries"},
         {"response", "When was Danny Green born?\nWhen was James Worthy born?"}},
        {{"match", "Please extract relevant snippets"},
         {"response", "- Danny Green (born June 22, 1987)\n- James Worthy (born February 27, "
                      "1961)"}},
        {{"match", "Are the memory notes helpful?"}, {"response", "No memories yet."}},
        {{"match", "Is the extracted knowledge relevant?"}, {"response", "Yes, both dates."}},
        {{"match", "figure out the reasoning process"},
         {"response", "Worthy was born first, so he is older. The answer is James Worthy."}},
    });
    json main_script = json::array(
        {{{"match", "Answer the question concisely"},
          {"response", "James Worthy was born earlier. So the answer is James Worthy."}}});
    const std::string config = mock_config(dir, dir.file("kb.json"), assistant_script, main_script);

    CliResult result = run_cli("run --config \"" + config +
                                   "\" --question \"Who is older, Danny Green or James Worthy?\" "
                                   "--method assistrag --out \"" +
                                   dir.file("runs") + "\"",
                               dir);
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("q1: James Worthy") != std::string::npos);

    json record = json::parse(test_support::read_file(dir.file("runs") + "/q1.json"));
    CHECK(record["answer_text"].get<std::string>().find("James Worthy") != std::string::npos);
    CHECK(record["trace"]["stages"].size() == 7);
    // The assistant pipeline appended one note to the configured memory file.
    CHECK(std::filesystem::exists(dir.file("memory.jsonl")));
}

TEST_CASE("case-study runs the scripted pipeline end to end") {
    test_support::TempDir dir;
    CliResult result = run_cli("case-study --out \"" + dir.file("cs") + "\"", dir);
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("final answer: James Worthy") != std::string::npos);
    CHECK(result.out.find("stage: decomposition") != std::string::npos);
    CHECK(result.out.find("stage: note_taking") != std::string::npos);
    CHECK(result.out.find("memory slots: 4 (grew by 1)") != std::string::npos);

    json record = json::parse(test_support::read_file(dir.file("cs") + "/case-study-1.json"));
    CHECK(record["method"] == "assistrag");
    CHECK(record["answer_text"].get<std::string>().find("James Worthy") != std::string::npos);
}

TEST_CASE("unknown subcommand exits with a usage error") {
    test_support::TempDir dir;
    CliResult result = run_cli("frobnicate", dir);
    CHECK(result.exit_code != 0);
}
