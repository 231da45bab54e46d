#include "assistrag/case_study.hpp"
#include "assistrag/config.hpp"
#include "assistrag/corpus.hpp"
#include "assistrag/errors.hpp"
#include "assistrag/evaluation.hpp"
#include "assistrag/pipeline.hpp"
#include "assistrag/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace assistrag;

namespace {

std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out.empty() ? std::string("record") : out;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw StorageError("cannot open output file: " + path.string());
    }
    out << content;
    out.flush();
    if (!out) {
        throw StorageError("failed writing output file: " + path.string());
    }
}

void write_record(const fs::path& dir, const AnswerRecord& record) {
    fs::create_directories(dir);
    write_text_file(dir / (sanitize_filename(record.question_id) + ".json"),
                    record.to_json().dump(2) + "\n");
}

int cmd_ingest(const std::string& corpus_path, const std::string& out_path,
               std::size_t chunk_size) {
    std::vector<SourceDocument> documents = load_corpus(corpus_path);
    std::vector<Passage> passages;
    for (const auto& doc : documents) {
        std::vector<Passage> chunks = chunk_document(doc, chunk_size);
        passages.insert(passages.end(), chunks.begin(), chunks.end());
    }
    KnowledgeBase kb = KnowledgeBase::build(std::move(passages));
    kb.save(out_path);
    std::cout << "ingested " << documents.size() << " documents into " << kb.passages.size()
              << " passages -> " << out_path << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& question_text,
            const std::string& dataset_path, const std::string& method_name_arg,
            std::size_t limit, const std::string& out_dir) {
    const Method method = method_from_name(method_name_arg);
    const bool need_knowledge = method != Method::closebook;
    const bool need_memory = method == Method::assistrag;
    Runtime runtime = build_runtime(RunConfig::from_file(config_path), need_knowledge, need_memory);
    Services services = runtime.services();

    std::vector<Question> questions;
    if (!question_text.empty()) {
        questions.push_back({"q1", question_text, {}});
    } else {
        questions = load_questions(dataset_path);
        if (questions.size() > limit) questions.resize(limit);
    }

    std::size_t failures = 0;
    for (const auto& q : questions) {
        try {
            AnswerRecord record = run_method(q, method, services);
            write_record(out_dir, record);
            std::cout << q.question_id << ": " << extract_final_answer(record.answer_text) << "\n";
        } catch (const PipelineError& e) {
            ++failures;
            fs::create_directories(out_dir);
            json error_record = {{"question_id", q.question_id},
                                 {"error", e.what()},
                                 {"trace", e.trace().to_json()}};
            write_text_file(fs::path(out_dir) / (sanitize_filename(q.question_id) + ".error.json"),
                            error_record.dump(2) + "\n");
            std::cerr << q.question_id << ": failed: " << e.what() << "\n";
        }
    }
    std::cout << questions.size() - failures << "/" << questions.size() << " answered, records in "
              << out_dir << "\n";
    return failures == 0 ? 0 : 1;
}

int cmd_eval(const std::string& config_path, const std::string& dataset_path,
             const std::string& method_name_arg, std::size_t limit, const std::string& out_path,
             std::size_t jobs) {
    const Method method = method_from_name(method_name_arg);
    const bool need_knowledge = method != Method::closebook;
    const bool need_memory = method == Method::assistrag;
    Runtime runtime = build_runtime(RunConfig::from_file(config_path), need_knowledge, need_memory);
    Services services = runtime.services();

    EvalReport report = run_benchmark(dataset_path, method, services, limit, jobs);
    if (!out_path.empty()) {
        write_text_file(out_path, report.to_json().dump(2) + "\n");
    }
    std::cout << report.render_text();
    return 0;
}

int cmd_report(const std::string& in_path) {
    std::ifstream in(in_path);
    if (!in) {
        throw ConfigError("cannot open report file: " + in_path);
    }
    json parsed;
    try {
        in >> parsed;
    } catch (const json::exception& e) {
        throw ParseError("invalid report JSON: " + std::string(e.what()));
    }
    std::cout << EvalReport::from_json(parsed).render_text();
    return 0;
}

int cmd_gen_train(const std::string& qd_path, const std::string& ke_path,
                  const std::string& nt_path, std::uint64_t seed, const std::string& out_path) {
    TaskCatalogs catalogs;
    catalogs[TaskKind::QD] = load_training_samples(qd_path, TaskKind::QD);
    catalogs[TaskKind::KE] = load_training_samples(ke_path, TaskKind::KE);
    catalogs[TaskKind::NT] = load_training_samples(nt_path, TaskKind::NT);

    CurriculumBuild build = build_curriculum(catalogs, seed);
    export_training_file(build.stream, out_path);

    std::cout << "curriculum stream: " << build.stream.size() << " samples -> " << out_path << "\n";
    for (std::size_t i = 0; i < build.phases.size(); ++i) {
        const PhaseStats& phase = build.phases[i];
        std::cout << "phase " << (i + 1) << " (" << task_kind_name(phase.focus)
                  << " focus): " << phase.counts[0] << "/" << phase.counts[1] << "/"
                  << phase.counts[2] << " (QD/KE/NT)\n";
    }
    return 0;
}

int cmd_gen_dpo(const std::string& config_path, const std::string& dataset_path,
                const std::string& out_path) {
    Runtime runtime = build_runtime(RunConfig::from_file(config_path), true, false);
    Services services = runtime.services();
    std::vector<Question> questions = load_questions(dataset_path);

    PreferenceBuild build = build_preference_pairs(questions, services);
    export_preference_file(build.pairs, out_path);

    std::size_t ties = 0;
    for (const auto& skip : build.skipped) {
        if (skip.reason == "tied F1") ++ties;
    }
    std::cout << "preference pairs: " << build.pairs.size() << " -> " << out_path << "\n";
    std::cout << "dropped ties: " << ties << ", skipped with errors: "
              << build.skipped.size() - ties << "\n";
    for (const auto& skip : build.skipped) {
        if (skip.reason != "tied F1") {
            std::cerr << "skipped " << skip.question_id << ": " << skip.reason << "\n";
        }
    }
    return 0;
}

int cmd_case_study(const std::string& out_dir_arg) {
    const fs::path out_dir = out_dir_arg.empty()
                                 ? fs::temp_directory_path() / "assistrag-case-study"
                                 : fs::path(out_dir_arg);
    fs::create_directories(out_dir);
    const fs::path memory_path = out_dir / "memory.jsonl";
    std::error_code ignore;
    fs::remove(memory_path, ignore); // fresh memory each run

    CaseStudy cs = builtin_case_study();
    std::vector<Passage> passages;
    for (const auto& doc : cs.documents) {
        std::vector<Passage> chunks = chunk_document(doc);
        passages.insert(passages.end(), chunks.begin(), chunks.end());
    }
    KnowledgeBase kb = KnowledgeBase::build(std::move(passages));
    MemoryStore memory(memory_path.string());
    for (const auto& note : cs.memory_notes) memory.append(note);

    Services services;
    services.assistant = std::make_shared<MockProvider>(cs.assistant_script, ProviderTag::local);
    services.main = std::make_shared<MockProvider>(cs.main_script, ProviderTag::api);
    services.knowledge = &kb;
    services.memory = &memory;

    AnswerRecord record = answer_question(cs.question, services);
    write_record(out_dir, record);

    std::cout << "question: " << cs.question.text << "\n";
    for (const auto& stage : record.trace.stages) {
        std::cout << "stage: " << stage_kind_name(stage.kind) << "\n";
    }
    std::cout << "final answer: " << extract_final_answer(record.answer_text) << "\n";
    std::cout << "memory slots: " << memory.size() << " (grew by 1)\n";
    std::cout << "record written to " << out_dir << "\n";
    return 0;
}

int dispatch_error(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "assistrag: error [E_CONFIG] " << e.what() << "\n";
    } catch (const ParseError& e) {
        std::cerr << "assistrag: error [E_PARSE] " << e.what() << "\n";
    } catch (const IntegrityError& e) {
        std::cerr << "assistrag: error [E_INTEGRITY] " << e.what() << "\n";
    } catch (const TransportError& e) {
        std::cerr << "assistrag: error [E_TRANSPORT] " << e.what() << "\n";
    } catch (const StorageError& e) {
        std::cerr << "assistrag: error [E_STORAGE] " << e.what() << "\n";
    } catch (const ScriptError& e) {
        std::cerr << "assistrag: error [E_SCRIPT] " << e.what() << "\n";
    } catch (const NoteError& e) {
        std::cerr << "assistrag: error [E_NOTE] " << e.what() << "\n";
    } catch (const PipelineError& e) {
        std::cerr << "assistrag: error [E_PIPELINE] " << e.what() << "\n";
    } catch (const DomainError& e) {
        std::cerr << "assistrag: error [E_DOMAIN] " << e.what() << "\n";
    } catch (const Error& e) {
        std::cerr << "assistrag: error [E_RUNTIME] " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "assistrag: error [E_INTERNAL] " << e.what() << "\n";
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AssistRAG: assistant-managed retrieval-augmented generation engine"};
    app.require_subcommand(1);

    std::function<int()> action;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Chunk a corpus and build the knowledge base");
    std::string ingest_corpus;
    std::string ingest_out;
    std::size_t ingest_chunk_size = 100;
    ingest->add_option("--corpus", ingest_corpus, "Corpus JSONL of {doc_id, title, body}")
        ->required();
    ingest->add_option("--out", ingest_out, "Output knowledge base file")->required();
    ingest->add_option("--chunk-size", ingest_chunk_size, "Tokens per passage")
        ->check(CLI::PositiveNumber);
    ingest->callback([&]() {
        action = [&]() { return cmd_ingest(ingest_corpus, ingest_out, ingest_chunk_size); };
    });

    // run
    auto* run = app.add_subcommand("run", "Answer a question or a dataset");
    std::string run_config;
    std::string run_question;
    std::string run_dataset;
    std::string run_method = "assistrag";
    std::size_t run_limit = 500;
    std::string run_out = "runs";
    run->add_option("--config", run_config, "Run config JSON")->required();
    auto* run_q = run->add_option("--question", run_question, "Single question text");
    auto* run_d = run->add_option("--dataset", run_dataset, "Dataset JSONL");
    run_q->excludes(run_d);
    run->add_option("--method", run_method, "closebook | naive_rag | assistrag");
    run->add_option("--limit", run_limit, "Maximum questions from the dataset");
    run->add_option("--out", run_out, "Output directory for answer records");
    run->callback([&]() {
        if (run_question.empty() && run_dataset.empty()) {
            throw CLI::ValidationError("run", "one of --question or --dataset is required");
        }
        action = [&]() {
            return cmd_run(run_config, run_question, run_dataset, run_method, run_limit, run_out);
        };
    });

    // eval
    auto* eval = app.add_subcommand("eval", "Run a benchmark and score it");
    std::string eval_config;
    std::string eval_dataset;
    std::string eval_method = "assistrag";
    std::size_t eval_limit = 500;
    std::string eval_out;
    std::size_t eval_jobs = 1;
    eval->add_option("--config", eval_config, "Run config JSON")->required();
    eval->add_option("--dataset", eval_dataset, "Dataset JSONL")->required();
    eval->add_option("--method", eval_method, "closebook | naive_rag | assistrag");
    eval->add_option("--limit", eval_limit, "Question cap");
    eval->add_option("--out", eval_out, "Write the JSON report here");
    eval->add_option("--jobs", eval_jobs, "Parallel question runners")->check(CLI::PositiveNumber);
    eval->callback([&]() {
        action = [&]() {
            return cmd_eval(eval_config, eval_dataset, eval_method, eval_limit, eval_out, eval_jobs);
        };
    });

    // report
    auto* report = app.add_subcommand("report", "Render a saved eval report");
    std::string report_in;
    report->add_option("--in", report_in, "Report JSON produced by eval")->required();
    report->callback([&]() {
        action = [&]() { return cmd_report(report_in); };
    });

    // gen-train
    auto* gen_train = app.add_subcommand("gen-train", "Build the curriculum training stream");
    std::string gt_qd;
    std::string gt_ke;
    std::string gt_nt;
    std::uint64_t gt_seed = 0;
    std::string gt_out;
    gen_train->add_option("--qd", gt_qd, "Question-decomposition catalog JSONL")->required();
    gen_train->add_option("--ke", gt_ke, "Knowledge-extraction catalog JSONL")->required();
    gen_train->add_option("--nt", gt_nt, "Note-taking catalog JSONL")->required();
    gen_train->add_option("--seed", gt_seed, "Shuffle seed");
    gen_train->add_option("--out", gt_out, "Output JSONL")->required();
    gen_train->callback([&]() {
        action = [&]() { return cmd_gen_train(gt_qd, gt_ke, gt_nt, gt_seed, gt_out); };
    });

    // gen-dpo
    auto* gen_dpo = app.add_subcommand("gen-dpo", "Build DPO preference pairs");
    std::string gd_config;
    std::string gd_dataset;
    std::string gd_out;
    gen_dpo->add_option("--config", gd_config, "Run config JSON")->required();
    gen_dpo->add_option("--dataset", gd_dataset, "Questions JSONL with gold answers")->required();
    gen_dpo->add_option("--out", gd_out, "Output pairs JSONL")->required();
    gen_dpo->callback([&]() {
        action = [&]() { return cmd_gen_dpo(gd_config, gd_dataset, gd_out); };
    });

    // case-study
    auto* case_study = app.add_subcommand("case-study", "Run the built-in scripted smoke test");
    std::string cs_out;
    case_study->add_option("--out", cs_out, "Output directory (temp dir by default)");
    case_study->callback([&]() {
        action = [&]() { return cmd_case_study(cs_out); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) {
            std::cerr << "assistrag: error [E_USAGE] " << e.what() << "\n";
        }
        return app.exit(e);
    }
    return dispatch_error(action);
}
