#include "assistrag/training.hpp"

#include "assistrag/errors.hpp"
#include "assistrag/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace assistrag {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::array<TaskKind, 3> kAllKinds{TaskKind::QD, TaskKind::KE, TaskKind::NT};

std::size_t kind_pos(TaskKind kind) { return static_cast<std::size_t>(kind); }

// Platform-independent Fisher-Yates; std::shuffle's draw sequence is
// implementation-defined, which would break byte-identical streams.
void deterministic_shuffle(std::vector<TrainingSample>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

double stable_softplus(double x) {
    // log(1 + e^x) without overflow for large |x|.
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

} // namespace

const char* task_kind_name(TaskKind kind) {
    switch (kind) {
    case TaskKind::QD: return "QD";
    case TaskKind::KE: return "KE";
    case TaskKind::NT: return "NT";
    }
    return "QD";
}

TaskKind task_kind_from_name(const std::string& name) {
    if (name == "QD") return TaskKind::QD;
    if (name == "KE") return TaskKind::KE;
    if (name == "NT") return TaskKind::NT;
    throw ConfigError("unknown task kind: " + name);
}

CurriculumBuild build_curriculum(const TaskCatalogs& catalogs, const CurriculumSchedule& schedule) {
    if (std::abs(schedule.focus_share + 2.0 * schedule.off_share - 1.0) > 1e-9) {
        throw ConfigError("curriculum shares must sum to 1");
    }
    std::array<const std::vector<TrainingSample>*, 3> catalog_ptrs{};
    std::size_t total = 0;
    for (TaskKind kind : kAllKinds) {
        auto it = catalogs.find(kind);
        if (it == catalogs.end() || it->second.empty()) {
            throw ConfigError(std::string("empty training catalog for task ") + task_kind_name(kind));
        }
        catalog_ptrs[kind_pos(kind)] = &it->second;
        total += it->second.size();
    }

    std::array<std::size_t, 3> cursor{}; // consumed prefix of each catalog
    auto remaining = [&](TaskKind kind) {
        return catalog_ptrs[kind_pos(kind)]->size() - cursor[kind_pos(kind)];
    };
    auto draw = [&](TaskKind kind, std::size_t want, std::vector<TrainingSample>& into,
                    PhaseStats& stats) {
        const std::size_t take = std::min(want, remaining(kind));
        const auto& catalog = *catalog_ptrs[kind_pos(kind)];
        for (std::size_t i = 0; i < take; ++i) {
            into.push_back(catalog[cursor[kind_pos(kind)]++]);
        }
        stats.counts[kind_pos(kind)] += take;
    };

    std::mt19937_64 rng(schedule.seed);
    CurriculumBuild build;
    build.stream.reserve(total);

    for (std::size_t phase = 0; phase < schedule.phase_order.size(); ++phase) {
        const TaskKind focus = schedule.phase_order[phase];
        PhaseStats stats;
        stats.focus = focus;
        std::vector<TrainingSample> items;

        if (phase + 1 == schedule.phase_order.size()) {
            // Last phase absorbs everything left so coverage is exact.
            for (TaskKind kind : kAllKinds) draw(kind, remaining(kind), items, stats);
        } else {
            // Ideal phase size from the 60/20/20 mix: the linear system
            // "phase p consumes focus_share of itself from catalog p and
            // off_share from each other phase" solves to
            // 2.5*n_focus - 0.5*total at the default shares.
            const double n_focus = static_cast<double>(catalog_ptrs[kind_pos(focus)]->size());
            const double ideal =
                (n_focus - schedule.off_share * static_cast<double>(total)) /
                (schedule.focus_share - schedule.off_share);
            const std::size_t size =
                ideal <= 0.0 ? 0 : static_cast<std::size_t>(std::llround(ideal));
            // Off-task quotas floor; the remainder goes to the focus task.
            const std::size_t off_quota =
                static_cast<std::size_t>(std::floor(schedule.off_share * static_cast<double>(size)));
            std::size_t focus_quota = size;
            for (TaskKind kind : kAllKinds) {
                if (kind == focus) continue;
                focus_quota -= std::min(off_quota, focus_quota);
            }
            draw(focus, focus_quota, items, stats);
            for (TaskKind kind : kAllKinds) {
                if (kind != focus) draw(kind, off_quota, items, stats);
            }
        }

        deterministic_shuffle(items, rng);
        build.phases[phase] = stats;
        build.stream.insert(build.stream.end(), items.begin(), items.end());
    }
    return build;
}

CurriculumBuild build_curriculum(const TaskCatalogs& catalogs, std::uint64_t seed) {
    CurriculumSchedule schedule;
    schedule.seed = seed;
    return build_curriculum(catalogs, schedule);
}

AnnotationPrompts generate_annotation_prompts(const std::vector<AnnotationRecord>& records,
                                              TaskKind kind, const TemplateSet& templates) {
    AnnotationPrompts out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const AnnotationRecord& record = records[i];
        if (record.question.empty()) {
            out.failures.push_back({i, "missing question"});
            continue;
        }
        switch (kind) {
        case TaskKind::QD:
            out.prompts.push_back(templates.decompose.render({{"question", record.question}}));
            break;
        case TaskKind::KE:
            if (!record.search_results) {
                out.failures.push_back({i, "missing search results"});
                continue;
            }
            out.prompts.push_back(templates.extract.render(
                {{"question", record.question}, {"search_results", *record.search_results}}));
            break;
        case TaskKind::NT:
            if (!record.gold_answer) {
                out.failures.push_back({i, "missing gold answer"});
                continue;
            }
            if (!record.supporting_facts) {
                out.failures.push_back({i, "missing supporting facts"});
                continue;
            }
            out.prompts.push_back(templates.note.render({{"question", record.question},
                                                         {"answer", *record.gold_answer},
                                                         {"supporting_facts",
                                                          *record.supporting_facts}}));
            break;
        }
    }
    return out;
}

PreferenceBuild build_preference_pairs(const std::vector<Question>& questions, Services& services) {
    if (!services.assistant || !services.main || services.knowledge == nullptr) {
        throw ConfigError("preference pair construction requires providers and a knowledge base");
    }
    PreferenceBuild build;
    const ActionOptions& opts = services.config.action_options;

    for (const Question& q : questions) {
        if (q.gold_answers.empty()) {
            build.skipped.push_back({q.question_id, "no gold answers"});
            continue;
        }
        try {
            std::vector<RetrievedPassage> retrieved =
                retrieve_knowledge(*services.knowledge, {q.text}, services.config.naive_k);
            std::vector<Passage> passages;
            passages.reserve(retrieved.size());
            for (const auto& rp : retrieved) passages.push_back(rp.passage);

            // Candidate A: the raw retrieved passages, concatenated.
            std::string raw_reference;
            for (const auto& passage : passages) {
                if (!raw_reference.empty()) raw_reference += '\n';
                raw_reference +=
                    passage.title.empty() ? passage.text : passage.title + " -- " + passage.text;
            }
            // Candidate B: the assistant's extraction over the same passages.
            KnowledgeExtract extract =
                extract_knowledge(q, passages, *services.assistant, services.templates, opts);
            std::string extracted_reference;
            for (std::size_t i = 0; i < extract.snippets.size(); ++i) {
                if (i > 0) extracted_reference += '\n';
                extracted_reference += extract.snippets[i];
            }

            auto answer_with = [&](const std::string& reference) {
                KnowledgeExtract ref;
                ref.source_question_id = q.question_id;
                if (!reference.empty()) ref.snippets.push_back(reference);
                PromptRequest request = assemble_main_prompt(
                    q, std::nullopt, ref.snippets.empty() ? std::nullopt : std::optional(ref),
                    services.templates, opts);
                return services.main->complete(request).text;
            };
            const std::string answer_raw = answer_with(raw_reference);
            const std::string answer_extracted = answer_with(extracted_reference);
            const double f1_raw =
                score_answer(extract_final_answer(answer_raw), q.gold_answers).f1;
            const double f1_extracted =
                score_answer(extract_final_answer(answer_extracted), q.gold_answers).f1;

            if (f1_raw == f1_extracted) {
                build.skipped.push_back({q.question_id, "tied F1"});
                continue;
            }
            std::vector<Passage> rendered(
                passages.begin(),
                passages.begin() + static_cast<std::ptrdiff_t>(
                                       std::min(passages.size(), opts.extraction_passage_cap)));
            PreferencePair pair;
            pair.prompt = services.templates.extract.render(
                {{"question", q.text}, {"search_results", render_passage_list(rendered)}});
            if (f1_extracted > f1_raw) {
                pair.chosen = extracted_reference;
                pair.rejected = raw_reference;
                pair.f1_chosen = f1_extracted;
                pair.f1_rejected = f1_raw;
            } else {
                pair.chosen = raw_reference;
                pair.rejected = extracted_reference;
                pair.f1_chosen = f1_raw;
                pair.f1_rejected = f1_extracted;
            }
            build.pairs.push_back(std::move(pair));
        } catch (const Error& e) {
            build.skipped.push_back({q.question_id, e.what()});
        }
    }
    return build;
}

double dpo_loss(const DpoInputs& inputs) {
    if (!std::isfinite(inputs.beta) || inputs.beta <= 0.0) {
        throw DomainError("dpo_loss requires finite beta > 0");
    }
    for (double value : {inputs.logp_policy_chosen, inputs.logp_ref_chosen,
                         inputs.logp_policy_rejected, inputs.logp_ref_rejected}) {
        if (!std::isfinite(value)) {
            throw DomainError("dpo_loss requires finite log-probabilities");
        }
    }
    const double margin = (inputs.logp_policy_chosen - inputs.logp_ref_chosen) -
                          (inputs.logp_policy_rejected - inputs.logp_ref_rejected);
    return stable_softplus(-inputs.beta * margin);
}

void export_training_file(const std::vector<TrainingSample>& stream, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw StorageError("cannot open training file for writing: " + path);
    }
    for (const auto& sample : stream) {
        ordered_json line;
        line["task_kind"] = task_kind_name(sample.task_kind);
        line["input"] = sample.input_text;
        line["target"] = sample.target_text;
        out << line.dump() << '\n';
    }
    out.flush();
    if (!out) {
        throw StorageError("failed writing training file: " + path);
    }
}

void export_preference_file(const std::vector<PreferencePair>& pairs, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw StorageError("cannot open preference file for writing: " + path);
    }
    for (const auto& pair : pairs) {
        ordered_json line;
        line["prompt"] = pair.prompt;
        line["chosen"] = pair.chosen;
        line["rejected"] = pair.rejected;
        out << line.dump() << '\n';
    }
    out.flush();
    if (!out) {
        throw StorageError("failed writing preference file: " + path);
    }
}

std::vector<TrainingSample> load_training_samples(const std::string& path,
                                                  std::optional<TaskKind> default_kind) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open training sample file: " + path);
    }
    std::vector<TrainingSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json parsed = json::parse(line);
            TrainingSample sample;
            if (parsed.contains("task_kind")) {
                sample.task_kind = task_kind_from_name(parsed["task_kind"].get<std::string>());
            } else if (default_kind) {
                sample.task_kind = *default_kind;
            } else {
                throw ParseError("training sample line " + std::to_string(line_no) +
                                     ": missing task_kind",
                                 line_no);
            }
            sample.input_text = parsed.at("input").get<std::string>();
            sample.target_text = parsed.at("target").get<std::string>();
            if (sample.input_text.empty() || sample.target_text.empty()) {
                throw ParseError("training sample line " + std::to_string(line_no) +
                                     ": empty input or target",
                                 line_no);
            }
            samples.push_back(std::move(sample));
        } catch (const json::exception& e) {
            throw ParseError("training sample line " + std::to_string(line_no) + ": " + e.what(),
                             line_no);
        }
    }
    return samples;
}

} // namespace assistrag
