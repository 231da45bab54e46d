#pragma once

#include "assistrag/pipeline.hpp"
#include "assistrag/question.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace assistrag {

enum class TaskKind { QD, KE, NT };

const char* task_kind_name(TaskKind kind);
TaskKind task_kind_from_name(const std::string& name);

struct TrainingSample {
    TaskKind task_kind = TaskKind::QD;
    std::string input_text;  // non-empty
    std::string target_text; // non-empty
};

// Three sequential phases, one per task in fixed order, each phase giving
// 60% of its items to the focus task and 20% to each of the other two.
struct CurriculumSchedule {
    std::array<TaskKind, 3> phase_order{TaskKind::QD, TaskKind::KE, TaskKind::NT};
    double focus_share = 0.6;
    double off_share = 0.2;
    std::uint64_t seed = 0;
};

struct PhaseStats {
    TaskKind focus = TaskKind::QD;
    std::array<std::size_t, 3> counts{}; // emitted samples per task kind
    std::size_t size() const { return counts[0] + counts[1] + counts[2]; }
};

struct CurriculumBuild {
    std::vector<TrainingSample> stream; // concatenation of the three phases
    std::array<PhaseStats, 3> phases;
};

using TaskCatalogs = std::map<TaskKind, std::vector<TrainingSample>>;

// Builds the phased training stream. Every input sample appears exactly once;
// phase sizes are chosen so the catalogs are exhausted, with the last phase
// absorbing whatever remains. Items are shuffled within each phase by a
// seed-deterministic generator. Empty catalogs are a configuration error.
CurriculumBuild build_curriculum(const TaskCatalogs& catalogs, const CurriculumSchedule& schedule);

CurriculumBuild build_curriculum(const TaskCatalogs& catalogs, std::uint64_t seed);

// --- annotation prompt generation -------------------------------------------

struct AnnotationRecord {
    std::string question;
    std::optional<std::string> gold_answer;
    std::optional<std::string> supporting_facts;
    std::optional<std::string> search_results; // pre-rendered passage listing
};

struct AnnotationFailure {
    std::size_t record_index = 0;
    std::string reason;
};

struct AnnotationPrompts {
    std::vector<std::string> prompts;       // one per successful record, input order
    std::vector<AnnotationFailure> failures; // records with missing fields
};

// Renders one annotation prompt per record with the task's template.
// Missing required fields produce a per-record failure; processing continues.
AnnotationPrompts generate_annotation_prompts(const std::vector<AnnotationRecord>& records,
                                              TaskKind kind,
                                              const TemplateSet& templates = TemplateSet::builtin());

// --- preference pairs --------------------------------------------------------

struct PreferencePair {
    std::string prompt; // the knowledge-extraction input for the question
    std::string chosen;
    std::string rejected;
    double f1_chosen = 0.0;
    double f1_rejected = 0.0;
};

struct PreferenceSkip {
    std::string question_id;
    std::string reason;
};

struct PreferenceBuild {
    std::vector<PreferencePair> pairs;
    std::vector<PreferenceSkip> skipped; // provider errors and F1 ties
};

// For each question, answers once with raw retrieved passages as reference
// and once with the assistant's extracted knowledge; the higher-F1 reference
// is chosen. Ties are dropped; provider errors skip the question.
PreferenceBuild build_preference_pairs(const std::vector<Question>& questions, Services& services);

// --- DPO loss ----------------------------------------------------------------

struct DpoInputs {
    double beta = 0.1; // > 0
    double logp_policy_chosen = 0.0;
    double logp_ref_chosen = 0.0;
    double logp_policy_rejected = 0.0;
    double logp_ref_rejected = 0.0;
};

// -log sigmoid(beta * ((logp_policy_chosen - logp_ref_chosen) -
// (logp_policy_rejected - logp_ref_rejected))), evaluated via the
// numerically stable softplus form. Throws DomainError on non-finite input
// or beta <= 0.
double dpo_loss(const DpoInputs& inputs);

// --- export ------------------------------------------------------------------

// JSONL {task_kind, input, target}, deterministic field order.
void export_training_file(const std::vector<TrainingSample>& stream, const std::string& path);

// JSONL {prompt, chosen, rejected}, deterministic field order.
void export_preference_file(const std::vector<PreferencePair>& pairs, const std::string& path);

std::vector<TrainingSample> load_training_samples(const std::string& path,
                                                  std::optional<TaskKind> default_kind = {});

} // namespace assistrag
