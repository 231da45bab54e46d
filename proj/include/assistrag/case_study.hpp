#pragma once

#include "assistrag/actions.hpp"
#include "assistrag/corpus.hpp"
#include "assistrag/provider.hpp"
#include "assistrag/question.hpp"

#include <vector>

namespace assistrag {

// Self-contained smoke-test fixture: a small corpus, seed memory notes, and
// scripted assistant/main responses for one comparative question, exercising
// every pipeline stage deterministically.
struct CaseStudy {
    std::vector<SourceDocument> documents;
    std::vector<NoteRecord> memory_notes;
    MockScript assistant_script;
    MockScript main_script;
    Question question;
};

CaseStudy builtin_case_study();

} // namespace assistrag
