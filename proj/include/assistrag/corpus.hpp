#pragma once

#include "assistrag/tokenizer.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace assistrag {

struct SourceDocument {
    std::string doc_id;
    std::string title;
    std::string body;
};

// A chunk of a source document, at most chunk_size tokens long.
struct Passage {
    std::string passage_id; // "<doc_id>#<ordinal>", ordinals dense from 0
    std::string doc_id;
    std::string title;
    std::string text;
    std::size_t token_count = 0;
};

// Greedy split on token boundaries: runs of chunk_size tokens, last passage
// possibly shorter. Joining the passage texts with single spaces reproduces
// the whitespace-normalized body. Empty body yields no passages.
std::vector<Passage> chunk_document(const SourceDocument& doc, std::size_t chunk_size = 100,
                                    const Tokenizer& tokenizer = default_tokenizer());

// Reads a JSONL corpus of {doc_id, title, body} objects, one per line.
// Throws ParseError (with the 1-based line number) on malformed lines and
// IntegrityError on duplicate doc_ids.
std::vector<SourceDocument> load_corpus(const std::string& path);

} // namespace assistrag
