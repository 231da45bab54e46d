#include "assistrag/corpus.hpp"

#include "assistrag/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <unordered_set>

namespace assistrag {

using nlohmann::json;

std::vector<Passage> chunk_document(const SourceDocument& doc, std::size_t chunk_size,
                                    const Tokenizer& tokenizer) {
    if (chunk_size < 1) {
        throw DomainError("chunk_size must be at least 1");
    }
    std::vector<std::string> tokens = tokenizer.tokenize(doc.body);
    std::vector<Passage> passages;
    for (std::size_t start = 0, ordinal = 0; start < tokens.size(); start += chunk_size, ++ordinal) {
        std::size_t end = std::min(start + chunk_size, tokens.size());
        std::string text;
        for (std::size_t i = start; i < end; ++i) {
            if (i > start) text += ' ';
            text += tokens[i];
        }
        Passage passage;
        passage.passage_id = doc.doc_id + "#" + std::to_string(ordinal);
        passage.doc_id = doc.doc_id;
        passage.title = doc.title;
        passage.text = std::move(text);
        passage.token_count = end - start;
        passages.push_back(std::move(passage));
    }
    return passages;
}

std::vector<SourceDocument> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open corpus file: " + path);
    }
    std::vector<SourceDocument> docs;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json parsed;
        try {
            parsed = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("corpus line " + std::to_string(line_no) + ": invalid JSON: " + e.what(),
                             line_no);
        }
        if (!parsed.is_object() || !parsed.contains("doc_id") || !parsed["doc_id"].is_string()) {
            throw ParseError("corpus line " + std::to_string(line_no) + ": missing \"doc_id\" field",
                             line_no);
        }
        if (!parsed.contains("body") || !parsed["body"].is_string()) {
            throw ParseError("corpus line " + std::to_string(line_no) + ": missing \"body\" field",
                             line_no);
        }
        SourceDocument doc;
        doc.doc_id = parsed["doc_id"].get<std::string>();
        doc.title = parsed.value("title", std::string());
        doc.body = parsed["body"].get<std::string>();
        if (!seen_ids.insert(doc.doc_id).second) {
            throw IntegrityError("duplicate doc_id \"" + doc.doc_id + "\" at corpus line " +
                                 std::to_string(line_no));
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

} // namespace assistrag
