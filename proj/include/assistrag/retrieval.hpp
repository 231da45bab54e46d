#pragma once

#include "assistrag/corpus.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace assistrag {

struct MemorySlot; // memory_store.hpp

struct IndexEntry {
    std::string id;
    std::string text;
};

struct ScoredHit {
    std::string item_id;
    double score = 0.0;
};

enum class ScorerKind { lexical, embedding };

const char* scorer_kind_name(ScorerKind kind);
ScorerKind scorer_kind_from_name(const std::string& name);

// Hook for an external embedding model: fixed-dimension vectors, scored by
// cosine similarity.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) const = 0;
};

// Immutable search index over (item_id, text) entries. The lexical scorer is
// BM25 with k1 = 1.2, b = 0.75 over lowercased whitespace tokens; the
// embedding scorer ranks by cosine similarity of Embedder vectors.
class Index {
public:
    Index() = default;

    static Index build(std::vector<IndexEntry> entries);
    static Index build_embedding(std::vector<IndexEntry> entries,
                                 std::shared_ptr<const Embedder> embedder);

    // At most k hits with score > 0, ordered by score descending, ties by
    // ascending item_id.
    std::vector<ScoredHit> search(const std::string& query, std::size_t k) const;

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    ScorerKind scorer() const { return scorer_; }
    const std::vector<IndexEntry>& entries() const { return entries_; }

    // Versioned JSON serialization; round-trip stable byte-for-byte.
    std::string to_json_string() const;
    static Index from_json_string(const std::string& text,
                                  std::shared_ptr<const Embedder> embedder = nullptr);

private:
    std::vector<ScoredHit> search_lexical(const std::string& query, std::size_t k) const;
    std::vector<ScoredHit> search_embedding(const std::string& query, std::size_t k) const;
    void build_lexical_stats();

    ScorerKind scorer_ = ScorerKind::lexical;
    std::vector<IndexEntry> entries_;

    // BM25 statistics.
    std::vector<std::size_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;

    // Embedding data.
    std::shared_ptr<const Embedder> embedder_;
    std::vector<std::vector<double>> vectors_;
};

// Passage corpus plus its search index (the external knowledge base).
// Searchable text is "title. text".
struct KnowledgeBase {
    std::vector<Passage> passages;
    Index index;

    static KnowledgeBase build(std::vector<Passage> passages,
                               ScorerKind kind = ScorerKind::lexical,
                               std::shared_ptr<const Embedder> embedder = nullptr);

    const Passage* find(const std::string& passage_id) const;

    std::string to_json_string() const;
    static KnowledgeBase from_json_string(const std::string& text,
                                          std::shared_ptr<const Embedder> embedder = nullptr);
    static KnowledgeBase load(const std::string& path,
                              std::shared_ptr<const Embedder> embedder = nullptr);
    void save(const std::string& path) const;

private:
    std::unordered_map<std::string, std::size_t> by_id_;
};

struct RetrievedPassage {
    Passage passage;
    double score = 0.0;
};

// Knowledge retriever: top k_per_query hits for each sub-query, unioned with
// per-passage maximum score, deduplicated by passage_id, ordered by score
// descending (ties by ascending passage_id).
std::vector<RetrievedPassage> retrieve_knowledge(const KnowledgeBase& kb,
                                                 const std::vector<std::string>& sub_queries,
                                                 std::size_t k_per_query = 5);

// Memory retriever: top-k slots for the question over an index built on the
// slots' question texts (index ids must be slot ids).
std::vector<MemorySlot> retrieve_memory(const Index& index, const std::vector<MemorySlot>& slots,
                                        const std::string& question, std::size_t k = 5);

// Lowercased whitespace tokens, the token stream BM25 scores over.
std::vector<std::string> lexical_tokens(const std::string& text);

} // namespace assistrag
