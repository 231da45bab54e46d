#include "assistrag/retrieval.hpp"

#include "assistrag/errors.hpp"
#include "assistrag/memory_store.hpp"
#include "assistrag/tokenizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace assistrag {

using nlohmann::json;

namespace {

constexpr double kBm25K1 = 1.2;
constexpr double kBm25B = 0.75;
constexpr int kIndexFormatVersion = 1;
constexpr int kKnowledgeBaseFormatVersion = 1;

void sort_hits(std::vector<ScoredHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
}

std::string searchable_text(const Passage& passage) {
    if (passage.title.empty()) return passage.text;
    return passage.title + ". " + passage.text;
}

} // namespace

const char* scorer_kind_name(ScorerKind kind) {
    return kind == ScorerKind::lexical ? "lexical" : "embedding";
}

ScorerKind scorer_kind_from_name(const std::string& name) {
    if (name == "lexical") return ScorerKind::lexical;
    if (name == "embedding") return ScorerKind::embedding;
    throw ConfigError("unknown scorer kind: " + name);
}

std::vector<std::string> lexical_tokens(const std::string& text) {
    std::vector<std::string> tokens = default_tokenizer().tokenize(text);
    for (auto& token : tokens) {
        for (char& c : token) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return tokens;
}

void Index::build_lexical_stats() {
    doc_lengths_.resize(entries_.size());
    std::size_t total_tokens = 0;
    for (std::size_t doc = 0; doc < entries_.size(); ++doc) {
        std::vector<std::string> tokens = lexical_tokens(entries_[doc].text);
        doc_lengths_[doc] = tokens.size();
        total_tokens += tokens.size();
        std::unordered_map<std::string, std::uint32_t> counts;
        for (const auto& token : tokens) ++counts[token];
        for (const auto& [term, tf] : counts) {
            postings_[term].emplace_back(static_cast<std::uint32_t>(doc), tf);
        }
    }
    avg_doc_length_ = entries_.empty() ? 0.0
                                       : static_cast<double>(total_tokens) /
                                             static_cast<double>(entries_.size());
    // Postings in ascending doc order so accumulation order is well-defined.
    for (auto& [term, posting] : postings_) {
        std::sort(posting.begin(), posting.end());
    }
}

Index Index::build(std::vector<IndexEntry> entries) {
    std::unordered_set<std::string> ids;
    for (const auto& entry : entries) {
        if (!ids.insert(entry.id).second) {
            throw IntegrityError("duplicate item_id \"" + entry.id + "\" in index build");
        }
    }
    Index index;
    index.scorer_ = ScorerKind::lexical;
    index.entries_ = std::move(entries);
    index.build_lexical_stats();
    return index;
}

Index Index::build_embedding(std::vector<IndexEntry> entries,
                             std::shared_ptr<const Embedder> embedder) {
    if (!embedder) {
        throw ConfigError("embedding index requires an embedder");
    }
    std::unordered_set<std::string> ids;
    for (const auto& entry : entries) {
        if (!ids.insert(entry.id).second) {
            throw IntegrityError("duplicate item_id \"" + entry.id + "\" in index build");
        }
    }
    Index index;
    index.scorer_ = ScorerKind::embedding;
    index.entries_ = std::move(entries);
    index.embedder_ = std::move(embedder);
    index.vectors_.reserve(index.entries_.size());
    for (const auto& entry : index.entries_) {
        index.vectors_.push_back(index.embedder_->embed(entry.text));
    }
    return index;
}

std::vector<ScoredHit> Index::search(const std::string& query, std::size_t k) const {
    if (k < 1) {
        throw DomainError("search k must be at least 1");
    }
    return scorer_ == ScorerKind::lexical ? search_lexical(query, k) : search_embedding(query, k);
}

std::vector<ScoredHit> Index::search_lexical(const std::string& query, std::size_t k) const {
    std::vector<double> scores(entries_.size(), 0.0);
    const double n_docs = static_cast<double>(entries_.size());
    // Query tokens are scored as a sequence (duplicates contribute twice).
    for (const auto& term : lexical_tokens(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& [doc, tf_raw] : it->second) {
            const double tf = static_cast<double>(tf_raw);
            const double norm = static_cast<double>(doc_lengths_[doc]) / avg_doc_length_;
            scores[doc] += idf * (tf * (kBm25K1 + 1.0)) /
                           (tf + kBm25K1 * (1.0 - kBm25B + kBm25B * norm));
        }
    }
    std::vector<ScoredHit> hits;
    for (std::size_t doc = 0; doc < entries_.size(); ++doc) {
        if (scores[doc] > 0.0) {
            hits.push_back({entries_[doc].id, scores[doc]});
        }
    }
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<ScoredHit> Index::search_embedding(const std::string& query, std::size_t k) const {
    if (!embedder_) {
        throw ConfigError("embedding index has no embedder attached for query encoding");
    }
    const std::vector<double> q = embedder_->embed(query);
    double q_norm = 0.0;
    for (double v : q) q_norm += v * v;
    q_norm = std::sqrt(q_norm);

    std::vector<ScoredHit> hits;
    for (std::size_t doc = 0; doc < entries_.size(); ++doc) {
        const auto& d = vectors_[doc];
        if (d.size() != q.size() || q_norm == 0.0) continue;
        double dot = 0.0;
        double d_norm = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            dot += q[i] * d[i];
            d_norm += d[i] * d[i];
        }
        if (d_norm == 0.0) continue;
        const double cosine = dot / (q_norm * std::sqrt(d_norm));
        if (cosine > 0.0) {
            hits.push_back({entries_[doc].id, cosine});
        }
    }
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::string Index::to_json_string() const {
    json out;
    out["version"] = kIndexFormatVersion;
    out["scorer"] = scorer_kind_name(scorer_);
    out["entries"] = json::array();
    for (const auto& entry : entries_) {
        out["entries"].push_back({{"id", entry.id}, {"text", entry.text}});
    }
    if (scorer_ == ScorerKind::embedding) {
        out["vectors"] = vectors_;
    }
    return out.dump();
}

Index Index::from_json_string(const std::string& text, std::shared_ptr<const Embedder> embedder) {
    json parsed;
    try {
        parsed = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid index JSON: ") + e.what());
    }
    if (parsed.value("version", 0) != kIndexFormatVersion) {
        throw ParseError("unsupported index format version");
    }
    std::vector<IndexEntry> entries;
    for (const auto& entry : parsed.at("entries")) {
        entries.push_back({entry.at("id").get<std::string>(), entry.at("text").get<std::string>()});
    }
    ScorerKind kind = scorer_kind_from_name(parsed.at("scorer").get<std::string>());
    if (kind == ScorerKind::lexical) {
        return build(std::move(entries));
    }
    // Restore stored vectors instead of re-embedding; the embedder (when
    // given) is only needed to encode future queries.
    std::unordered_set<std::string> ids;
    for (const auto& entry : entries) {
        if (!ids.insert(entry.id).second) {
            throw IntegrityError("duplicate item_id \"" + entry.id + "\" in index file");
        }
    }
    Index index;
    index.scorer_ = ScorerKind::embedding;
    index.entries_ = std::move(entries);
    index.vectors_ = parsed.at("vectors").get<std::vector<std::vector<double>>>();
    index.embedder_ = std::move(embedder);
    if (index.vectors_.size() != index.entries_.size()) {
        throw ParseError("index file vector count does not match entry count");
    }
    return index;
}

KnowledgeBase KnowledgeBase::build(std::vector<Passage> passages, ScorerKind kind,
                                   std::shared_ptr<const Embedder> embedder) {
    std::vector<IndexEntry> entries;
    entries.reserve(passages.size());
    for (const auto& passage : passages) {
        entries.push_back({passage.passage_id, searchable_text(passage)});
    }
    KnowledgeBase kb;
    kb.index = kind == ScorerKind::lexical
                   ? Index::build(std::move(entries))
                   : Index::build_embedding(std::move(entries), std::move(embedder));
    kb.passages = std::move(passages);
    for (std::size_t i = 0; i < kb.passages.size(); ++i) {
        kb.by_id_[kb.passages[i].passage_id] = i;
    }
    return kb;
}

const Passage* KnowledgeBase::find(const std::string& passage_id) const {
    auto it = by_id_.find(passage_id);
    return it == by_id_.end() ? nullptr : &passages[it->second];
}

std::string KnowledgeBase::to_json_string() const {
    json out;
    out["version"] = kKnowledgeBaseFormatVersion;
    out["passages"] = json::array();
    for (const auto& p : passages) {
        out["passages"].push_back({{"passage_id", p.passage_id},
                                   {"doc_id", p.doc_id},
                                   {"title", p.title},
                                   {"text", p.text},
                                   {"token_count", p.token_count}});
    }
    out["index"] = json::parse(index.to_json_string());
    return out.dump();
}

KnowledgeBase KnowledgeBase::from_json_string(const std::string& text,
                                              std::shared_ptr<const Embedder> embedder) {
    json parsed;
    try {
        parsed = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid knowledge base JSON: ") + e.what());
    }
    if (parsed.value("version", 0) != kKnowledgeBaseFormatVersion) {
        throw ParseError("unsupported knowledge base format version");
    }
    KnowledgeBase kb;
    for (const auto& p : parsed.at("passages")) {
        Passage passage;
        passage.passage_id = p.at("passage_id").get<std::string>();
        passage.doc_id = p.at("doc_id").get<std::string>();
        passage.title = p.at("title").get<std::string>();
        passage.text = p.at("text").get<std::string>();
        passage.token_count = p.at("token_count").get<std::size_t>();
        kb.passages.push_back(std::move(passage));
    }
    kb.index = Index::from_json_string(parsed.at("index").dump(), std::move(embedder));
    for (std::size_t i = 0; i < kb.passages.size(); ++i) {
        kb.by_id_[kb.passages[i].passage_id] = i;
    }
    return kb;
}

KnowledgeBase KnowledgeBase::load(const std::string& path,
                                  std::shared_ptr<const Embedder> embedder) {
    std::ifstream in(path);
    if (!in) {
        throw StorageError("cannot open knowledge base file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_string(buffer.str(), std::move(embedder));
}

void KnowledgeBase::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw StorageError("cannot open knowledge base file for writing: " + path);
    }
    out << to_json_string();
    out.flush();
    if (!out) {
        throw StorageError("failed writing knowledge base file: " + path);
    }
}

std::vector<RetrievedPassage> retrieve_knowledge(const KnowledgeBase& kb,
                                                 const std::vector<std::string>& sub_queries,
                                                 std::size_t k_per_query) {
    if (sub_queries.empty()) {
        throw DomainError("retrieve_knowledge requires at least one sub-query");
    }
    // Union of per-query top-k, keeping each passage's maximum score.
    std::unordered_map<std::string, double> best;
    for (const auto& query : sub_queries) {
        for (const auto& hit : kb.index.search(query, k_per_query)) {
            auto [it, inserted] = best.emplace(hit.item_id, hit.score);
            if (!inserted && hit.score > it->second) it->second = hit.score;
        }
    }
    std::vector<ScoredHit> merged;
    merged.reserve(best.size());
    for (const auto& [id, score] : best) merged.push_back({id, score});
    sort_hits(merged);

    std::vector<RetrievedPassage> result;
    result.reserve(merged.size());
    for (const auto& hit : merged) {
        const Passage* passage = kb.find(hit.item_id);
        if (passage != nullptr) {
            result.push_back({*passage, hit.score});
        }
    }
    return result;
}

std::vector<MemorySlot> retrieve_memory(const Index& index, const std::vector<MemorySlot>& slots,
                                        const std::string& question, std::size_t k) {
    if (slots.empty()) return {};
    std::unordered_map<std::string, const MemorySlot*> by_id;
    for (const auto& slot : slots) by_id[slot.slot_id] = &slot;
    std::vector<MemorySlot> result;
    for (const auto& hit : index.search(question, k)) {
        auto it = by_id.find(hit.item_id);
        if (it != by_id.end()) {
            result.push_back(*it->second);
        }
    }
    return result;
}

} // namespace assistrag
