#pragma once

#include "assistrag/retrieval.hpp"

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace assistrag {

struct NoteRecord; // actions.hpp

// A stored note: one question plus the reasoning behind its answer.
struct MemorySlot {
    std::string slot_id;
    std::string question_text;
    std::string reasoning_note; // non-empty
    std::string created_at;     // ISO-8601 UTC
};

// Append-only store of memory slots backed by a JSONL file (one slot per
// line, flushed per append). In-memory order equals file order. Appends are
// serialized; reads see either the pre- or post-append list.
class MemoryStore {
public:
    // In-memory store without persistence.
    MemoryStore() = default;

    // Opens (loads) the store at path. A missing file is an empty store;
    // malformed lines throw ParseError with the 1-based line number.
    explicit MemoryStore(std::string path);

    // Persists the note before exposing it in memory; on I/O failure throws
    // StorageError and leaves the in-memory list unchanged.
    MemorySlot append(const NoteRecord& note);

    std::vector<MemorySlot> slots() const;
    std::size_t size() const;
    const std::string& path() const { return path_; }

    // Top-k slots for the question, over an index of slot question texts.
    // The index is rebuilt lazily after appends.
    std::vector<MemorySlot> retrieve(const std::string& question, std::size_t k = 5) const;

private:
    const Index& index_locked() const;

    std::string path_;
    std::vector<MemorySlot> slots_;
    mutable std::mutex mutex_;
    mutable std::unique_ptr<Index> index_;
};

} // namespace assistrag
