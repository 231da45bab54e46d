#include "assistrag/memory_store.hpp"

#include "assistrag/actions.hpp"
#include "assistrag/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace assistrag {

using nlohmann::json;

namespace {

std::string now_utc_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    std::tm tm_utc{};
    gmtime_r(&seconds, &tm_utc);
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm_utc.tm_year + 1900, tm_utc.tm_mon + 1, tm_utc.tm_mday, tm_utc.tm_hour,
                  tm_utc.tm_min, tm_utc.tm_sec);
    return buffer;
}

std::string slot_line(const MemorySlot& slot) {
    json out;
    out["slot_id"] = slot.slot_id;
    out["question_text"] = slot.question_text;
    out["reasoning_note"] = slot.reasoning_note;
    out["created_at"] = slot.created_at;
    return out.dump();
}

} // namespace

MemoryStore::MemoryStore(std::string path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) {
        return;
    }
    std::ifstream in(path_);
    if (!in) {
        throw StorageError("cannot open memory file: " + path_);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json parsed = json::parse(line);
            MemorySlot slot;
            slot.slot_id = parsed.at("slot_id").get<std::string>();
            slot.question_text = parsed.at("question_text").get<std::string>();
            slot.reasoning_note = parsed.at("reasoning_note").get<std::string>();
            slot.created_at = parsed.at("created_at").get<std::string>();
            slots_.push_back(std::move(slot));
        } catch (const json::exception& e) {
            throw ParseError("memory line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
}

MemorySlot MemoryStore::append(const NoteRecord& note) {
    if (note.reasoning_note.empty()) {
        throw DomainError("memory slot requires a non-empty reasoning note");
    }
    std::lock_guard<std::mutex> lock(mutex_);

    MemorySlot slot;
    char id[32];
    std::snprintf(id, sizeof(id), "m%06zu", slots_.size() + 1);
    slot.slot_id = id;
    slot.question_text = note.question_text;
    slot.reasoning_note = note.reasoning_note;
    slot.created_at = now_utc_iso8601();

    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        if (!out) {
            throw StorageError("cannot open memory file for append: " + path_);
        }
        out << slot_line(slot) << '\n';
        out.flush();
        if (!out) {
            throw StorageError("failed appending to memory file: " + path_);
        }
    }

    slots_.push_back(slot);
    index_.reset(); // rebuild lazily on the next retrieval
    return slot;
}

std::vector<MemorySlot> MemoryStore::slots() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return slots_;
}

std::size_t MemoryStore::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return slots_.size();
}

const Index& MemoryStore::index_locked() const {
    if (!index_) {
        std::vector<IndexEntry> entries;
        entries.reserve(slots_.size());
        for (const auto& slot : slots_) {
            entries.push_back({slot.slot_id, slot.question_text});
        }
        index_ = std::make_unique<Index>(Index::build(std::move(entries)));
    }
    return *index_;
}

std::vector<MemorySlot> MemoryStore::retrieve(const std::string& question, std::size_t k) const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (slots_.empty()) return {};
    return retrieve_memory(index_locked(), slots_, question, k);
}

} // namespace assistrag
