#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "diachron/corpus.hpp"
#include "diachron/normalize.hpp"

namespace diachron {

nlohmann::json to_json(const Metadata& meta);
Metadata metadata_from_json(const nlohmann::json& j);

std::vector<Metadata> read_metadata_jsonl(const std::filesystem::path& path);
void write_metadata_jsonl(const std::filesystem::path& path, std::span<const Metadata> records);

// Reads one JSON object per non-blank line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const nlohmann::json> rows);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

struct LoadOptions {
    // Directory holding <doc_id>.lemmas sidecars; empty means the corpus dir.
    std::filesystem::path lemma_dir;
    bool require_lemmas = false;
    NormalizationTable table;
    unsigned workers = 1;
};

// Loads <dir>/metadata.jsonl and the matching <doc_id>.txt files. Documents
// come back sorted by id; word_count and dod_ce are recomputed.
std::vector<Document> load_corpus(const std::filesystem::path& dir, const LoadOptions& options = {});

// Writes metadata.jsonl plus one <doc_id>.txt per document.
void save_corpus(const std::filesystem::path& dir, std::span<const Document> corpus);

std::vector<Metadata> metadata_of(std::span<const Document> corpus);

// Minimal RFC 4180 quoting.
std::string csv_field(const std::string& s);

}  // namespace diachron
