#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "diachron/corpus.hpp"

namespace diachron {

// Per-token lemmas produced by an external morphological analyzer.
struct ExternalAnalyzerOutput {
    std::vector<std::string> lemmas;
};

// Rule-based light stemmer (article/conjunction prefixes, pronoun and plural
// suffixes). Used when no analyzer output is available.
struct FallbackStemmer {};

using LemmaSource = std::variant<ExternalAnalyzerOutput, FallbackStemmer>;

std::string light_stem(std::string_view word);

// Throws AlignmentError if an external source has the wrong length.
Document lemmatize(Document doc, const LemmaSource& source);

// <doc_id>.lemmas: one lemma per line, line i <-> token i.
ExternalAnalyzerOutput read_lemma_sidecar(const std::filesystem::path& path);
void write_lemma_sidecar(const std::filesystem::path& path, std::span<const std::string> lemmas);

struct VocabStats {
    std::size_t word_types = 0;
    std::size_t lemma_types = 0;
};

VocabStats vocab_stats(std::span<const Document> corpus);

}  // namespace diachron
