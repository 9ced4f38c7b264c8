#pragma once

#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

#include "diachron/corpus.hpp"
#include "diachron/reuse/hashing.hpp"

namespace diachron::reuse {

struct BoilerplateMask {
    DocumentId doc_id;
    std::vector<bool> marked;  // one flag per token

    std::size_t marked_count() const;
    // Maximal marked runs as [start, end) token ranges.
    std::vector<std::pair<std::size_t, std::size_t>> ranges() const;
};

struct BoilerplateOptions {
    std::size_t passage_len = 6;
    std::size_t recurrence_threshold = 40;
    unsigned workers = 1;
};

struct BoilerplateResult {
    std::vector<BoilerplateMask> masks;  // parallel to the corpus
    std::size_t marked_tokens = 0;
    std::size_t total_tokens = 0;
    std::size_t frequent_sequences = 0;  // distinct hash sequences at or over the threshold

    double marked_fraction() const { return total_tokens ? double(marked_tokens) / double(total_tokens) : 0.0; }
};

// Marks every token covered by a passage_len-long word-hash sequence that
// occurs at least recurrence_threshold times across the corpus.
BoilerplateResult mark_boilerplate(const HashedCorpus& corpus, const BoilerplateOptions& options = {});

BoilerplateResult mark_boilerplate(std::span<const Document> corpus, const LetterFrequencyTable& table,
                                   const BoilerplateOptions& options = {});

// Masks with nothing marked, for indexing without a boilerplate pass.
std::vector<BoilerplateMask> empty_masks(const HashedCorpus& corpus);

// boilerplate.jsonl rows: {doc_id, token_count, marked_tokens, ranges:[[s,e],...]}
nlohmann::json to_json(const BoilerplateMask& mask);
BoilerplateMask mask_from_json(const nlohmann::json& j);

}  // namespace diachron::reuse
