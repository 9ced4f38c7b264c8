#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "diachron/corpus.hpp"
#include "diachron/reuse/boilerplate.hpp"
#include "diachron/reuse/hashing.hpp"

namespace diachron::reuse {

struct Posting {
    std::uint32_t doc = 0;  // index into SkipGramIndex::doc_ids
    std::uint32_t pos = 0;  // window start

    friend auto operator<=>(const Posting&, const Posting&) = default;
};

struct IndexEntry {
    std::uint64_t key = 0;
    Posting posting;
};

struct IndexOptions {
    std::size_t posting_cap = 1000;
    unsigned partitions = 64;
    unsigned workers = 1;
};

// Skip-gram multimap, split into partitions by a hash of the key. Each
// partition is sorted by (key, doc, pos) so iteration order is deterministic.
class SkipGramIndex {
public:
    std::vector<DocumentId> doc_ids;
    std::vector<std::uint32_t> doc_lengths;
    std::vector<std::vector<IndexEntry>> partitions;

    std::size_t dropped_keys = 0;      // keys whose posting list exceeded the cap
    std::size_t dropped_postings = 0;
    std::size_t posting_cap = 0;
    std::size_t marked_tokens = 0;     // from the boilerplate masks used
    std::size_t total_tokens = 0;

    std::size_t total_postings() const;
    std::size_t key_count() const;
    std::size_t partition_of(std::uint64_t key) const;
    std::vector<Posting> postings(std::uint64_t key) const;

    void save(const std::filesystem::path& path) const;
    static SkipGramIndex load(const std::filesystem::path& path);
};

SkipGramIndex build_index(const HashedCorpus& corpus, std::span<const BoilerplateMask> masks,
                          const IndexOptions& options = {});

SkipGramIndex build_index(std::span<const Document> corpus, const LetterFrequencyTable& table,
                          std::span<const BoilerplateMask> masks, const IndexOptions& options = {});

}  // namespace diachron::reuse
