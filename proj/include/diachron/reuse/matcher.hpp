#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "diachron/corpus.hpp"
#include "diachron/reuse/index.hpp"

namespace diachron::reuse {

// Half-open token range.
struct TokenSpan {
    std::uint32_t start = 0;
    std::uint32_t end = 0;

    std::uint32_t length() const { return end - start; }
    bool overlaps(const TokenSpan& o) const { return start < o.end && o.start < end; }
    std::uint32_t overlap(const TokenSpan& o) const;

    friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct PassageMatch {
    DocumentId doc_a;
    DocumentId doc_b;
    TokenSpan span_a;
    TokenSpan span_b;
    std::size_t length = 0;  // min of the two span lengths
    std::size_t seed_count = 0;

    PassageMatch swapped() const;
};

struct MatchOptions {
    std::size_t min_match_len = 20;
    std::size_t max_gap = 10;
    unsigned workers = 1;
};

// Pairs up postings that share a key, chains seeds per document pair and
// reports chained regions at least min_match_len tokens long on both sides.
// Each pair is reported once, with doc_a <= doc_b; output is sorted by
// (doc_a, doc_b, span_a.start, span_b.start).
std::vector<PassageMatch> find_matches(const SkipGramIndex& index, const MatchOptions& options = {});

// Every match touching `doc`, oriented so that doc_a == doc.
std::vector<PassageMatch> matches_for(std::span<const PassageMatch> matches, const DocumentId& doc);

// Both orientations of every match, sorted.
std::vector<PassageMatch> with_both_orientations(std::span<const PassageMatch> matches);

struct MatchSummary {
    std::size_t matches = 0;
    std::size_t document_pairs = 0;
    double mean_length = 0.0;
    double marked_fraction = 0.0;
    std::size_t marked_tokens = 0;
    std::size_t total_tokens = 0;
    std::size_t total_postings = 0;
    std::size_t dropped_keys = 0;
};

MatchSummary summarize(std::span<const PassageMatch> matches, const SkipGramIndex& index);

nlohmann::json to_json(const PassageMatch& m);
nlohmann::json to_json(const MatchSummary& s);

}  // namespace diachron::reuse
