#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diachron/corpus.hpp"

namespace diachron::reuse {

inline constexpr std::size_t kWindow = 5;

// Corpus-wide letter (code point) counts over token surfaces.
class LetterFrequencyTable {
public:
    void add(std::string_view word, std::uint64_t times = 1);
    void merge(const LetterFrequencyTable& other);

    // Zero for letters never seen.
    std::uint64_t count(char32_t letter) const;
    const std::map<char32_t, std::uint64_t>& counts() const noexcept { return freq_; }
    std::size_t size() const noexcept { return freq_.size(); }

    // Dense rank of the letter in code-point order; 0xFFFF for unseen letters.
    std::uint32_t index_of(char32_t letter) const;

private:
    void reindex();

    std::map<char32_t, std::uint64_t> freq_;
    std::vector<char32_t> letters_;  // sorted, parallel to dense indices
};

LetterFrequencyTable build_letter_frequencies(std::span<const Document> corpus, bool use_lemmas = false,
                                              unsigned workers = 1);

// The two rarest letters of a word in order of first occurrence.
struct WordHash {
    char32_t first = 0;
    char32_t second = 0;

    std::string str() const;
    friend auto operator<=>(const WordHash&, const WordHash&) = default;
    friend bool operator==(const WordHash&, const WordHash&) = default;
};

// Picks the two distinct letters with the lowest corpus frequency; equal
// frequencies go to the earlier letter in the word, then the lower code point.
// A one-letter word hashes to (letter, letter).
WordHash word_hash(std::string_view word, const LetterFrequencyTable& table);

// 32-bit code of a word hash: dense letter indices packed 16:16.
std::uint32_t hash_code(const WordHash& h, const LetterFrequencyTable& table);

// A 5-token window with one non-initial slot (1..4) left out.
struct SkipGramKey {
    std::array<WordHash, 4> hashes;
    int omitted_slot = 1;

    // Two keys are the same skip-gram when their hash sequences agree; the
    // omitted slot is positional metadata only.
    friend bool operator==(const SkipGramKey& a, const SkipGramKey& b) { return a.hashes == b.hashes; }
};

// Per-token hash codes for a whole corpus, computed once and shared by the
// boilerplate pass, the index and the matcher.
struct HashedCorpus {
    std::vector<DocumentId> ids;
    std::vector<std::vector<std::uint32_t>> codes;
    // True when every letter index fits in a byte, so four codes pack into a
    // 64-bit key without loss.
    bool exact_keys = false;

    std::size_t total_tokens() const;
};

HashedCorpus hash_corpus(std::span<const Document> corpus, const LetterFrequencyTable& table,
                         bool use_lemmas = false, unsigned workers = 1);

// 64-bit skip-gram key from four word-hash codes.
std::uint64_t pack_key(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3, bool exact);

std::uint64_t mix64(std::uint64_t x) noexcept;

// Keys for the window starting at token i. Empty when the window runs past
// the end or covers a masked token.
std::vector<SkipGramKey> skipgrams_at(std::span<const Token> tokens, std::size_t i,
                                      const LetterFrequencyTable& table,
                                      const std::vector<bool>* mask = nullptr);

// Same, as packed keys over precomputed codes. Writes up to 4 keys into
// `out` and returns how many.
std::size_t skipgram_keys_at(std::span<const std::uint32_t> codes, std::size_t i, const std::vector<bool>* mask,
                             bool exact, std::array<std::uint64_t, 4>& out);

}  // namespace diachron::reuse
