#include "diachron/reuse/hashing.hpp"

#include <algorithm>

#include "diachron/parallel.hpp"
#include "diachron/utf8.hpp"

namespace diachron::reuse {

void LetterFrequencyTable::add(std::string_view word, std::uint64_t times) {
    std::size_t pos = 0;
    bool grew = false;
    while (pos < word.size()) {
        const char32_t cp = utf8::decode(word, pos);
        auto [it, inserted] = freq_.try_emplace(cp, 0);
        it->second += times;
        grew |= inserted;
    }
    if (grew) reindex();
}

void LetterFrequencyTable::merge(const LetterFrequencyTable& other) {
    bool grew = false;
    for (const auto& [cp, n] : other.freq_) {
        auto [it, inserted] = freq_.try_emplace(cp, 0);
        it->second += n;
        grew |= inserted;
    }
    if (grew) reindex();
}

std::uint64_t LetterFrequencyTable::count(char32_t letter) const {
    auto it = freq_.find(letter);
    return it == freq_.end() ? 0 : it->second;
}

std::uint32_t LetterFrequencyTable::index_of(char32_t letter) const {
    auto it = std::lower_bound(letters_.begin(), letters_.end(), letter);
    if (it == letters_.end() || *it != letter) return 0xFFFF;
    return static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - letters_.begin(), 0xFFFE));
}

void LetterFrequencyTable::reindex() {
    letters_.clear();
    letters_.reserve(freq_.size());
    for (const auto& kv : freq_) letters_.push_back(kv.first);
}

LetterFrequencyTable build_letter_frequencies(std::span<const Document> corpus, bool use_lemmas, unsigned workers) {
    const std::size_t shards = std::max(1u, workers);
    std::vector<LetterFrequencyTable> partial(shards);
    parallel_for(shards, workers, [&](std::size_t s) {
        // Count word types first; most tokens repeat.
        std::map<std::string_view, std::uint64_t> types;
        for (std::size_t d = s; d < corpus.size(); d += shards)
            for (std::size_t i = 0; i < corpus[d].tokens.size(); ++i) ++types[corpus[d].unit(i, use_lemmas)];
        for (const auto& [w, n] : types) partial[s].add(w, n);
    });
    LetterFrequencyTable table;
    for (const auto& p : partial) table.merge(p);
    return table;
}

std::string WordHash::str() const {
    std::string s;
    utf8::append(s, first);
    utf8::append(s, second);
    return s;
}

WordHash word_hash(std::string_view word, const LetterFrequencyTable& table) {
    struct Candidate {
        char32_t letter;
        std::size_t first_pos;
        std::uint64_t freq;
    };
    std::vector<Candidate> seen;
    std::size_t pos = 0;
    std::size_t index = 0;
    while (pos < word.size()) {
        const char32_t cp = utf8::decode(word, pos);
        if (std::none_of(seen.begin(), seen.end(), [cp](const Candidate& c) { return c.letter == cp; }))
            seen.push_back({cp, index, table.count(cp)});
        ++index;
    }
    if (seen.empty()) return {};
    if (seen.size() == 1) return {seen[0].letter, seen[0].letter};
    auto rarer = [](const Candidate& a, const Candidate& b) {
        if (a.freq != b.freq) return a.freq < b.freq;
        if (a.first_pos != b.first_pos) return a.first_pos < b.first_pos;
        return a.letter < b.letter;
    };
    std::partial_sort(seen.begin(), seen.begin() + 2, seen.end(), rarer);
    if (seen[1].first_pos < seen[0].first_pos) std::swap(seen[0], seen[1]);
    return {seen[0].letter, seen[1].letter};
}

std::uint32_t hash_code(const WordHash& h, const LetterFrequencyTable& table) {
    return (table.index_of(h.first) << 16) | table.index_of(h.second);
}

std::size_t HashedCorpus::total_tokens() const {
    std::size_t n = 0;
    for (const auto& c : codes) n += c.size();
    return n;
}

HashedCorpus hash_corpus(std::span<const Document> corpus, const LetterFrequencyTable& table, bool use_lemmas,
                         unsigned workers) {
    HashedCorpus hc;
    hc.exact_keys = table.size() <= 0xFF;
    hc.ids.reserve(corpus.size());
    for (const auto& d : corpus) hc.ids.push_back(d.meta.doc_id);
    hc.codes.resize(corpus.size());
    parallel_for(
        corpus.size(), workers,
        [&](std::size_t d) {
            const auto& doc = corpus[d];
            auto& out = hc.codes[d];
            out.resize(doc.tokens.size());
            for (std::size_t i = 0; i < doc.tokens.size(); ++i)
                out[i] = hash_code(word_hash(doc.unit(i, use_lemmas), table), table);
        },
        4);
    return hc;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

namespace {

std::uint64_t byte_pair(std::uint32_t code) { return ((code >> 8) & 0xFF00) | (code & 0xFF); }

}  // namespace

std::uint64_t pack_key(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3, bool exact) {
    if (exact) return byte_pair(c0) | (byte_pair(c1) << 16) | (byte_pair(c2) << 32) | (byte_pair(c3) << 48);
    std::uint64_t h = mix64(c0 + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ c1);
    h = mix64(h ^ c2);
    return mix64(h ^ c3);
}

std::size_t skipgram_keys_at(std::span<const std::uint32_t> codes, std::size_t i, const std::vector<bool>* mask,
                             bool exact, std::array<std::uint64_t, 4>& out) {
    if (i + kWindow > codes.size()) return 0;
    if (mask)
        for (std::size_t j = i; j < i + kWindow; ++j)
            if ((*mask)[j]) return 0;
    const std::uint32_t* w = codes.data() + i;
    out[0] = pack_key(w[0], w[2], w[3], w[4], exact);
    out[1] = pack_key(w[0], w[1], w[3], w[4], exact);
    out[2] = pack_key(w[0], w[1], w[2], w[4], exact);
    out[3] = pack_key(w[0], w[1], w[2], w[3], exact);
    return 4;
}

std::vector<SkipGramKey> skipgrams_at(std::span<const Token> tokens, std::size_t i,
                                      const LetterFrequencyTable& table, const std::vector<bool>* mask) {
    std::vector<SkipGramKey> keys;
    if (i + kWindow > tokens.size()) return keys;
    if (mask)
        for (std::size_t j = i; j < i + kWindow; ++j)
            if ((*mask)[j]) return keys;
    std::array<WordHash, kWindow> w;
    for (std::size_t j = 0; j < kWindow; ++j) w[j] = word_hash(tokens[i + j].surface, table);
    for (int slot = 1; slot <= 4; ++slot) {
        SkipGramKey k;
        k.omitted_slot = slot;
        std::size_t out = 0;
        for (std::size_t j = 0; j < kWindow; ++j)
            if (static_cast<int>(j) != slot) k.hashes[out++] = w[j];
        keys.push_back(k);
    }
    return keys;
}

}  // namespace diachron::reuse
