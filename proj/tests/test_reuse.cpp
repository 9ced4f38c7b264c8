#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "doctest.h"

#include "diachron/reuse/boilerplate.hpp"
#include "diachron/reuse/hashing.hpp"
#include "diachron/reuse/index.hpp"
#include "diachron/reuse/matcher.hpp"
#include "diachron/utf8.hpp"
#include "support/synthetic.hpp"

using namespace diachron;
using namespace diachron::reuse;

namespace {

struct Pipeline {
    LetterFrequencyTable table;
    HashedCorpus hashed;
    BoilerplateResult boilerplate;
    SkipGramIndex index;
    std::vector<PassageMatch> matches;
};

Pipeline run(const std::vector<Document>& docs, std::size_t threshold = 40, unsigned workers = 1,
             unsigned partitions = 64, std::size_t cap = 1000) {
    Pipeline p;
    p.table = build_letter_frequencies(docs, false, workers);
    p.hashed = hash_corpus(docs, p.table, false, workers);
    BoilerplateOptions bo;
    bo.recurrence_threshold = threshold;
    bo.workers = workers;
    p.boilerplate = mark_boilerplate(p.hashed, bo);
    IndexOptions io;
    io.workers = workers;
    io.partitions = partitions;
    io.posting_cap = cap;
    p.index = build_index(p.hashed, p.boilerplate.masks, io);
    MatchOptions mo;
    mo.workers = workers;
    p.matches = find_matches(p.index, mo);
    return p;
}

std::string dump(const std::vector<PassageMatch>& ms) {
    std::string s;
    for (const auto& m : ms) s += to_json(m).dump() + "\n";
    return s;
}

std::size_t word_edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::string> words_of(const Document& d) {
    std::vector<std::string> out;
    for (const auto& t : d.tokens) out.push_back(t.surface);
    return out;
}

}  // namespace

TEST_SUITE("reuse") {

TEST_CASE("letter frequencies count every letter") {
    LetterFrequencyTable t;
    t.add("ab");
    CHECK(t.count(U'a') == 1);
    CHECK(t.count(U'b') == 1);
    t.add("ab");
    CHECK(t.count(U'a') == 2);
    CHECK(t.size() == 2);
    CHECK(t.index_of(U'z') == 0xFFFF);
}

TEST_CASE("letter frequencies match a direct tally") {
    std::mt19937_64 rng(3);
    const auto vocab = synth::vocabulary(rng, 200);
    std::vector<Document> docs;
    for (int i = 0; i < 20; ++i)
        docs.push_back(synth::make_doc(synth::doc_name("d", i), synth::join(synth::sample(rng, vocab, 300))));
    std::map<char32_t, std::uint64_t> tally;
    for (const auto& d : docs)
        for (const auto& t : d.tokens)
            for (char32_t c : utf8::to_u32(t.surface)) ++tally[c];
    for (unsigned workers : {1u, 3u}) {
        const auto table = build_letter_frequencies(docs, false, workers);
        CHECK(table.counts() == tally);
    }
}

TEST_CASE("word hash picks the two rarest letters in word order") {
    LetterFrequencyTable t;
    t.add("a", 100);
    t.add("b", 1);
    t.add("c", 5);
    CHECK(word_hash("ab", t) == WordHash{U'a', U'b'});
    CHECK(word_hash("aab", t) == WordHash{U'a', U'b'});
    CHECK(word_hash("cab", t) == WordHash{U'c', U'b'});
    CHECK(word_hash("bca", t) == WordHash{U'b', U'c'});
    CHECK(word_hash("a", t) == WordHash{U'a', U'a'});
    CHECK(word_hash("aaa", t) == WordHash{U'a', U'a'});
    // equal frequencies: earlier position wins
    LetterFrequencyTable flat;
    flat.add("xyz");
    CHECK(word_hash("zyx", flat) == WordHash{U'z', U'y'});
}

TEST_CASE("skip-grams of a five-token window") {
    const auto doc = synth::make_doc("d", "aa bb cc dd ee");
    LetterFrequencyTable t;
    for (const auto& tok : doc.tokens) t.add(tok.surface);
    CHECK(skipgrams_at(doc.tokens, 0, t).size() == 4);
    CHECK(skipgrams_at(doc.tokens, 1, t).empty());
    const auto keys = skipgrams_at(doc.tokens, 0, t);
    for (int s = 0; s < 4; ++s) {
        CHECK(keys[s].omitted_slot == s + 1);
        CHECK(keys[s].hashes[0] == word_hash("aa", t));
    }
    std::vector<bool> mask(5, false);
    mask[3] = true;
    CHECK(skipgrams_at(doc.tokens, 0, t, &mask).empty());
}

TEST_CASE("windows differing in one non-initial word share exactly one key") {
    const auto a = synth::make_doc("a", "ab cd ef gh ij");
    const auto b = synth::make_doc("b", "ab cd xy gh ij");
    LetterFrequencyTable t;
    for (const auto* d : {&a, &b})
        for (const auto& tok : d->tokens) t.add(tok.surface);
    const auto ka = skipgrams_at(a.tokens, 0, t), kb = skipgrams_at(b.tokens, 0, t);
    int shared = 0;
    for (const auto& x : ka)
        for (const auto& y : kb) shared += x == y;
    CHECK(shared == 1);
    CHECK(ka[1] == kb[1]);  // the key omitting slot 2
    int self = 0;
    for (const auto& x : ka)
        for (const auto& y : ka) self += x == y;
    CHECK(self == 4);
}

TEST_CASE("packed keys agree with skip-gram key equality") {
    std::mt19937_64 rng(12);
    const auto vocab = synth::vocabulary(rng, 50);
    const auto doc = synth::make_doc("d", synth::join(synth::sample(rng, vocab, 400)));
    const std::vector<Document> docs{doc};
    const auto table = build_letter_frequencies(docs);
    const auto hc = hash_corpus(docs, table);
    REQUIRE(hc.exact_keys);
    std::map<std::uint64_t, std::array<WordHash, 4>> seen;
    for (std::size_t i = 0; i + 5 <= doc.tokens.size(); ++i) {
        std::array<std::uint64_t, 4> packed{};
        REQUIRE(skipgram_keys_at(hc.codes[0], i, nullptr, true, packed) == 4);
        const auto keys = skipgrams_at(doc.tokens, i, table);
        for (int s = 0; s < 4; ++s) {
            auto [it, fresh] = seen.emplace(packed[s], keys[s].hashes);
            REQUIRE(it->second == keys[s].hashes);
        }
    }
}

TEST_CASE("boilerplate phrase planted 50 times is fully masked") {
    std::mt19937_64 rng(21);
    std::set<std::string> used;
    const auto vocab = synth::vocabulary(rng, 3000, &used);
    const auto phrase = synth::vocabulary(rng, 6, &used);
    const auto rare = synth::vocabulary(rng, 6, &used);
    std::vector<Document> docs;
    std::vector<std::pair<std::size_t, std::size_t>> planted;  // (doc, start)
    std::vector<std::pair<std::size_t, std::size_t>> twice;
    for (int d = 0; d < 25; ++d) {
        std::vector<std::string> words = synth::sample(rng, vocab, 400);
        for (int k = 0; k < 2; ++k) {
            const std::size_t at = 20 + k * 200 + rng() % 100;
            std::copy(phrase.begin(), phrase.end(), words.begin() + at);
            planted.emplace_back(d, at);
        }
        if (d < 2) {
            const std::size_t at = 5;
            std::copy(rare.begin(), rare.end(), words.begin() + at);
            twice.emplace_back(d, at);
        }
        docs.push_back(synth::make_doc(synth::doc_name("d", d), synth::join(words)));
    }
    const auto p = run(docs, 40);
    for (const auto& [d, at] : planted)
        for (std::size_t i = at; i < at + 6; ++i) REQUIRE(p.boilerplate.masks[d].marked[i]);
    for (const auto& [d, at] : twice)
        for (std::size_t i = at; i < at + 6; ++i) CHECK_FALSE(p.boilerplate.masks[d].marked[i]);
    CHECK(p.boilerplate.marked_tokens == 300);
    CHECK(p.boilerplate.marked_fraction() == doctest::Approx(300.0 / 10000.0));
}

TEST_CASE("masked windows contribute no postings") {
    std::mt19937_64 rng(22);
    std::set<std::string> used;
    const auto vocab = synth::vocabulary(rng, 2000, &used);
    const auto phrase = synth::vocabulary(rng, 6, &used);
    std::vector<Document> docs;
    std::vector<std::pair<std::size_t, std::size_t>> planted;
    for (int d = 0; d < 10; ++d) {
        auto words = synth::sample(rng, vocab, 300);
        for (int k = 0; k < 5; ++k) {
            const std::size_t at = 10 + k * 55;
            std::copy(phrase.begin(), phrase.end(), words.begin() + at);
            planted.emplace_back(d, at);
        }
        docs.push_back(synth::make_doc(synth::doc_name("d", d), synth::join(words)));
    }
    const auto p = run(docs, 40);
    for (const auto& part : p.index.partitions)
        for (const auto& e : part) {
            for (const auto& [d, at] : planted)
                if (e.posting.doc == d) REQUIRE((e.posting.pos + 5 <= at || e.posting.pos >= at + 6));
        }
}

TEST_CASE("index postings equal a direct enumeration of unmasked windows") {
    std::mt19937_64 rng(5);
    const auto vocab = synth::vocabulary(rng, 40, nullptr, 1, 3);
    std::vector<Document> docs;
    for (int d = 0; d < 15; ++d)
        docs.push_back(synth::make_doc(synth::doc_name("d", d), synth::join(synth::sample(rng, vocab, 200 + rng() % 200))));
    const auto p = run(docs, 5);
    std::set<std::tuple<std::array<WordHash, 4>, std::size_t, std::size_t>> distinct;
    std::map<std::array<WordHash, 4>, std::size_t> per_key;
    for (std::size_t d = 0; d < docs.size(); ++d)
        for (std::size_t i = 0; i < docs[d].tokens.size(); ++i)
            for (const auto& k : skipgrams_at(docs[d].tokens, i, p.table, &p.boilerplate.masks[d].marked))
                if (distinct.emplace(k.hashes, d, i).second) ++per_key[k.hashes];
    std::size_t expected = 0, dropped = 0;
    for (const auto& [k, n] : per_key) {
        if (n > 1000) ++dropped;
        else expected += n;
    }
    CHECK(p.index.total_postings() == expected);
    CHECK(p.index.dropped_keys == dropped);
    CHECK(p.index.key_count() == per_key.size() - dropped);
}

TEST_CASE("index corner cases") {
    const std::vector<Document> none;
    const auto p0 = run(none);
    CHECK(p0.index.total_postings() == 0);
    CHECK(p0.matches.empty());
    const std::vector<Document> one{synth::make_doc("d", "ab cd ef gh ij")};
    const auto p1 = run(one);
    CHECK(p1.index.total_postings() == 4);
    CHECK(p1.index.key_count() == 4);
}

TEST_CASE("over-frequent keys are dropped and counted") {
    std::string text;
    for (int i = 0; i < 1200; ++i) text += "قال ";
    const std::vector<Document> docs{synth::make_doc("d", text)};
    const auto table = build_letter_frequencies(docs);
    const auto hc = hash_corpus(docs, table);
    const auto idx = build_index(hc, empty_masks(hc), {});
    CHECK(idx.dropped_keys == 1);
    CHECK(idx.dropped_postings == 1196);
    CHECK(idx.total_postings() == 0);
}

TEST_CASE("identical 25-token documents give one full match") {
    std::mt19937_64 rng(6);
    const auto text = synth::join(synth::sample(rng, synth::vocabulary(rng, 100), 25));
    const std::vector<Document> docs{synth::make_doc("a", text), synth::make_doc("b", text)};
    const auto p = run(docs);
    REQUIRE(p.matches.size() == 1);
    const auto& m = p.matches[0];
    CHECK(m.doc_a.str() == "a");
    CHECK(m.doc_b.str() == "b");
    CHECK(m.span_a == TokenSpan{0, 25});
    CHECK(m.span_b == TokenSpan{0, 25});
    CHECK(m.length == 25);
}

TEST_CASE("disjoint vocabularies never match") {
    std::mt19937_64 rng(7);
    std::set<std::string> used;
    const auto va = synth::vocabulary(rng, 300, &used), vb = synth::vocabulary(rng, 300, &used);
    std::vector<Document> docs;
    for (int d = 0; d < 10; ++d)
        docs.push_back(synth::make_doc(synth::doc_name("d", d), synth::join(synth::sample(rng, d % 2 ? va : vb, 500))));
    const auto p = run(docs);
    for (const auto& m : p.matches) {
        const int a = std::stoi(m.doc_a.str().substr(1)), b = std::stoi(m.doc_b.str().substr(1));
        CHECK(a % 2 == b % 2);
    }
}

TEST_CASE("perturbed quotation is found where a sliding-window oracle says it should be") {
    std::mt19937_64 rng(8);
    std::set<std::string> used;
    const auto va = synth::vocabulary(rng, 1000, &used), vb = synth::vocabulary(rng, 1000, &used);
    for (int trial = 0; trial < 10; ++trial) {
        auto a_words = synth::sample(rng, va, 100);
        std::vector<std::string> quote(a_words.begin() + 40, a_words.begin() + 70);
        // two substituted non-initial words
        for (int k = 0; k < 2; ++k) quote[1 + rng() % 29] = vb[rng() % vb.size()];
        auto b_words = synth::sample(rng, vb, 30);
        b_words.insert(b_words.end(), quote.begin(), quote.end());
        auto tail = synth::sample(rng, vb, 30);
        b_words.insert(b_words.end(), tail.begin(), tail.end());
        const std::vector<Document> docs{synth::make_doc("a", synth::join(a_words)),
                                         synth::make_doc("b", synth::join(b_words))};
        const auto wa = words_of(docs[0]), wb = words_of(docs[1]);
        // Oracle: some 20-token windows align with at most 2 edits.
        bool exists = false;
        for (std::size_t i = 0; i + 20 <= wa.size() && !exists; ++i)
            for (std::size_t j = 0; j + 20 <= wb.size() && !exists; ++j)
                exists = word_edit_distance(std::span(wa).subspan(i, 20), std::span(wb).subspan(j, 20)) <= 2;
        REQUIRE(exists);
        const auto p = run(docs);
        REQUIRE(p.matches.size() >= 1);
        const auto& m = p.matches[0];
        CHECK(m.length >= 20);
        CHECK(m.span_a.overlap({40, 70}) >= 24);
        CHECK(m.span_b.overlap({30, 60}) >= 24);
        const auto ed = word_edit_distance(std::span(wa).subspan(m.span_a.start, m.span_a.length()),
                                           std::span(wb).subspan(m.span_b.start, m.span_b.length()));
        CHECK(double(ed) <= 0.1 * double(std::max(m.span_a.length(), m.span_b.length())));
    }
}

TEST_CASE("insertions and deletions are tolerated") {
    std::mt19937_64 rng(10);
    std::set<std::string> used;
    const auto va = synth::vocabulary(rng, 1000, &used), vb = synth::vocabulary(rng, 1000, &used);
    auto a_words = synth::sample(rng, va, 120);
    std::vector<std::string> quote(a_words.begin() + 30, a_words.begin() + 80);
    quote.insert(quote.begin() + 12, vb[0]);
    quote.erase(quote.begin() + 30);
    auto b_words = synth::sample(rng, vb, 20);
    b_words.insert(b_words.end(), quote.begin(), quote.end());
    const std::vector<Document> docs{synth::make_doc("a", synth::join(a_words)),
                                     synth::make_doc("b", synth::join(b_words))};
    const auto p = run(docs);
    REQUIRE(p.matches.size() == 1);
    CHECK(p.matches[0].span_a.overlap({30, 80}) >= 45);
}

TEST_CASE("self reuse inside one document") {
    std::mt19937_64 rng(11);
    const auto vocab = synth::vocabulary(rng, 2000);
    auto words = synth::sample(rng, vocab, 200);
    std::copy(words.begin() + 10, words.begin() + 40, words.begin() + 120);
    const std::vector<Document> docs{synth::make_doc("solo", synth::join(words))};
    const auto p = run(docs);
    REQUIRE(p.matches.size() == 1);
    CHECK(p.matches[0].doc_a == p.matches[0].doc_b);
    CHECK_FALSE(p.matches[0].span_a.overlaps(p.matches[0].span_b));
    // The last window may match with its final word skipped, so the span can
    // run one token past the copy.
    CHECK(p.matches[0].span_a.start == 10);
    CHECK(p.matches[0].span_b.start == 120);
    CHECK(p.matches[0].span_a.end - 40 <= 1);
    CHECK(p.matches[0].span_b.end - 150 <= 1);
}

TEST_CASE("short shared passages are not reported") {
    std::mt19937_64 rng(12);
    std::set<std::string> used;
    const auto va = synth::vocabulary(rng, 1000, &used), vb = synth::vocabulary(rng, 1000, &used);
    auto a = synth::sample(rng, va, 100);
    auto b = synth::sample(rng, vb, 100);
    std::copy(a.begin(), a.begin() + 15, b.begin() + 50);
    const std::vector<Document> docs{synth::make_doc("a", synth::join(a)), synth::make_doc("b", synth::join(b))};
    CHECK(run(docs).matches.empty());
}

TEST_CASE("matches are symmetric through the query API") {
    std::mt19937_64 rng(13);
    const auto vocab = synth::vocabulary(rng, 3000);
    std::vector<std::vector<std::string>> texts;
    for (int d = 0; d < 6; ++d) texts.push_back(synth::sample(rng, vocab, 300));
    for (int q = 0; q < 8; ++q) {
        const std::size_t from = rng() % 6, to = (from + 1 + rng() % 5) % 6;
        const std::size_t s = rng() % 250, t = rng() % 250;
        std::copy(texts[from].begin() + s, texts[from].begin() + s + 40, texts[to].begin() + t);
    }
    std::vector<Document> docs;
    for (int d = 0; d < 6; ++d) docs.push_back(synth::make_doc(synth::doc_name("d", d), synth::join(texts[d])));
    const auto p = run(docs);
    REQUIRE_FALSE(p.matches.empty());
    const auto both = with_both_orientations(p.matches);
    CHECK(both.size() == 2 * p.matches.size());
    for (const auto& m : p.matches) {
        CHECK(m.doc_a <= m.doc_b);
        CHECK(m.length >= 20);
        const auto for_b = matches_for(p.matches, m.doc_b);
        CHECK(std::any_of(for_b.begin(), for_b.end(), [&](const PassageMatch& x) {
            return x.doc_b == m.doc_a && x.span_a == m.span_b && x.span_b == m.span_a;
        }));
    }
}

TEST_CASE("matches stay clear of boilerplate") {
    std::mt19937_64 rng(14);
    std::set<std::string> used;
    const auto vocab = synth::vocabulary(rng, 3000, &used);
    const auto phrase = synth::vocabulary(rng, 6, &used);
    std::vector<std::vector<std::string>> texts;
    for (int d = 0; d < 12; ++d) {
        auto w = synth::sample(rng, vocab, 300);
        for (int k = 0; k < 4; ++k) std::copy(phrase.begin(), phrase.end(), w.begin() + 20 + 70 * k);
        texts.push_back(w);
    }
    // a long quotation straddling a boilerplate occurrence
    std::copy(texts[0].begin() + 60, texts[0].begin() + 140, texts[1].begin() + 150);
    std::vector<Document> docs;
    for (int d = 0; d < 12; ++d) docs.push_back(synth::make_doc(synth::doc_name("d", d), synth::join(texts[d])));
    const auto p = run(docs, 5);
    CHECK_FALSE(p.matches.empty());
    std::map<DocumentId, std::size_t> idx;
    for (std::size_t i = 0; i < docs.size(); ++i) idx.emplace(docs[i].meta.doc_id, i);
    for (const auto& m : p.matches) {
        std::size_t masked = 0;
        for (auto i = m.span_a.start; i < m.span_a.end; ++i) masked += p.boilerplate.masks[idx[m.doc_a]].marked[i];
        CHECK(masked <= 10);
    }
}

TEST_CASE("output is independent of worker and partition counts") {
    std::mt19937_64 rng(15);
    const auto vocab = synth::vocabulary(rng, 2000);
    std::vector<std::vector<std::string>> texts;
    for (int d = 0; d < 20; ++d) texts.push_back(synth::sample(rng, vocab, 400));
    for (int q = 0; q < 30; ++q) {
        const std::size_t from = rng() % 20, to = rng() % 20;
        std::copy(texts[from].begin() + rng() % 300, texts[from].begin() + 300, texts[to].begin() + rng() % 50);
    }
    std::vector<Document> docs;
    for (int d = 0; d < 20; ++d) docs.push_back(synth::make_doc(synth::doc_name("d", d), synth::join(texts[d])));
    const auto base = dump(run(docs, 40, 1, 64).matches);
    CHECK_FALSE(base.empty());
    CHECK(dump(run(docs, 40, 4, 64).matches) == base);
    CHECK(dump(run(docs, 40, 3, 1).matches) == base);
    CHECK(dump(run(docs, 40, 2, 7).matches) == base);
}

TEST_CASE("index survives a save and load") {
    std::mt19937_64 rng(16);
    const auto vocab = synth::vocabulary(rng, 500);
    std::vector<Document> docs;
    auto shared = synth::sample(rng, vocab, 50);
    for (int d = 0; d < 5; ++d) {
        auto w = synth::sample(rng, vocab, 200);
        std::copy(shared.begin(), shared.end(), w.begin() + 30 * d);
        docs.push_back(synth::make_doc(synth::doc_name("d", d), synth::join(w)));
    }
    const auto p = run(docs);
    const auto path = std::filesystem::temp_directory_path() / "diachron_index_rt.bin";
    p.index.save(path);
    const auto back = SkipGramIndex::load(path);
    std::filesystem::remove(path);
    CHECK(back.doc_ids == p.index.doc_ids);
    CHECK(back.total_postings() == p.index.total_postings());
    CHECK(back.marked_tokens == p.index.marked_tokens);
    CHECK(dump(find_matches(back)) == dump(p.matches));
}

TEST_CASE("boilerplate masks round trip through json") {
    BoilerplateMask m{DocumentId("d"), {false, true, true, false, true}};
    CHECK(m.marked_count() == 3);
    CHECK(m.ranges() == std::vector<std::pair<std::size_t, std::size_t>>{{1, 3}, {4, 5}});
    const auto back = mask_from_json(to_json(m));
    CHECK(back.marked == m.marked);
    CHECK(back.doc_id == m.doc_id);
}

}  // TEST_SUITE
