#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"

#include "diachron/analytics.hpp"
#include "diachron/error.hpp"
#include "support/synthetic.hpp"

using namespace diachron;
using namespace diachron::analytics;

namespace {

Document with_lemmas(Document d) {
    std::vector<std::string> l;
    for (const auto& t : d.tokens) l.push_back(t.surface);
    d.lemmas = std::move(l);
    return d;
}

// 50 dated documents over a small vocabulary, so lemmas recur across years.
std::vector<Document> fifty_docs(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto vocab = synth::vocabulary(rng, 120);
    std::vector<Document> docs;
    for (std::size_t i = 0; i < 50; ++i) {
        const int year = 1 + static_cast<int>(rng() % 1436);
        const auto n = 20 + rng() % 80;
        docs.push_back(with_lemmas(synth::make_doc(synth::doc_name("d", i), synth::join(synth::sample(rng, vocab, n)), year)));
    }
    return docs;
}

}  // namespace

TEST_SUITE("analytics") {

TEST_CASE("lifespan of a lemma across three documents") {
    std::vector<Document> docs{with_lemmas(synth::make_doc("a", "kitab qalam", 100)),
                               with_lemmas(synth::make_doc("b", "kitab", 500)),
                               with_lemmas(synth::make_doc("c", "kitab bayt", 900))};
    const auto rs = compute_lifespans(docs);
    REQUIRE(rs.size() == 3);
    CHECK(rs[0].lemma == "bayt");
    CHECK(rs[0].span_years == 0);
    CHECK(rs[1].lemma == "kitab");
    CHECK(rs[1].first_h == 100);
    CHECK(rs[1].last_h == 900);
    CHECK(rs[1].span_years == 800);
    CHECK(rs[1].doc_first.str() == "a");
    CHECK(rs[1].doc_last.str() == "c");
    CHECK(rs[2].lemma == "qalam");
    CHECK(rs[2].first_h == 100);
    CHECK(rs[2].last_h == 100);
}

TEST_CASE("lifespans agree with a brute-force scan") {
    const auto docs = fifty_docs(11);
    const auto rs = compute_lifespans(docs, {true, false, 0, 3});
    std::set<std::string> all;
    for (const auto& d : docs)
        for (const auto& l : *d.lemmas) all.insert(l);
    REQUIRE(rs.size() == all.size());
    for (const auto& r : rs) {
        int lo = 1 << 30, hi = -1;
        std::string lo_id, hi_id;
        for (const auto& d : docs) {
            if (std::find(d.lemmas->begin(), d.lemmas->end(), r.lemma) == d.lemmas->end()) continue;
            const int y = *d.meta.dod_hijri;
            const auto id = d.meta.doc_id.str();
            if (y < lo || (y == lo && id < lo_id)) lo = y, lo_id = id;
            if (y > hi || (y == hi && id < hi_id)) hi = y, hi_id = id;
        }
        CHECK(r.first_h == lo);
        CHECK(r.last_h == hi);
        CHECK(r.span_years == hi - lo);
        CHECK(r.span_years >= 0);
        CHECK(r.doc_first.str() == lo_id);
        CHECK(r.doc_last.str() == hi_id);
    }
    const auto serial = compute_lifespans(docs, {true, false, 0, 1});
    CHECK(lifespans_csv(serial) == lifespans_csv(rs));
}

TEST_CASE("lifespan options") {
    std::vector<Document> docs{with_lemmas(synth::make_doc("a", "x x y", 100)),
                               with_lemmas(synth::make_doc("b", "x z", 300))};
    CHECK(compute_lifespans(docs, {true, false, 3}).size() == 1);
    CHECK(compute_lifespans(docs, {true, false, 2}).size() == 1);
    CHECK(compute_lifespans(docs, {true, false, 1}).size() == 3);

    auto with_auto = docs;
    auto undated = with_lemmas(synth::make_doc("c", "x w"));
    with_auto.push_back(undated);
    CHECK_THROWS_AS(compute_lifespans(with_auto), DomainError);

    with_auto.back().meta.dating_status = DatingStatus::AutoDated;
    with_auto.back().meta.auto_bin = PeriodBin{"901-1000", 901, 1000};
    auto rs = compute_lifespans(with_auto);
    CHECK(rs.size() == 3);
    CHECK(rs[0].last_h == 300);
    rs = compute_lifespans(with_auto, {true, true});
    CHECK(rs.size() == 4);
    CHECK(rs[1].lemma == "x");
    CHECK(rs[1].last_h == 950);

    std::vector<Document> bare{synth::make_doc("a", "x", 100)};
    CHECK_THROWS_AS(compute_lifespans(bare), DomainError);
    CHECK(compute_lifespans(bare, {false}).size() == 1);
}

TEST_CASE("lifespan statistics") {
    auto rec = [](int span) { return LifespanRecord{"w", 1, 1 + span, span, DocumentId("a"), DocumentId("a")}; };
    std::vector<LifespanRecord> zeros{rec(0), rec(0), rec(0)};
    auto s = lifespan_stats(zeros, 1000);
    CHECK(s.mean == 0);
    CHECK(s.sd == 0);
    CHECK(s.median == 0);
    CHECK(s.mean_fraction_of_span == 0);
    CHECK(s.count == 3);

    std::vector<LifespanRecord> two{rec(100), rec(300)};
    s = lifespan_stats(two, 400);
    CHECK(s.mean == doctest::Approx(200));
    CHECK(s.sd == doctest::Approx(100));
    CHECK(s.median == doctest::Approx(200));
    CHECK(s.mean_fraction_of_span == doctest::Approx(0.5));
    CHECK(lifespan_stats(zeros, 0).mean_fraction_of_span == 0);

    std::vector<LifespanRecord> none;
    CHECK_THROWS_AS(lifespan_stats(none, 100), DomainError);
    std::vector<LifespanRecord> odd{rec(5), rec(1), rec(9)};
    CHECK(lifespan_stats(odd, 10).median == 5);
}

TEST_CASE("lifespan histogram partitions the records") {
    const auto docs = fifty_docs(12);
    const auto rs = compute_lifespans(docs);
    for (int w : {1, 50, 100, 700}) {
        const auto h = lifespan_histogram(rs, w);
        std::size_t total = 0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            CHECK(h[i].start == static_cast<int>(i) * w);
            CHECK(h[i].end == h[i].start + w - 1);
            const auto expect = std::count_if(rs.begin(), rs.end(), [&](const auto& r) {
                return r.span_years >= h[i].start && r.span_years <= h[i].end;
            });
            CHECK(h[i].count == static_cast<std::size_t>(expect));
            total += h[i].count;
        }
        CHECK(total == rs.size());
    }
}

TEST_CASE("concordance order and windows") {
    std::vector<Document> docs{with_lemmas(synth::make_doc("b", "one two hit three", 300)),
                               with_lemmas(synth::make_doc("a", "hit x y z w v u hit", 300)),
                               with_lemmas(synth::make_doc("c", "p hit q", 100)),
                               with_lemmas(synth::make_doc("u", "hit"))};
    const auto lines = concordance(docs, "hit", {2});
    REQUIRE(lines.size() == 4);
    CHECK(lines[0].doc_id.str() == "c");
    CHECK(lines[1].doc_id.str() == "a");
    CHECK(lines[1].position == 0);
    CHECK(lines[1].left.empty());
    CHECK(lines[1].right == std::vector<std::string>{"x", "y"});
    CHECK(lines[2].doc_id.str() == "a");
    CHECK(lines[2].position == 7);
    CHECK(lines[2].left == std::vector<std::string>{"v", "u"});
    CHECK(lines[2].right.empty());
    CHECK(lines[3].doc_id.str() == "b");
    CHECK(lines[3].left == std::vector<std::string>{"one", "two"});
    CHECK(lines[3].right == std::vector<std::string>{"three"});
    CHECK(concordance(docs, "absent").empty());
    const auto csv = concordance_csv(lines);
    CHECK(csv.rfind("doc_id,dod_hijri,position,left,hit,right\n", 0) == 0);
}

TEST_CASE("concordance hits match a brute-force count for any window") {
    const auto docs = fifty_docs(13);
    std::map<std::string, std::size_t> freq;
    for (const auto& d : docs)
        for (const auto& l : *d.lemmas) ++freq[l];
    int checked = 0;
    for (const auto& [lemma, n] : freq) {
        if (++checked > 20) break;
        std::vector<ConcordanceLine> prev;
        for (std::size_t w : {0u, 1u, 5u, 12u}) {
            const auto lines = concordance(docs, lemma, {w});
            CHECK(lines.size() == n);
            for (const auto& l : lines) {
                CHECK(l.left.size() <= w);
                CHECK(l.right.size() <= w);
                CHECK(l.hit == lemma);
            }
            if (!prev.empty())
                for (std::size_t i = 0; i < lines.size(); ++i) {
                    CHECK(lines[i].doc_id == prev[i].doc_id);
                    CHECK(lines[i].position == prev[i].position);
                }
            for (std::size_t i = 1; i < lines.size(); ++i) {
                const auto& a = lines[i - 1];
                const auto& b = lines[i];
                CHECK(std::tie(a.dod_hijri, a.doc_id, a.position) < std::tie(b.dod_hijri, b.doc_id, b.position));
            }
            prev = lines;
        }
    }
}

TEST_CASE("counts per period") {
    std::vector<Document> one{synth::make_doc("a", "w1 w2 w3", 120)};
    auto c = counts_per_period(one, 50);
    REQUIRE(c.size() == 1);
    CHECK(c[0].start_h == 101);
    CHECK(c[0].end_h == 150);
    CHECK(c[0].word_count == 3);
    CHECK(c[0].text_count == 1);

    std::vector<Document> edges{synth::make_doc("a", "x", 50), synth::make_doc("b", "x y", 51),
                                synth::make_doc("c", "x", 200), synth::make_doc("u", "x x x x")};
    c = counts_per_period(edges, 50);
    REQUIRE(c.size() == 4);
    CHECK(c[0].start_h == 1);
    CHECK(c[0].text_count == 1);
    CHECK(c[1].start_h == 51);
    CHECK(c[1].word_count == 2);
    CHECK(c[2].text_count == 0);
    CHECK(c[3].end_h == 200);
    CHECK(period_counts_csv(c).rfind("start_h,end_h,word_count,text_count\n", 0) == 0);
}

TEST_CASE("period counts conserve words and texts") {
    const auto docs = fifty_docs(14);
    for (int w : {1, 25, 50, 333}) {
        const auto c = counts_per_period(docs, w);
        std::map<int, std::pair<std::size_t, std::size_t>> oracle;
        std::size_t words = 0;
        for (const auto& d : docs) {
            const int k = (*d.meta.dod_hijri - 1) / w;
            oracle[k].first += d.tokens.size();
            oracle[k].second += 1;
            words += d.tokens.size();
        }
        std::size_t sw = 0, st = 0;
        for (const auto& p : c) {
            CHECK(p.end_h - p.start_h + 1 == w);
            const int k = (p.start_h - 1) / w;
            auto it = oracle.find(k);
            CHECK(p.word_count == (it == oracle.end() ? 0 : it->second.first));
            CHECK(p.text_count == (it == oracle.end() ? 0 : it->second.second));
            sw += p.word_count;
            st += p.text_count;
        }
        CHECK(sw == words);
        CHECK(st == docs.size());
    }
}

}  // TEST_SUITE
