#include "diachron/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "diachron/corpus_io.hpp"
#include "diachron/error.hpp"
#include "diachron/parallel.hpp"

namespace diachron::analytics {

namespace {

std::optional<int> year_for(const Document& d, bool include_auto) {
    return d.effective_year(include_auto);
}

void require_lemmas(const Document& d) {
    if (!d.lemmas) throw DomainError("document " + d.meta.doc_id.str() + " has no lemmas; run lemmatize first");
}

std::string join(std::span<const std::string> words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    return out;
}

}  // namespace

std::vector<LifespanRecord> compute_lifespans(std::span<const Document> corpus, const LifespanOptions& options) {
    std::vector<const Document*> docs;
    for (const auto& d : corpus) {
        if (d.meta.dating_status == DatingStatus::Undated)
            throw DomainError("document " + d.meta.doc_id.str() +
                              " is undated; filter it out or run date-auto before computing lifespans");
        if (!year_for(d, options.include_autodated)) continue;
        if (options.use_lemmas) require_lemmas(d);
        docs.push_back(&d);
    }

    // Per-document distinct units with their frequencies.
    std::vector<std::vector<std::pair<std::string, std::size_t>>> units(docs.size());
    parallel_for(docs.size(), options.workers, [&](std::size_t i) {
        std::map<std::string, std::size_t> local;
        for (std::size_t t = 0; t < docs[i]->tokens.size(); ++t) ++local[docs[i]->unit(t, options.use_lemmas)];
        units[i].assign(local.begin(), local.end());
    });

    struct Acc {
        int first;
        const DocumentId* doc_first;
        int last;
        const DocumentId* doc_last;
        std::size_t freq;
    };
    std::unordered_map<std::string, Acc> acc;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const int year = *year_for(*docs[i], options.include_autodated);
        const DocumentId* id = &docs[i]->meta.doc_id;
        for (const auto& [unit, n] : units[i]) {
            auto [it, fresh] = acc.try_emplace(unit, Acc{year, id, year, id, n});
            if (fresh) continue;
            Acc& a = it->second;
            a.freq += n;
            if (year < a.first || (year == a.first && *id < *a.doc_first)) {
                a.first = year;
                a.doc_first = id;
            }
            if (year > a.last || (year == a.last && *id < *a.doc_last)) {
                a.last = year;
                a.doc_last = id;
            }
        }
    }

    std::vector<LifespanRecord> out;
    out.reserve(acc.size());
    for (const auto& [unit, a] : acc) {
        if (a.freq < options.min_frequency) continue;
        out.push_back(LifespanRecord{unit, a.first, a.last, a.last - a.first, *a.doc_first, *a.doc_last});
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.lemma < y.lemma; });
    return out;
}

LifespanStats lifespan_stats(std::span<const LifespanRecord> records, int corpus_span_years) {
    if (records.empty()) throw DomainError("lifespan statistics need at least one record");
    if (corpus_span_years < 0) throw DomainError("corpus span must be non-negative");
    std::vector<double> spans;
    spans.reserve(records.size());
    for (const auto& r : records) spans.push_back(r.span_years);
    std::sort(spans.begin(), spans.end());
    const double n = double(spans.size());
    LifespanStats s;
    s.count = spans.size();
    double sum = 0;
    for (double v : spans) sum += v;
    s.mean = sum / n;
    double sq = 0;
    for (double v : spans) sq += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(sq / n);
    const std::size_t mid = spans.size() / 2;
    s.median = spans.size() % 2 ? spans[mid] : (spans[mid - 1] + spans[mid]) / 2;
    s.mean_fraction_of_span = corpus_span_years > 0 ? s.mean / corpus_span_years : 0.0;
    return s;
}

std::vector<HistogramBucket> lifespan_histogram(std::span<const LifespanRecord> records, int bucket_years) {
    if (bucket_years <= 0) throw DomainError("histogram bucket width must be positive");
    int longest = 0;
    for (const auto& r : records) longest = std::max(longest, r.span_years);
    std::vector<HistogramBucket> out;
    if (records.empty()) return out;
    for (int start = 0; start <= longest; start += bucket_years)
        out.push_back(HistogramBucket{start, start + bucket_years - 1, 0});
    for (const auto& r : records) out[static_cast<std::size_t>(r.span_years / bucket_years)].count++;
    return out;
}

std::vector<ConcordanceLine> concordance(std::span<const Document> corpus, const std::string& query,
                                         const ConcordanceOptions& options) {
    std::vector<ConcordanceLine> out;
    for (const auto& d : corpus) {
        const auto year = year_for(d, options.include_autodated);
        if (!year) continue;
        if (options.use_lemmas) require_lemmas(d);
        const std::size_t n = d.tokens.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (d.unit(i, options.use_lemmas) != query) continue;
            ConcordanceLine line{d.meta.doc_id, *year, i, {}, d.tokens[i].surface, {}};
            for (std::size_t j = i - std::min(i, options.window); j < i; ++j) line.left.push_back(d.tokens[j].surface);
            for (std::size_t j = i + 1; j < n && j <= i + options.window; ++j) line.right.push_back(d.tokens[j].surface);
            out.push_back(std::move(line));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ConcordanceLine& a, const ConcordanceLine& b) {
        if (a.dod_hijri != b.dod_hijri) return a.dod_hijri < b.dod_hijri;
        if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
        return a.position < b.position;
    });
    return out;
}

std::vector<PeriodCount> counts_per_period(std::span<const Document> corpus, int bucket_years,
                                           bool include_autodated) {
    if (bucket_years <= 0) throw DomainError("bucket width must be positive");
    std::map<int, PeriodCount> buckets;
    for (const auto& d : corpus) {
        const auto year = year_for(d, include_autodated);
        if (!year) continue;
        const int k = (*year - 1) / bucket_years;  // years start at 1
        auto& b = buckets[k];
        b.word_count += d.meta.word_count;
        b.text_count += 1;
    }
    std::vector<PeriodCount> out;
    if (buckets.empty()) return out;
    for (int k = buckets.begin()->first; k <= buckets.rbegin()->first; ++k) {
        PeriodCount pc;
        if (auto it = buckets.find(k); it != buckets.end()) pc = it->second;
        pc.start_h = k * bucket_years + 1;
        pc.end_h = (k + 1) * bucket_years;
        out.push_back(pc);
    }
    return out;
}

std::string lifespans_csv(std::span<const LifespanRecord> records) {
    std::ostringstream out;
    out << "lemma,first_h,last_h,span,doc_first,doc_last\n";
    for (const auto& r : records)
        out << csv_field(r.lemma) << ',' << r.first_h << ',' << r.last_h << ',' << r.span_years << ','
            << csv_field(r.doc_first.str()) << ',' << csv_field(r.doc_last.str()) << '\n';
    return out.str();
}

std::string histogram_csv(std::span<const HistogramBucket> buckets) {
    std::ostringstream out;
    out << "span_start,span_end,lemmas\n";
    for (const auto& b : buckets) out << b.start << ',' << b.end << ',' << b.count << '\n';
    return out.str();
}

std::string concordance_csv(std::span<const ConcordanceLine> lines) {
    std::ostringstream out;
    out << "doc_id,dod_hijri,position,left,hit,right\n";
    for (const auto& l : lines)
        out << csv_field(l.doc_id.str()) << ',' << l.dod_hijri << ',' << l.position << ',' << csv_field(join(l.left))
            << ',' << csv_field(l.hit) << ',' << csv_field(join(l.right)) << '\n';
    return out.str();
}

std::string period_counts_csv(std::span<const PeriodCount> counts) {
    std::ostringstream out;
    out << "start_h,end_h,word_count,text_count\n";
    for (const auto& c : counts) out << c.start_h << ',' << c.end_h << ',' << c.word_count << ',' << c.text_count << '\n';
    return out.str();
}

}  // namespace diachron::analytics
