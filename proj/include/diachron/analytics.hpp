#pragma once

#include <span>
#include <string>
#include <vector>

#include "diachron/corpus.hpp"

namespace diachron::analytics {

struct LifespanRecord {
    std::string lemma;
    int first_h = 0;
    int last_h = 0;
    int span_years = 0;
    DocumentId doc_first;
    DocumentId doc_last;
};

struct LifespanOptions {
    bool use_lemmas = true;
    // Count AutoDated documents at their bin midpoint.
    bool include_autodated = false;
    // Drop lemmas with fewer total occurrences; 0 keeps everything.
    std::size_t min_frequency = 0;
    unsigned workers = 1;
};

// One record per distinct lemma, sorted by lemma. Ties on the year go to the
// smallest doc id at both ends. Throws DomainError if an Undated document is
// present, or lemmas are requested but missing.
std::vector<LifespanRecord> compute_lifespans(std::span<const Document> corpus, const LifespanOptions& options = {});

struct LifespanStats {
    double mean = 0.0;
    double sd = 0.0;  // population
    double median = 0.0;
    double mean_fraction_of_span = 0.0;
    std::size_t count = 0;
};

LifespanStats lifespan_stats(std::span<const LifespanRecord> records, int corpus_span_years);

struct HistogramBucket {
    int start = 0;  // inclusive
    int end = 0;    // inclusive
    std::size_t count = 0;
};

// Buckets [0, w-1], [w, 2w-1], ... up to the longest span.
std::vector<HistogramBucket> lifespan_histogram(std::span<const LifespanRecord> records, int bucket_years = 100);

struct ConcordanceLine {
    DocumentId doc_id;
    int dod_hijri = 0;
    std::size_t position = 0;
    std::vector<std::string> left;
    std::string hit;
    std::vector<std::string> right;
};

struct ConcordanceOptions {
    std::size_t window = 5;
    bool use_lemmas = true;
    bool include_autodated = false;
};

// Every occurrence of `query` in dated documents, sorted by
// (year, doc_id, position). Windows show surface forms and stop at the
// document edges.
std::vector<ConcordanceLine> concordance(std::span<const Document> corpus, const std::string& query,
                                         const ConcordanceOptions& options = {});

struct PeriodCount {
    int start_h = 0;
    int end_h = 0;
    std::size_t word_count = 0;
    std::size_t text_count = 0;
};

// Buckets [k*w+1, (k+1)*w] spanning the dated documents' years, empty
// buckets included. Undated documents are ignored.
std::vector<PeriodCount> counts_per_period(std::span<const Document> corpus, int bucket_years = 50,
                                           bool include_autodated = false);

std::string lifespans_csv(std::span<const LifespanRecord> records);
std::string histogram_csv(std::span<const HistogramBucket> buckets);
std::string concordance_csv(std::span<const ConcordanceLine> lines);
std::string period_counts_csv(std::span<const PeriodCount> counts);

// Reference figures for English (COHA), printed in report footers only.
struct EnglishReference {
    static constexpr double mean_years = 68;
    static constexpr double sd_years = 58;
    static constexpr double median_years = 60;
    static constexpr double fraction_of_span = 0.36;
};

}  // namespace diachron::analytics
